#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "btgen/btgen.hpp"

namespace btgen::testing {

inline const std::string kFixtures = BTGEN_FIXTURES_DIR;

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fixture(const std::string& rel) { return kFixtures + "/" + rel; }

struct Bundle {
    std::string name;
    Scenario scenario;
    NodeLibrary library;
};

inline Bundle bundle(const std::string& scenario_name) {
    Scenario sc = load_scenario(slurp(fixture("scenarios/" + scenario_name + ".json")));
    NodeLibrary lib = load_library(slurp(fixture("scenarios/" + sc.library)));
    return {scenario_name, std::move(sc), std::move(lib)};
}

inline const std::vector<std::string>& bundled_scenarios() {
    static const std::vector<std::string> names = {"area_survey", "door_open", "pick_place", "recharge_dock",
                                                   "uav_patrol"};
    return names;
}

/// The uav_patrol scenario with its scripted events removed.
inline Scenario without_events(const Scenario& sc) { return sc.with_events({}); }

/// Leaf executions as (tick, definition, status), independent of instance names,
/// so trees built under different naming agree when they behave the same.
inline std::vector<std::string> binding_trace(const BehaviorTree& tree, const Scenario& sc, const NodeLibrary& lib) {
    std::vector<std::string> out;
    for (const auto& e : run_episode(tree, sc, lib).trace) {
        const BTNode* n = find_node(tree.root(), e.node);
        const std::string def = n && !n->binding.empty() ? n->binding : e.node;
        out.push_back(std::to_string(e.tick) + ":" + def + ":" + std::string(to_string(e.status)));
    }
    return out;
}

/// Trace equivalence on the scenario's own schedule and with events removed.
inline bool trace_equivalent(const BehaviorTree& a, const BehaviorTree& b, const Scenario& sc, const NodeLibrary& lib) {
    const Scenario quiet = without_events(sc);
    return binding_trace(a, sc, lib) == binding_trace(b, sc, lib) &&
           binding_trace(a, quiet, lib) == binding_trace(b, quiet, lib);
}

}  // namespace btgen::testing
