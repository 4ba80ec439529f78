// Synthesizes a patrol tree for the bundled UAV scenario and replays it.

#include <fstream>
#include <iostream>
#include <sstream>

#include "btgen/btgen.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    const std::string dir = BTGEN_FIXTURES_DIR;
    const btgen::Scenario scenario = btgen::load_scenario(slurp(dir + "/scenarios/uav_patrol.json"));
    const btgen::NodeLibrary library = btgen::load_library(slurp(dir + "/libraries/uav.json"));

    btgen::SearchConfig config;
    config.policy = btgen::PolicyKind::MctsOracle;
    const auto result = btgen::synthesize(scenario, library, config);
    std::cout << btgen::serialize_bt_xml(result.tree);
    std::cout << "expansions: " << result.report.expansions << "\n";

    const auto episode = btgen::run_episode(result.tree, scenario, library);
    for (const auto& e : episode.trace)
        std::cout << "tick " << e.tick << "  " << e.node << " -> " << btgen::to_string(e.status) << "\n";
    std::cout << (episode.success ? "goal reached" : "goal missed") << " after " << episode.ticks_used << " ticks\n";
    return episode.success ? 0 : 1;
}
