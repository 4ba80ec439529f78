#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "btgen/library.hpp"
#include "btgen/scenario.hpp"
#include "btgen/tick.hpp"
#include "btgen/validate.hpp"

namespace btgen {

/// Problems binding a library to a scenario: definitions whose primitive is
/// missing or of the wrong kind.
inline std::vector<std::string> check_library_bindings(const NodeLibrary& library, const Scenario& scenario) {
    std::vector<std::string> out;
    for (const auto* d : library.definitions()) {
        const bool ok = d->type == NodeType::Condition ? scenario.conditions.contains(d->binding)
                                                       : scenario.actions.contains(d->binding);
        if (!ok)
            out.push_back(std::string(to_string(d->type)) + " '" + d->name + "' binds unknown " +
                          (d->type == NodeType::Condition ? "condition" : "action") + " '" + d->binding + "'");
    }
    return out;
}

/// Executes Condition/Action leaves against a scenario through the node library.
class SimExecutor {
public:
    SimExecutor(const Scenario& scenario, const NodeLibrary& library, bool open_as_failure = false)
        : scenario_(&scenario), library_(&library), open_as_failure_(open_as_failure) {}

    NodeStatus condition(const BTNode& leaf, const WorldState& world) const {
        const ConditionSchema& c = resolve_condition(leaf);
        check_world(world);
        return c.compiled.eval(world.values) ? NodeStatus::Success : NodeStatus::Failure;
    }

    NodeStatus action(const BTNode& leaf, WorldState& world) const {
        const ActionSchema& a = resolve_action(leaf);
        check_world(world);
        const bool continuing = world.in_progress && world.in_progress->action == a.name;
        if (!a.compiled_precondition.eval(world.values)) {
            if (continuing) world.in_progress.reset();
            return NodeStatus::Failure;
        }
        if (continuing) {
            if (--world.in_progress->remaining > 0) return NodeStatus::Running;
            world.in_progress.reset();
        } else if (a.duration > 1) {
            world.in_progress = InProgress{a.name, a.duration - 1};
            return NodeStatus::Running;
        }
        for (const auto& e : a.compiled_effects) scenario_->apply(e, world.values);
        return NodeStatus::Success;
    }

    NodeStatus open(const BTNode& node, WorldState&) const {
        if (open_as_failure_) return NodeStatus::Failure;
        throw Error(ErrorCode::UnboundLeaf, "Open node '" + node.instance_name + "' cannot be executed");
    }

    const ConditionSchema& resolve_condition(const BTNode& leaf) const {
        const NodeDefinition* d = definition(leaf, NodeType::Condition);
        auto it = scenario_->conditions.find(d->binding);
        if (it == scenario_->conditions.end())
            throw Error(ErrorCode::UnboundLeaf, "condition '" + d->name + "' binds unknown predicate '" + d->binding + "'");
        return it->second;
    }

    const ActionSchema& resolve_action(const BTNode& leaf) const {
        const NodeDefinition* d = definition(leaf, NodeType::Action);
        auto it = scenario_->actions.find(d->binding);
        if (it == scenario_->actions.end())
            throw Error(ErrorCode::UnboundLeaf, "action '" + d->name + "' binds unknown action '" + d->binding + "'");
        return it->second;
    }

private:
    const NodeDefinition* definition(const BTNode& leaf, NodeType type) const {
        const NodeDefinition* d = library_->find(leaf.binding);
        if (!d) throw Error(ErrorCode::UnboundLeaf, "leaf '" + leaf.instance_name + "' binds '" + leaf.binding +
                                                       "' which is not in the node library");
        if (d->type != type)
            throw Error(ErrorCode::UnboundLeaf, "leaf '" + leaf.instance_name + "' binds " +
                                                    std::string(to_string(d->type)) + " '" + d->name + "'");
        return d;
    }

    void check_world(const WorldState& world) const {
        if (world.values.size() != scenario_->variables.size())
            throw Error(ErrorCode::UnknownVariable, "world assignment does not cover the scenario variables");
    }

    const Scenario* scenario_;
    const NodeLibrary* library_;
    bool open_as_failure_;
};

/// One tick against a scenario. A multi-tick action that was in progress but
/// not ticked again this time is abandoned.
template <class Observer = NoObserver>
std::pair<NodeStatus, WorldState> tick(const BehaviorTree& tree, WorldState world, const Scenario& scenario,
                                       const NodeLibrary& library, Observer observe = {},
                                       bool open_as_failure = false) {
    const auto before = world.in_progress;
    auto [status, after] = tick(tree, std::move(world), SimExecutor(scenario, library, open_as_failure), observe);
    if (before && after.in_progress == before) after.in_progress.reset();
    return {status, std::move(after)};
}

/// FNV-1a over the assignment, tick index and in-progress action.
inline std::string world_digest(const WorldState& w) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xFFu;
            h *= 1099511628211ull;
        }
    };
    mix(w.values.size());
    for (Value v : w.values) mix(static_cast<std::uint64_t>(v));
    mix(static_cast<std::uint64_t>(w.tick_index));
    if (w.in_progress) {
        for (unsigned char c : w.in_progress->action) mix(c);
        mix(static_cast<std::uint64_t>(w.in_progress->remaining));
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct TraceEntry {
    int tick = 0;
    std::string node;  // leaf instance name
    NodeStatus status = NodeStatus::Failure;
    std::string digest;                       // world after the leaf executed
    std::optional<std::vector<Value>> state;  // full assignment when requested

    friend bool operator==(const TraceEntry& a, const TraceEntry& b) {
        return a.tick == b.tick && a.node == b.node && a.status == b.status && a.digest == b.digest;
    }
};

struct EpisodeResult {
    bool success = false;
    int ticks_used = 0;
    std::vector<TraceEntry> trace;
    std::size_t goal_satisfied = 0;
    std::size_t goal_total = 0;
    std::vector<Value> final_assignment;

    /// Fraction of goal literals satisfied at termination; 1 for an empty goal.
    double final_goal_fraction() const {
        return goal_total == 0 ? 1.0 : static_cast<double>(goal_satisfied) / static_cast<double>(goal_total);
    }

    friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

struct EpisodeOptions {
    bool open_as_failure = false;  // tick Open placeholders as Failure stubs
    bool record_states = false;    // keep full assignments in the trace
};

/// Runs the scenario loop: apply events of the tick, tick the tree, stop on goal
/// or at max_ticks. `seed` is accepted for scenarios with stochastic events;
/// bundled scenarios are deterministic and schedule variants come from
/// event_schedule_variant().
inline EpisodeResult run_episode(const BehaviorTree& tree, const Scenario& scenario, const NodeLibrary& library,
                                 std::uint64_t seed = 0, EpisodeOptions options = {}) {
    (void)seed;
    EpisodeResult result;
    result.goal_total = scenario.goal.size();
    WorldState world = scenario.initial_world();
    std::size_t next_event = 0;
    int tick_index = 0;
    auto observe = [&](const BTNode& leaf, NodeStatus s, const WorldState& w) {
        TraceEntry e{tick_index, leaf.instance_name, s, world_digest(w), std::nullopt};
        if (options.record_states) e.state = w.values;
        result.trace.push_back(std::move(e));
    };
    for (tick_index = 1; tick_index <= scenario.max_ticks; ++tick_index) {
        world.tick_index = tick_index;
        while (next_event < scenario.events.size() && scenario.events[next_event].tick == tick_index) {
            const auto& ev = scenario.events[next_event++];
            world.values[ev.var] = ev.value;
        }
        auto ticked = tick(tree, std::move(world), scenario, library, observe, options.open_as_failure);
        world = std::move(ticked.second);
        result.ticks_used = tick_index;
        if (scenario.goal_holds(world.values)) {
            result.success = true;
            break;
        }
    }
    result.goal_satisfied = scenario.goal_satisfied(world.values);
    result.final_assignment = world.values;
    return result;
}

/// Deterministic 64-bit mixer used for schedule variants.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Variant 0 is the scenario's own schedule. Other variants shift every group
/// of same-tick events by an offset in [-2, 2], clamped to [1, max_ticks].
inline Scenario event_schedule_variant(const Scenario& scenario, std::uint64_t seed, std::size_t variant) {
    if (variant == 0 || scenario.events.empty()) return scenario;
    std::uint64_t state = splitmix64(seed ^ splitmix64(variant));
    std::map<int, int> shifted;
    for (const auto& e : scenario.events) {
        if (shifted.contains(e.tick)) continue;
        state = splitmix64(state);
        const int offset = static_cast<int>(state % 5) - 2;
        shifted[e.tick] = std::clamp(e.tick + offset, 1, scenario.max_ticks);
    }
    std::vector<ScheduledEvent> evs = scenario.events;
    for (auto& e : evs) e.tick = shifted[e.tick];
    return scenario.with_events(std::move(evs));
}

inline nlohmann::ordered_json trace_entry_json(const TraceEntry& e, const Scenario& scenario) {
    nlohmann::ordered_json j = {{"tick", e.tick},
                                {"node", e.node},
                                {"status", std::string(to_string(e.status))},
                                {"digest", e.digest}};
    if (e.state) j["state"] = scenario.assignment_json(*e.state);
    return j;
}

inline nlohmann::ordered_json episode_json(const EpisodeResult& r, const Scenario& scenario) {
    nlohmann::ordered_json trace = nlohmann::ordered_json::array();
    for (const auto& e : r.trace) trace.push_back(trace_entry_json(e, scenario));
    return {{"success", r.success},
            {"ticks_used", r.ticks_used},
            {"goal_satisfied", r.goal_satisfied},
            {"goal_total", r.goal_total},
            {"final_goal_fraction", r.final_goal_fraction()},
            {"final_state", scenario.assignment_json(r.final_assignment)},
            {"trace", trace}};
}

/// Trace as JSON Lines, one leaf execution per line.
inline std::string trace_jsonl(const EpisodeResult& r, const Scenario& scenario) {
    std::string out;
    for (const auto& e : r.trace) {
        out += trace_entry_json(e, scenario).dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Node-level unit tests

struct NodeTestCase {
    std::string node;                                     // node-definition name
    std::map<std::string, std::string> world;             // overrides of init, textual values
    NodeStatus expected_status = NodeStatus::Success;
    std::optional<std::map<std::string, std::string>> expected;  // nullopt = unchanged
};

struct NodeTestResult {
    std::string node;
    bool passed = false;
    NodeStatus expected_status = NodeStatus::Success;
    NodeStatus actual_status = NodeStatus::Success;
    std::vector<Value> expected_assignment;
    std::vector<Value> actual_assignment;
};

struct NodeTestReport {
    std::vector<NodeTestResult> results;

    bool all_passed() const {
        for (const auto& r : results)
            if (!r.passed) return false;
        return true;
    }
    std::size_t failures() const {
        std::size_t n = 0;
        for (const auto& r : results) n += !r.passed;
        return n;
    }
};

/// Executes each leaf in isolation against its case world (one tick).
inline NodeTestReport unit_test_nodes(const NodeLibrary& library, const Scenario& scenario,
                                      const std::vector<NodeTestCase>& cases) {
    NodeTestReport report;
    for (const auto& c : cases) {
        const NodeDefinition* def = library.find(c.node);
        if (!def) throw Error(ErrorCode::UnknownNode, "unit test references unknown node '" + c.node + "'");
        WorldState world = scenario.initial_world();
        for (const auto& [var, text] : c.world) {
            const std::size_t i = scenario.variable_index(var);
            world.values[i] = scenario.resolve_value(i, text);
        }
        std::vector<Value> expected = world.values;
        if (c.expected) {
            for (const auto& [var, text] : *c.expected) {
                const std::size_t i = scenario.variable_index(var);
                expected[i] = scenario.resolve_value(i, text);
            }
        }
        const BehaviorTree leaf(make_leaf(def->type == NodeType::Condition ? NodeKind::Condition : NodeKind::Action,
                                          def->name));
        world.tick_index = 1;
        auto [status, after] = tick(leaf, world, scenario, library);
        NodeTestResult r;
        r.node = c.node;
        r.expected_status = c.expected_status;
        r.actual_status = status;
        r.expected_assignment = std::move(expected);
        r.actual_assignment = after.values;
        r.passed = r.expected_status == r.actual_status && r.expected_assignment == r.actual_assignment;
        report.results.push_back(std::move(r));
    }
    return report;
}

/// Parses `{"cases": [{"node", "world": {...}, "status", "expected": {...}}]}`.
inline std::vector<NodeTestCase> load_node_test_cases(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("cases file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("cases") || !doc["cases"].is_array())
        throw Error(ErrorCode::SchemaViolation, "cases file must be an object with a \"cases\" array");
    std::vector<NodeTestCase> out;
    for (const auto& c : doc["cases"]) {
        if (!c.is_object() || !c.contains("node") || !c.contains("status") || !c["node"].is_string() ||
            !c["status"].is_string())
            throw Error(ErrorCode::SchemaViolation, "each case needs string \"node\" and \"status\"");
        NodeTestCase tc;
        tc.node = c["node"].get<std::string>();
        auto status = status_from_string(c["status"].get<std::string>());
        if (!status) throw Error(ErrorCode::SchemaViolation, "unknown status '" + c["status"].get<std::string>() + "'");
        tc.expected_status = *status;
        auto read_map = [](const nlohmann::json& m) {
            if (!m.is_object()) throw Error(ErrorCode::SchemaViolation, "assignments must be objects");
            std::map<std::string, std::string> out;
            for (const auto& [k, v] : m.items()) out[k] = detail::json_value_text(v);
            return out;
        };
        if (c.contains("world")) tc.world = read_map(c["world"]);
        if (c.contains("expected")) tc.expected = read_map(c["expected"]);
        out.push_back(std::move(tc));
    }
    return out;
}

}  // namespace btgen
