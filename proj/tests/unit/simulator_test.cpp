#include <gtest/gtest.h>

#include "support/fixtures.hpp"

using namespace btgen;
using btgen::testing::bundle;
using btgen::testing::fixture;
using btgen::testing::slurp;
using btgen::testing::without_events;

namespace {

std::vector<std::pair<int, std::string>> steps(const EpisodeResult& r) {
    std::vector<std::pair<int, std::string>> out;
    for (const auto& e : r.trace) out.emplace_back(e.tick, e.node + ":" + std::string(to_string(e.status)));
    return out;
}

}  // namespace

TEST(Simulator, ReferenceTreeWithoutEventsPatrolsInFourTicks) {
    const auto b = bundle("uav_patrol");
    const EpisodeResult r = run_episode(uav_patrol_reference_tree(), without_events(b.scenario), b.library);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.ticks_used, 4);
    ASSERT_EQ(r.trace.size(), 8u);
    for (int t = 1; t <= 4; ++t) {
        EXPECT_EQ(r.trace[2 * (t - 1)].node, "check-target_detected");
        EXPECT_EQ(r.trace[2 * (t - 1)].status, NodeStatus::Failure);
        EXPECT_EQ(r.trace[2 * t - 1].node, "move-to_next-pos");
    }
    EXPECT_DOUBLE_EQ(r.final_goal_fraction(), 1.0);
}

TEST(Simulator, DetectionAtTickThreeIsWarnedThatTick) {
    const auto b = bundle("uav_patrol");
    const EpisodeResult r = run_episode(uav_patrol_reference_tree(), b.scenario, b.library);
    const std::vector<std::pair<int, std::string>> expected = {
        {1, "check-target_detected:Failure"}, {1, "move-to_next-pos:Success"},
        {2, "check-target_detected:Failure"}, {2, "move-to_next-pos:Success"},
        {3, "check-target_detected:Success"}, {3, "warn-target:Success"},
        {4, "check-target_detected:Failure"}, {4, "move-to_next-pos:Success"},
        {5, "check-target_detected:Failure"}, {5, "move-to_next-pos:Success"},
    };
    EXPECT_EQ(steps(r), expected);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.ticks_used, 5);
}

TEST(Simulator, MoveOnlyTreeNeverHandlesThreat) {
    const auto b = bundle("uav_patrol");
    const BehaviorTree t(make_action("move-to_next-pos"));
    const EpisodeResult r = run_episode(t, b.scenario, b.library);
    EXPECT_FALSE(r.success);
    EXPECT_EQ(r.ticks_used, b.scenario.max_ticks);
    EXPECT_EQ(r.goal_satisfied, 1u);
    EXPECT_DOUBLE_EQ(r.final_goal_fraction(), 0.5);
}

TEST(Simulator, EpisodesAreDeterministic) {
    const auto b = bundle("uav_patrol");
    const EpisodeResult a = run_episode(uav_patrol_reference_tree(), b.scenario, b.library, 1);
    const EpisodeResult c = run_episode(uav_patrol_reference_tree(), b.scenario, b.library, 99);
    EXPECT_EQ(a.trace, c.trace);
    EXPECT_EQ(trace_jsonl(a, b.scenario), trace_jsonl(c, b.scenario));
}

TEST(Simulator, OpenNodesFailOnlyWhenStubbed) {
    const auto b = bundle("uav_patrol");
    const BehaviorTree t(make_fallback("f", {make_open("o", {}), make_action("move-to_next-pos")}));
    EXPECT_THROW(run_episode(t, b.scenario, b.library), Error);
    EXPECT_TRUE(run_episode(t, without_events(b.scenario), b.library, 0, {true, false}).success);
}

TEST(Simulator, UnknownLeafIsUnbound) {
    const auto b = bundle("uav_patrol");
    try {
        run_episode(BehaviorTree(make_action("teleport")), b.scenario, b.library);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnboundLeaf);
    }
}

TEST(Simulator, MultiTickActionRunsThenCompletes) {
    const Scenario sc = load_scenario(R"({
      "name": "slow", "variables": {"x": {"type": "int", "min": 0, "max": 2}},
      "init": {"x": 0}, "goal": "x = 2", "max_ticks": 10,
      "actions": {"inc": {"effects": ["x += 1"], "duration": 2}}
    })");
    const NodeLibrary lib = load_library(R"({"nodes":[{"type":"action","name":"inc"}]})");
    const EpisodeResult r = run_episode(BehaviorTree(make_action("inc")), sc, lib);
    ASSERT_TRUE(r.success);
    EXPECT_EQ(r.ticks_used, 4);
    EXPECT_EQ(r.trace[0].status, NodeStatus::Running);
    EXPECT_EQ(r.trace[1].status, NodeStatus::Success);
}

TEST(Simulator, InterruptedActionIsAbandoned) {
    // The toggle flips each tick; when the guard fails, the slow action is not
    // ticked and must restart from scratch, so it never completes.
    const Scenario sc = load_scenario(R"({
      "name": "preempt", "variables": {"x": {"type": "int", "min": 0, "max": 1}, "go": {"type": "bool"}},
      "init": {"x": 0, "go": true}, "goal": "x = 1", "max_ticks": 12,
      "conditions": {"go": "go = true"},
      "actions": {"inc": {"effects": ["x += 1"], "duration": 2}},
      "events": [{"tick": 2, "variable": "go", "value": false}, {"tick": 3, "variable": "go", "value": true},
                 {"tick": 4, "variable": "go", "value": false}, {"tick": 5, "variable": "go", "value": true},
                 {"tick": 6, "variable": "go", "value": false}, {"tick": 7, "variable": "go", "value": true}]
    })");
    const NodeLibrary lib =
        load_library(R"({"nodes":[{"type":"action","name":"inc"},{"type":"condition","name":"go"}]})");
    const BehaviorTree t(make_sequence("s", {make_condition("go"), make_action("inc")}));
    const EpisodeResult r = run_episode(t, sc, lib);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.ticks_used, 8);  // restarts at 7, completes at 8
}

TEST(Simulator, ScheduleVariants) {
    const auto b = bundle("uav_patrol");
    EXPECT_EQ(event_schedule_variant(b.scenario, 5, 0).events.size(), b.scenario.events.size());
    for (std::size_t v = 1; v < 20; ++v) {
        const Scenario s = event_schedule_variant(b.scenario, 5, v);
        ASSERT_EQ(s.events.size(), 2u);
        EXPECT_EQ(s.events[0].tick, s.events[1].tick);  // same-tick groups move together
        EXPECT_GE(s.events[0].tick, 1);
        EXPECT_LE(std::abs(s.events[0].tick - 3), 2);
        EXPECT_EQ(event_schedule_variant(b.scenario, 5, v).events[0].tick, s.events[0].tick);
        EXPECT_TRUE(run_episode(uav_patrol_reference_tree(), s, b.library).success);
    }
}

TEST(Simulator, NodeUnitTestsFromFixture) {
    const auto b = bundle("uav_patrol");
    const auto cases = load_node_test_cases(slurp(fixture("cases/uav_nodes.json")));
    ASSERT_EQ(cases.size(), 5u);
    const NodeTestReport rep = unit_test_nodes(b.library, b.scenario, cases);
    EXPECT_TRUE(rep.all_passed());

    auto bad = cases;
    bad[0].expected_status = NodeStatus::Failure;
    EXPECT_EQ(unit_test_nodes(b.library, b.scenario, bad).failures(), 1u);
}
