#include <gtest/gtest.h>

#include "support/fixtures.hpp"

using namespace btgen;
using btgen::testing::bundle;
using btgen::testing::bundled_scenarios;

namespace {

ErrorCode load_code(std::string_view text) {
    try {
        load_scenario(text);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Io;
}

constexpr const char* kMinimal = R"({
  "name": "m", "variables": {"x": {"type": "int", "min": 0, "max": 3}},
  "init": {"x": 0}, "goal": "x = 3", "max_ticks": 5, "actions": {"inc": {"effects": ["x += 1"]}}
})";

}  // namespace

TEST(Scenario, BundledScenariosLoad) {
    for (const auto& name : bundled_scenarios()) {
        const auto b = bundle(name);
        EXPECT_EQ(b.scenario.name, name);
        EXPECT_FALSE(b.scenario.goal.empty());
        EXPECT_FALSE(b.scenario.goal_holds(b.scenario.init)) << name;
        EXPECT_TRUE(check_library_bindings(b.library, b.scenario).empty()) << name;
    }
}

TEST(Scenario, UavFixtureShape) {
    const Scenario sc = bundle("uav_patrol").scenario;
    ASSERT_EQ(sc.variables.size(), 4u);
    EXPECT_EQ(sc.domains[sc.variable_index("position")].hi, 4);
    ASSERT_EQ(sc.events.size(), 2u);
    EXPECT_EQ(sc.events[0].tick, 3);
    EXPECT_EQ(sc.max_ticks, 20);
    EXPECT_EQ(format_goal(sc.goal), "position = 4 && threat_handled = true");
}

TEST(Scenario, MinimalScenarioAndDefaults) {
    const Scenario sc = load_scenario(kMinimal);
    EXPECT_TRUE(sc.events.empty());
    EXPECT_EQ(sc.actions.at("inc").duration, 1);
    std::vector<Value> a = sc.init;
    for (int i = 0; i < 5; ++i) sc.apply(sc.actions.at("inc").compiled_effects[0], a);
    EXPECT_EQ(a[0], 3);  // increments saturate at the domain bound
}

TEST(Scenario, EnumValuesResolveByLabel) {
    const Scenario sc = bundle("door_open").scenario;
    for (std::size_t i = 0; i < sc.variables.size(); ++i) {
        const Domain& d = sc.domains[i];
        for (Value v = d.lo; v <= d.hi; ++v) EXPECT_EQ(d.parse(d.format(v)), v);
    }
}

TEST(Scenario, SchemaErrors) {
    EXPECT_EQ(load_code("[]"), ErrorCode::SchemaViolation);
    EXPECT_EQ(load_code("{"), ErrorCode::SchemaViolation);
    EXPECT_EQ(load_code(R"({"name":"m","variables":{},"init":{},"goal":"true","max_ticks":1})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(load_code(R"({"name":"m","variables":{"x":{"type":"float"}},"init":{"x":0},"goal":"true","max_ticks":1})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(load_code(R"({"name":"m","variables":{"x":{"type":"bool"}},"init":{},"goal":"true","max_ticks":1})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(load_code(R"({"name":"m","variables":{"x":{"type":"bool"}},"init":{"x":false},"goal":"true","max_ticks":0})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(load_code(R"({"name":"m","variables":{"x":{"type":"bool"}},"init":{"x":false},"goal":"true","max_ticks":1,"extra":1})"),
              ErrorCode::SchemaViolation);
}

TEST(Scenario, OutOfDomainValuesAreRejected) {
    EXPECT_THROW(load_scenario(R"({"name":"m","variables":{"x":{"type":"int","min":0,"max":2}},
        "init":{"x":5},"goal":"x = 1","max_ticks":1})"),
                 Error);
    EXPECT_THROW(load_scenario(R"({"name":"m","variables":{"x":{"type":"int","min":0,"max":2}},
        "init":{"x":0},"goal":"y = 1","max_ticks":1})"),
                 Error);
    EXPECT_THROW(load_scenario(R"({"name":"m","variables":{"x":{"type":"int","min":0,"max":2}},
        "init":{"x":0},"goal":"x = 1","max_ticks":1,"actions":{"a":{"effects":["x = 9"]}}})"),
                 Error);
}
