#include <gtest/gtest.h>

#include "btgen/validate.hpp"
#include "btgen/xml.hpp"
#include "support/fixtures.hpp"

using namespace btgen;
using btgen::testing::fixture;
using btgen::testing::slurp;

TEST(Validate, ReferenceTreeIsClean) {
    const NodeLibrary lib = load_library(slurp(fixture("libraries/uav.json")));
    EXPECT_TRUE(validate_structure(uav_patrol_reference_tree(), lib).ok());
}

TEST(Validate, EmptyControlNode) {
    const BehaviorTree t = parse_bt_xml(slurp(fixture("trees/broken.xml")));
    const ValidationReport r = validate_structure(t, nullptr);
    ASSERT_EQ(r.findings.size(), 1u);
    EXPECT_EQ(r.findings[0].kind, FindingKind::EmptyControlNode);
    EXPECT_EQ(r.findings[0].node, "sequence_node");
}

TEST(Validate, UnresolvedAndMismatchedBindings) {
    const NodeLibrary lib = load_library(slurp(fixture("libraries/uav.json")));
    const BehaviorTree t(make_sequence("s", {make_action("teleport"), make_action("c", "check-target_detected")}));
    const ValidationReport r = validate_structure(t, lib);
    EXPECT_TRUE(r.has(FindingKind::UnresolvedBinding));
    EXPECT_TRUE(r.has(FindingKind::BindingKindMismatch));
    EXPECT_TRUE(validate_structure(t, nullptr).ok());
}

TEST(Validate, ThresholdDuplicatesAndOpenNodes) {
    BTNode par = make_parallel("p", 3, {make_action("a"), make_action("b")});
    const BehaviorTree t(make_sequence("s", {par, make_action("a"), make_open("o", {})}));
    const ValidationReport r = validate_structure(t, nullptr);
    EXPECT_TRUE(r.has(FindingKind::BadThreshold));
    EXPECT_TRUE(r.has(FindingKind::DuplicateInstanceName));
    EXPECT_TRUE(r.has(FindingKind::OpenNodeRemaining));
    EXPECT_EQ(r.open_nodes, 1u);
    for (const auto& f : r.structural()) EXPECT_NE(f.kind, FindingKind::OpenNodeRemaining);
}
