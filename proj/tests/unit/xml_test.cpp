#include <gtest/gtest.h>

#include <random>

#include "btgen/xml.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace btgen;
using btgen::testing::fixture;
using btgen::testing::slurp;

namespace {

ErrorCode code_of(std::string_view xml) {
    try {
        parse_bt_xml(xml);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Io;  // sentinel: parsed fine
}

}  // namespace

TEST(Xml, PatrolFixtureParsesIntoReferenceTree) {
    const BehaviorTree t = parse_bt_xml(slurp(fixture("trees/patrol.xml")));
    EXPECT_EQ(t, uav_patrol_reference_tree());
    EXPECT_EQ(t.node_count(), 5u);
}

TEST(Xml, CanonicalSerialization) {
    const std::string expected =
        "<Fallback instance_name=\"fallback_node\">\n"
        "  <Sequence instance_name=\"sequence_node\">\n"
        "    <Condition instance_name=\"check-target_detected\" />\n"
        "    <Action instance_name=\"warn-target\" />\n"
        "  </Sequence>\n"
        "  <Action instance_name=\"move-to_next-pos\" />\n"
        "</Fallback>\n";
    EXPECT_EQ(serialize_bt_xml(uav_patrol_reference_tree()), expected);
    EXPECT_EQ(serialize_bt_xml(parse_bt_xml(expected)), expected);
}

TEST(Xml, ParallelThresholdBindingAndOpenAttributes) {
    const std::string xml =
        "<Parallel instance_name='p' threshold='1'>"
        "<Action instance_name='a' binding='move'/>"
        "<Open instance_name='o' subgoal='x = 1 &amp;&amp; y &lt; 2' description='do &quot;it&quot;' context='z = 0'/>"
        "</Parallel>";
    const BehaviorTree t = parse_bt_xml(xml);
    const BTNode& root = t.root();
    EXPECT_EQ(root.kind, NodeKind::Parallel);
    EXPECT_EQ(root.threshold, 1);
    EXPECT_EQ(root.children[0].binding, "move");
    const Subgoal& g = root.children[1].subgoal;
    EXPECT_EQ(format_goal(g.goal), "x = 1 && y < 2");
    EXPECT_EQ(g.description, "do \"it\"");
    EXPECT_EQ(format_goal(g.context), "z = 0");
    EXPECT_EQ(parse_bt_xml(serialize_bt_xml(t)), t);
}

TEST(Xml, Errors) {
    EXPECT_EQ(code_of("<Fallback instance_name='a'><Blackboard instance_name='b'/></Fallback>"), ErrorCode::UnknownElement);
    EXPECT_EQ(code_of("<Action/>"), ErrorCode::MissingAttribute);
    EXPECT_EQ(code_of("<Parallel instance_name='p'><Action instance_name='a'/></Parallel>"), ErrorCode::MissingAttribute);
    EXPECT_EQ(code_of("<Open instance_name='o'/>"), ErrorCode::MissingAttribute);
    EXPECT_EQ(code_of("<Sequence instance_name='a'><Action instance_name='a'/></Sequence>"),
              ErrorCode::DuplicateInstanceName);
    EXPECT_EQ(code_of("<Sequence instance_name='a'>"), ErrorCode::MalformedXml);
    EXPECT_EQ(code_of("<Sequence instance_name='a'></Fallback>"), ErrorCode::MalformedXml);
    EXPECT_EQ(code_of("<Action instance_name='a' color='red'/>"), ErrorCode::MalformedXml);
    EXPECT_EQ(code_of("<Action instance_name='a'/><Action instance_name='b'/>"), ErrorCode::MalformedXml);
    EXPECT_EQ(code_of(""), ErrorCode::MalformedXml);
}

TEST(Xml, ErrorLocationPointsAtOffendingElement) {
    try {
        parse_bt_xml("<Sequence instance_name='s'>\n  <Wait instance_name='w'/>\n</Sequence>");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.location().line, 2);
        EXPECT_EQ(e.location().column, 3);
    }
}

TEST(Xml, AcceptsPrologCommentsAndWhitespaceAroundEquals) {
    const BehaviorTree t = parse_bt_xml(
        "\xEF\xBB\xBF<?xml version='1.0'?>\n<!-- patrol -->\n<Action  instance_name = \"a\"   />\n<!-- end -->\n");
    EXPECT_EQ(t.root().instance_name, "a");
}

TEST(Xml, RandomTreesRoundTrip) {
    btgen::testing::RandomTreeGenerator gen(7);
    for (int i = 0; i < 200; ++i) {
        const BehaviorTree t = gen.next();
        ASSERT_LE(t.depth(), 6);
        ASSERT_LE(t.node_count(), 50u);
        const std::string xml = serialize_bt_xml(t);
        ASSERT_EQ(parse_bt_xml(xml), t) << xml;
        ASSERT_EQ(serialize_bt_xml(parse_bt_xml(xml)), xml);
    }
}

TEST(Xml, ParserIsTotalOnMutatedInput) {
    // Random byte mutations must either parse or raise a typed error, never crash.
    const std::string base = slurp(fixture("trees/patrol.xml"));
    std::mt19937 rng(11);
    for (int i = 0; i < 2000; ++i) {
        std::string s = base;
        const int edits = 1 + static_cast<int>(rng() % 4);
        for (int e = 0; e < edits; ++e) {
            const std::size_t pos = rng() % s.size();
            switch (rng() % 3) {
                case 0: s[pos] = static_cast<char>(rng() % 128); break;
                case 1: s.erase(pos, 1 + rng() % 5); break;
                default: s.insert(pos, 1, "<>/='\"&"[rng() % 7]); break;
            }
            if (s.empty()) s = "<";
        }
        try {
            parse_bt_xml(s);
        } catch (const Error&) {
        }
    }
}

TEST(Xml, DeepNestingIsRejected) {
    std::string s;
    for (int i = 0; i < 300; ++i) s += "<Sequence instance_name='s" + std::to_string(i) + "'>";
    EXPECT_EQ(code_of(s), ErrorCode::MalformedXml);
}
