#include <gtest/gtest.h>

#include "support/fixtures.hpp"

using namespace btgen;
using btgen::testing::bundle;
using btgen::testing::bundled_scenarios;

namespace {

std::size_t non_open_count(const BTNode& n) {
    std::size_t c = n.kind == NodeKind::Open ? 0 : 1;
    for (const auto& k : n.children) c += non_open_count(k);
    return c;
}

void collect_definitions(const ChildSpec& c, std::vector<std::string>& out) {
    if (c.kind == ChildSpec::Kind::Leaf) out.push_back(c.definition);
    for (const auto& k : c.children) collect_definitions(k, out);
}

ExpansionCandidate bind(std::string target, std::string def) {
    ExpansionCandidate c;
    c.target = std::move(target);
    c.op = OperatorKind::BindLeaf;
    c.definition = std::move(def);
    return c;
}

ExpansionCandidate seq_at(std::string target) {
    ExpansionCandidate c;
    c.target = std::move(target);
    c.op = OperatorKind::SeqDecompose;
    return c;
}

std::vector<std::string> definitions_of(const ExpansionCandidate& c) {
    std::vector<std::string> out;
    if (!c.definition.empty()) out.push_back(c.definition);
    for (const auto& k : c.children) collect_definitions(k, out);
    return out;
}

}  // namespace

TEST(SynthState, InitialStateIsOneOpenRoot) {
    const SynthState s = f_init({parse_goal("position = 4"), "patrol", {}});
    EXPECT_EQ(s.frontier, std::vector<std::string>{"root"});
    EXPECT_FALSE(s.terminal());
    EXPECT_EQ(s.tree.node_count(), 1u);
}

TEST(SynthState, GuardPatternBuildsFallbackOverGuardedSequence) {
    const auto b = bundle("uav_patrol");
    const SynthState s0 = f_init(task_of(b.scenario));
    ExpansionCandidate g;
    g.target = "root";
    g.op = OperatorKind::GuardPattern;
    g.definition = "check-target_detected";
    g.handler = {parse_goal("threat_handled = true"), "handle", {}};
    g.fallback = Subgoal{parse_goal("position = 4"), "patrol", {}};
    const SynthState s1 = apply_candidate(s0, g, b.library);
    const BTNode& root = s1.tree.root();
    EXPECT_EQ(root.kind, NodeKind::Fallback);
    EXPECT_EQ(root.instance_name, "fallback_node");
    EXPECT_EQ(root.children[0].instance_name, "sequence_node");
    EXPECT_EQ(root.children[0].children[0].binding, "check-target_detected");
    EXPECT_EQ(s1.frontier, (std::vector<std::string>{"open_1", "open_2"}));

    const ExpansionCandidate warn = bind("open_1", "warn-target");
    const ExpansionCandidate move = bind("open_2", "move-to_next-pos");
    const SynthState s3 = apply_candidate(apply_candidate(s1, warn, b.library), move, b.library);
    EXPECT_TRUE(s3.terminal());
    EXPECT_EQ(s3.tree, uav_patrol_reference_tree());
}

TEST(SynthState, ApplyRejectsBadTargetsAndArity) {
    const auto b = bundle("uav_patrol");
    const SynthState s0 = f_init(task_of(b.scenario));
    EXPECT_THROW(apply_candidate(s0, bind("nowhere", "warn-target"), b.library), Error);
    EXPECT_THROW(apply_candidate(s0, bind("root", "teleport"), b.library), Error);
    ExpansionCandidate seq = seq_at("root");
    EXPECT_THROW(apply_candidate(s0, seq, b.library), Error);  // no children
}

TEST(SynthState, RepeatedLeavesGetFreshNames) {
    const auto b = bundle("uav_patrol");
    ExpansionCandidate seq = seq_at("root");
    seq.children = {ChildSpec::leaf("move-to_next-pos"), ChildSpec::leaf("move-to_next-pos")};
    const SynthState s = apply_candidate(f_init(task_of(b.scenario)), seq, b.library);
    EXPECT_EQ(s.tree.root().children[0].instance_name, "move-to_next-pos");
    EXPECT_EQ(s.tree.root().children[1].instance_name, "move-to_next-pos_2");
    EXPECT_EQ(s.tree.root().children[1].binding, "move-to_next-pos");
}

TEST(Oracle, UavRootIsGuardedPatrol) {
    const auto b = bundle("uav_patrol");
    const auto cands = oracle_expand(f_init(task_of(b.scenario)), "root", b.scenario, b.library, 8);
    ASSERT_FALSE(cands.empty());
    EXPECT_EQ(cands[0].op, OperatorKind::GuardPattern);
    EXPECT_EQ(cands[0].definition, "check-target_detected");
    EXPECT_EQ(format_goal(cands[0].handler.goal), "threat_handled = true");
    ASSERT_TRUE(cands[0].fallback);
    EXPECT_EQ(format_goal(cands[0].fallback->goal), "position = 4");
}

TEST(Oracle, SatisfiedSubgoalBindsACondition) {
    const auto b = bundle("uav_patrol");
    const SynthState s = f_init({parse_goal("target_detected = false"), "", {}});
    Scenario quiet = btgen::testing::without_events(b.scenario);
    const auto cands = oracle_expand(s, "root", quiet, b.library, 8);
    ASSERT_EQ(cands.size(), 1u);
    EXPECT_EQ(cands[0].op, OperatorKind::BindLeaf);
    EXPECT_EQ(cands[0].definition, "check-target_detected");
}

TEST(Oracle, UnreachableLiteralHasNoCandidates) {
    const auto b = bundle("uav_patrol");
    const SynthState s = f_init({parse_goal("target_detected = true"), "", {}});
    try {
        oracle_expand(s, "root", b.scenario, b.library, 8);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoCandidates);
    }
}

TEST(Oracle, RespectsCandidateLimitAndTarget) {
    const auto b = bundle("uav_patrol");
    const SynthState s = f_init(task_of(b.scenario));
    EXPECT_EQ(oracle_expand(s, "root", b.scenario, b.library, 1).size(), 1u);
    EXPECT_THROW(oracle_expand(s, "missing", b.scenario, b.library, 8), Error);
}

TEST(Oracle, MultipleUnmetLiteralsDecomposeInSequence) {
    const auto b = bundle("pick_place");
    const auto cands = oracle_expand(f_init(task_of(b.scenario)), "root", b.scenario, b.library, 8);
    bool saw_seq = false;
    for (const auto& c : cands) {
        if (c.op != OperatorKind::SeqDecompose) continue;
        saw_seq = true;
        EXPECT_GE(c.children.size(), 2u);
        // Later siblings assume the earlier literals already hold.
        for (std::size_t i = 1; i < c.children.size(); ++i)
            EXPECT_GE(c.children[i].subgoal.context.size(), c.children[i - 1].subgoal.context.size());
    }
    if (b.scenario.goal.size() > 1) {
        EXPECT_TRUE(saw_seq);
    }
}

// Property: every oracle candidate is well formed, library-closed and grows the
// tree monotonically on every bundled scenario.
TEST(Oracle, CandidatesAreLibraryClosedAndMonotone) {
    for (const auto& name : bundled_scenarios()) {
        const auto b = bundle(name);
        std::vector<SynthState> layer = {f_init(task_of(b.scenario))};
        for (int depth = 0; depth < 3 && !layer.empty(); ++depth) {
            std::vector<SynthState> next;
            for (const auto& s : layer) {
                if (s.terminal()) continue;
                std::vector<ExpansionCandidate> cands;
                try {
                    cands = oracle_expand(s, s.frontier.front(), b.scenario, b.library, 8);
                } catch (const Error& e) {
                    ASSERT_EQ(e.code(), ErrorCode::NoCandidates);
                    continue;
                }
                for (const auto& c : cands) {
                    for (const auto& d : definitions_of(c)) ASSERT_NE(b.library.find(d), nullptr) << d;
                    const SynthState t = apply_candidate(s, c, b.library);
                    ASSERT_GE(non_open_count(t.tree.root()), non_open_count(s.tree.root()));
                    ASSERT_GE(t.tree.node_count(), s.tree.node_count());
                    ASSERT_EQ(t.frontier, open_nodes(t.tree.root()));
                    if (next.size() < 40) next.push_back(t);
                }
            }
            layer = std::move(next);
        }
    }
}
