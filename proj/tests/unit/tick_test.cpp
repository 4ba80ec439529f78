#include <gtest/gtest.h>

#include "btgen/tick.hpp"
#include "support/oracles.hpp"

using namespace btgen;
using btgen::testing::reference_status;
using btgen::testing::StubExecutor;
using btgen::testing::StubTreeEnumerator;

namespace {

BTNode S(int i) { return make_action("S" + std::to_string(i)); }
BTNode F(int i) { return make_action("F" + std::to_string(i)); }
BTNode R(int i) { return make_action("R" + std::to_string(i)); }

NodeStatus run(BTNode root, int* actions = nullptr) {
    auto [status, ticks] = tick(BehaviorTree(std::move(root)), 0, StubExecutor{});
    if (actions) *actions = ticks;
    return status;
}

}  // namespace

TEST(Tick, SequenceStopsAtFirstNonSuccess) {
    int n = 0;
    EXPECT_EQ(run(make_sequence("s", {S(0), R(1), F(2)}), &n), NodeStatus::Running);
    EXPECT_EQ(n, 2);
    EXPECT_EQ(run(make_sequence("s", {S(0), F(1), R(2)}), &n), NodeStatus::Failure);
    EXPECT_EQ(n, 2);
    EXPECT_EQ(run(make_sequence("s", {S(0), S(1)}), &n), NodeStatus::Success);
    EXPECT_EQ(n, 2);
}

TEST(Tick, FallbackStopsAtFirstNonFailure) {
    int n = 0;
    EXPECT_EQ(run(make_fallback("f", {F(0), F(1)}), &n), NodeStatus::Failure);
    EXPECT_EQ(n, 2);
    EXPECT_EQ(run(make_fallback("f", {F(0), S(1), R(2)}), &n), NodeStatus::Success);
    EXPECT_EQ(n, 2);
    EXPECT_EQ(run(make_fallback("f", {R(0), S(1)}), &n), NodeStatus::Running);
    EXPECT_EQ(n, 1);
}

TEST(Tick, ParallelTicksAllChildrenAndCountsThreshold) {
    int n = 0;
    EXPECT_EQ(run(make_parallel("p", 2, {S(0), S(1), F(2)}), &n), NodeStatus::Success);
    EXPECT_EQ(n, 3);
    EXPECT_EQ(run(make_parallel("p", 2, {S(0), F(1), F(2)})), NodeStatus::Failure);
    EXPECT_EQ(run(make_parallel("p", 2, {S(0), R(1), F(2)})), NodeStatus::Running);
    EXPECT_EQ(run(make_parallel("p", 3, {S(0), S(1), R(2)})), NodeStatus::Running);
    EXPECT_EQ(run(make_parallel("p", 1, {F(0), F(1), R(2)})), NodeStatus::Running);
    EXPECT_EQ(run(make_parallel("p", 1, {F(0), F(1), F(2)})), NodeStatus::Failure);
}

TEST(Tick, OpenNodeWithoutStubIsUnbound) {
    const BehaviorTree t(make_sequence("s", {S(0), make_open("o", {})}));
    try {
        tick(t, 0, StubExecutor{});
        FAIL() << "expected UnboundLeaf";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnboundLeaf);
    }
}

namespace {

struct OpenStub : StubExecutor {
    NodeStatus open(const BTNode&, int&) const { return NodeStatus::Failure; }
};

}  // namespace

TEST(Tick, OpenAwareExecutorStubsOpenNodes) {
    const BehaviorTree t(make_fallback("f", {make_open("o", {}), S(0)}));
    std::vector<std::string> seen;
    auto observe = [&](const BTNode& n, NodeStatus, const int&) { seen.push_back(n.instance_name); };
    EXPECT_EQ(tick(t, 0, OpenStub{}, observe).first, NodeStatus::Success);
    EXPECT_EQ(seen, (std::vector<std::string>{"o", "S0"}));
}

TEST(Tick, MatchesReferenceEvaluatorOnSmallTrees) {
    StubTreeEnumerator gen;
    std::size_t checked = 0;
    for (int leaves = 1; leaves <= 3; ++leaves) {
        for (const auto& t : gen.trees(3, leaves)) {
            const BTNode root = StubTreeEnumerator::uniquify(t);
            ASSERT_EQ(run(root), reference_status(root));
            ++checked;
        }
    }
    EXPECT_GT(checked, 1000u);
}

TEST(Tick, IsDeterministic) {
    const BTNode root = make_parallel("p", 2, {make_sequence("s", {S(0), R(1)}), make_fallback("f", {F(2), S(3)}), F(4)});
    EXPECT_EQ(run(root), run(root));
}

TEST(Tree, DepthCountsNodesOnLongestPath) {
    EXPECT_EQ(BehaviorTree(S(0)).depth(), 1);
    const BehaviorTree t = uav_patrol_reference_tree();
    EXPECT_EQ(t.depth(), 3);
    EXPECT_EQ(t.node_count(), 5u);
    EXPECT_EQ(leaf_bindings(t.root()),
              (std::vector<std::string>{"check-target_detected", "warn-target", "move-to_next-pos"}));
}
