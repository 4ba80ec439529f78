#pragma once

// Memoryless (reactive) tick semantics. Every tick starts at the root; control
// nodes keep no state between ticks. Leaves are delegated to an executor so the
// same evaluator drives the world simulator and fixed-status test stubs.

#include <concepts>
#include <utility>

#include "btgen/error.hpp"
#include "btgen/tree.hpp"

namespace btgen {

template <class Exec, class World>
concept LeafExecutor = requires(const Exec& e, const BTNode& n, World& w, const World& cw) {
    { e.condition(n, cw) } -> std::same_as<NodeStatus>;
    { e.action(n, w) } -> std::same_as<NodeStatus>;
};

/// Executors that also know how to tick Open placeholders (synthesis stubs).
template <class Exec, class World>
concept OpenAwareExecutor = LeafExecutor<Exec, World> && requires(const Exec& e, const BTNode& n, World& w) {
    { e.open(n, w) } -> std::same_as<NodeStatus>;
};

struct NoObserver {
    template <class World>
    void operator()(const BTNode&, NodeStatus, const World&) const noexcept {}
};

namespace detail {

template <class World, class Exec, class Observer>
NodeStatus tick_node(const BTNode& node, World& world, const Exec& exec, Observer& observe) {
    switch (node.kind) {
        case NodeKind::Sequence:
            for (const auto& child : node.children) {
                const NodeStatus s = tick_node(child, world, exec, observe);
                if (s != NodeStatus::Success) return s;
            }
            return NodeStatus::Success;
        case NodeKind::Fallback:
            for (const auto& child : node.children) {
                const NodeStatus s = tick_node(child, world, exec, observe);
                if (s != NodeStatus::Failure) return s;
            }
            return NodeStatus::Failure;
        case NodeKind::Parallel: {
            // All children are ticked left to right, no short-circuit.
            int succeeded = 0;
            int failed = 0;
            for (const auto& child : node.children) {
                const NodeStatus s = tick_node(child, world, exec, observe);
                if (s == NodeStatus::Success) ++succeeded;
                else if (s == NodeStatus::Failure) ++failed;
            }
            const int n = static_cast<int>(node.children.size());
            if (succeeded >= node.threshold) return NodeStatus::Success;
            if (failed > n - node.threshold) return NodeStatus::Failure;
            return NodeStatus::Running;
        }
        case NodeKind::Condition: {
            const NodeStatus s = exec.condition(node, std::as_const(world));
            observe(node, s, std::as_const(world));
            return s;
        }
        case NodeKind::Action: {
            const NodeStatus s = exec.action(node, world);
            observe(node, s, std::as_const(world));
            return s;
        }
        case NodeKind::Open:
            if constexpr (OpenAwareExecutor<Exec, World>) {
                const NodeStatus s = exec.open(node, world);
                observe(node, s, std::as_const(world));
                return s;
            } else {
                throw Error(ErrorCode::UnboundLeaf, "Open node '" + node.instance_name + "' cannot be ticked");
            }
    }
    return NodeStatus::Failure;
}

}  // namespace detail

/// One synchronous tick from the root. The world is taken by value and the
/// mutated copy is returned alongside the root status.
template <class World, class Exec, class Observer = NoObserver>
    requires LeafExecutor<Exec, World>
std::pair<NodeStatus, World> tick(const BehaviorTree& tree, World world, const Exec& exec, Observer observe = {}) {
    const NodeStatus s = detail::tick_node(tree.root(), world, exec, observe);
    return {s, std::move(world)};
}

}  // namespace btgen
