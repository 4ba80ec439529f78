#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btgen/expr.hpp"

namespace btgen {

enum class NodeStatus { Success, Failure, Running };

inline constexpr std::string_view to_string(NodeStatus s) noexcept {
    switch (s) {
        case NodeStatus::Success: return "Success";
        case NodeStatus::Failure: return "Failure";
        case NodeStatus::Running: return "Running";
    }
    return "?";
}

inline std::optional<NodeStatus> status_from_string(std::string_view s) {
    if (s == "Success") return NodeStatus::Success;
    if (s == "Failure") return NodeStatus::Failure;
    if (s == "Running") return NodeStatus::Running;
    return std::nullopt;
}

enum class NodeKind { Fallback, Sequence, Parallel, Condition, Action, Open };

inline constexpr std::string_view to_string(NodeKind k) noexcept {
    switch (k) {
        case NodeKind::Fallback: return "Fallback";
        case NodeKind::Sequence: return "Sequence";
        case NodeKind::Parallel: return "Parallel";
        case NodeKind::Condition: return "Condition";
        case NodeKind::Action: return "Action";
        case NodeKind::Open: return "Open";
    }
    return "?";
}

inline std::optional<NodeKind> node_kind_from_string(std::string_view s) {
    for (auto k : {NodeKind::Fallback, NodeKind::Sequence, NodeKind::Parallel, NodeKind::Condition,
                   NodeKind::Action, NodeKind::Open}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

inline constexpr bool is_control(NodeKind k) noexcept {
    return k == NodeKind::Fallback || k == NodeKind::Sequence || k == NodeKind::Parallel;
}

inline constexpr bool is_leaf(NodeKind k) noexcept { return k == NodeKind::Condition || k == NodeKind::Action; }

/// Unexpanded synthesis target carried by an Open node.
struct Subgoal {
    Goal goal;
    std::string description;
    /// Literals known to hold wherever this subgoal is pursued (e.g. inside a
    /// guard whose condition has just been observed).
    Goal context;

    friend bool operator==(const Subgoal&, const Subgoal&) = default;
};

struct BTNode {
    std::string instance_name;
    NodeKind kind = NodeKind::Action;
    int threshold = 0;    // Parallel
    std::string binding;  // Condition / Action: node-definition name
    Subgoal subgoal;      // Open
    std::vector<BTNode> children;

    friend bool operator==(const BTNode&, const BTNode&) = default;
};

inline BTNode make_control(NodeKind kind, std::string name, std::vector<BTNode> children, int threshold = 0) {
    BTNode n;
    n.instance_name = std::move(name);
    n.kind = kind;
    n.threshold = threshold;
    n.children = std::move(children);
    return n;
}

inline BTNode make_fallback(std::string name, std::vector<BTNode> children) {
    return make_control(NodeKind::Fallback, std::move(name), std::move(children));
}

inline BTNode make_sequence(std::string name, std::vector<BTNode> children) {
    return make_control(NodeKind::Sequence, std::move(name), std::move(children));
}

inline BTNode make_parallel(std::string name, int threshold, std::vector<BTNode> children) {
    return make_control(NodeKind::Parallel, std::move(name), std::move(children), threshold);
}

/// Leaf whose binding defaults to its instance name.
inline BTNode make_leaf(NodeKind kind, std::string name, std::string binding = {}) {
    BTNode n;
    n.kind = kind;
    n.binding = binding.empty() ? name : std::move(binding);
    n.instance_name = std::move(name);
    return n;
}

inline BTNode make_condition(std::string name, std::string binding = {}) {
    return make_leaf(NodeKind::Condition, std::move(name), std::move(binding));
}

inline BTNode make_action(std::string name, std::string binding = {}) {
    return make_leaf(NodeKind::Action, std::move(name), std::move(binding));
}

inline BTNode make_open(std::string name, Subgoal subgoal) {
    BTNode n;
    n.instance_name = std::move(name);
    n.kind = NodeKind::Open;
    n.subgoal = std::move(subgoal);
    return n;
}

/// Pre-order traversal; `fn(node, depth)` with depth 1 at the root.
template <class Fn>
void visit_preorder(const BTNode& node, Fn&& fn, int depth = 1) {
    fn(node, depth);
    for (const auto& c : node.children) visit_preorder(c, fn, depth + 1);
}

inline std::size_t count_nodes(const BTNode& node) {
    std::size_t n = 1;
    for (const auto& c : node.children) n += count_nodes(c);
    return n;
}

/// Number of nodes on the longest root-to-leaf path (a lone leaf has depth 1).
inline int tree_depth(const BTNode& node) {
    int d = 0;
    for (const auto& c : node.children) d = std::max(d, tree_depth(c));
    return d + 1;
}

/// A rooted behavior tree with cached size metrics. Immutable once built.
class BehaviorTree {
public:
    BehaviorTree() : BehaviorTree(make_action("noop")) {}
    explicit BehaviorTree(BTNode root)
        : root_(std::move(root)), node_count_(count_nodes(root_)), depth_(tree_depth(root_)) {}

    const BTNode& root() const noexcept { return root_; }
    std::size_t node_count() const noexcept { return node_count_; }
    int depth() const noexcept { return depth_; }

    friend bool operator==(const BehaviorTree& a, const BehaviorTree& b) { return a.root_ == b.root_; }

private:
    BTNode root_;
    std::size_t node_count_;
    int depth_;
};

/// Instance names of Open nodes in left-to-right (pre-order) order.
inline std::vector<std::string> open_nodes(const BTNode& root) {
    std::vector<std::string> out;
    visit_preorder(root, [&](const BTNode& n, int) {
        if (n.kind == NodeKind::Open) out.push_back(n.instance_name);
    });
    return out;
}

/// Distinct leaf bindings in order of first appearance.
inline std::vector<std::string> leaf_bindings(const BTNode& root) {
    std::vector<std::string> out;
    visit_preorder(root, [&](const BTNode& n, int) {
        if (is_leaf(n.kind) && std::find(out.begin(), out.end(), n.binding) == out.end()) out.push_back(n.binding);
    });
    return out;
}

inline const BTNode* find_node(const BTNode& root, std::string_view name) {
    if (root.instance_name == name) return &root;
    for (const auto& c : root.children)
        if (const BTNode* hit = find_node(c, name)) return hit;
    return nullptr;
}

/// Hand-written UAV campsite patrol: warn a detected target, otherwise move on
/// to the next waypoint of the route.
inline BehaviorTree uav_patrol_reference_tree() {
    return BehaviorTree(make_fallback(
        "fallback_node", {make_sequence("sequence_node", {make_condition("check-target_detected"),
                                                          make_action("warn-target")}),
                          make_action("move-to_next-pos")}));
}

}  // namespace btgen
