#pragma once

#include <set>
#include <string>
#include <vector>

#include "btgen/library.hpp"
#include "btgen/tree.hpp"

namespace btgen {

enum class FindingKind {
    EmptyControlNode,
    LeafWithChildren,
    BadThreshold,
    DuplicateInstanceName,
    UnresolvedBinding,
    BindingKindMismatch,
    OpenNodeRemaining,
    ExceedsMaxDepth,
    ExceedsMaxNodes,
};

inline constexpr std::string_view to_string(FindingKind k) noexcept {
    switch (k) {
        case FindingKind::EmptyControlNode: return "empty control node";
        case FindingKind::LeafWithChildren: return "leaf with children";
        case FindingKind::BadThreshold: return "bad parallel threshold";
        case FindingKind::DuplicateInstanceName: return "duplicate instance name";
        case FindingKind::UnresolvedBinding: return "unresolved binding";
        case FindingKind::BindingKindMismatch: return "binding kind mismatch";
        case FindingKind::OpenNodeRemaining: return "open node remaining";
        case FindingKind::ExceedsMaxDepth: return "exceeds max depth";
        case FindingKind::ExceedsMaxNodes: return "exceeds max nodes";
    }
    return "?";
}

struct Finding {
    FindingKind kind;
    std::string node;  // instance name, empty for whole-tree findings
    std::string message;

    friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
    std::vector<Finding> findings;
    std::size_t open_nodes = 0;

    bool ok() const noexcept { return findings.empty(); }

    bool has(FindingKind kind) const {
        for (const auto& f : findings)
            if (f.kind == kind) return true;
        return false;
    }

    /// Findings other than remaining Open nodes (what a partial tree must satisfy).
    std::vector<Finding> structural() const {
        std::vector<Finding> out;
        for (const auto& f : findings)
            if (f.kind != FindingKind::OpenNodeRemaining) out.push_back(f);
        return out;
    }
};

/// Structural check of every BTNode invariant. Bindings are checked only when a
/// library is supplied.
inline ValidationReport validate_structure(const BehaviorTree& tree, const NodeLibrary* library) {
    ValidationReport report;
    std::set<std::string> seen;
    visit_preorder(tree.root(), [&](const BTNode& n, int) {
        auto add = [&](FindingKind k, std::string msg) { report.findings.push_back({k, n.instance_name, std::move(msg)}); };
        if (!seen.insert(n.instance_name).second)
            add(FindingKind::DuplicateInstanceName, "instance name '" + n.instance_name + "' is used more than once");
        if (is_control(n.kind)) {
            if (n.children.empty())
                add(FindingKind::EmptyControlNode,
                    "empty control node: " + std::string(to_string(n.kind)) + " '" + n.instance_name + "' has no children");
            if (n.kind == NodeKind::Parallel &&
                (n.threshold < 1 || n.threshold > static_cast<int>(n.children.size())))
                add(FindingKind::BadThreshold, "parallel '" + n.instance_name + "' threshold " +
                                                   std::to_string(n.threshold) + " outside [1, " +
                                                   std::to_string(n.children.size()) + "]");
            return;
        }
        if (!n.children.empty())
            add(FindingKind::LeafWithChildren, std::string(to_string(n.kind)) + " '" + n.instance_name + "' has children");
        if (n.kind == NodeKind::Open) {
            ++report.open_nodes;
            add(FindingKind::OpenNodeRemaining, "open node '" + n.instance_name + "' is not expanded");
            return;
        }
        if (!library) return;
        const NodeDefinition* def = library->find(n.binding);
        if (!def) {
            add(FindingKind::UnresolvedBinding, "unresolved binding '" + n.binding + "' on '" + n.instance_name + "'");
            return;
        }
        const NodeType expected = n.kind == NodeKind::Condition ? NodeType::Condition : NodeType::Action;
        if (def->type != expected)
            add(FindingKind::BindingKindMismatch, std::string(to_string(n.kind)) + " '" + n.instance_name +
                                                      "' binds " + std::string(to_string(def->type)) + " '" +
                                                      def->name + "'");
    });
    return report;
}

inline ValidationReport validate_structure(const BehaviorTree& tree, const NodeLibrary& library) {
    return validate_structure(tree, &library);
}

}  // namespace btgen
