#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "btgen/library.hpp"
#include "btgen/tree.hpp"

namespace btgen {

/// Subtree template an expansion writes in place of an Open node. Holes are
/// new Open nodes; leaves reference node definitions by name.
struct ChildSpec {
    enum class Kind { Open, Leaf, Control };
    Kind kind = Kind::Open;
    Subgoal subgoal;             // Open
    std::string definition;      // Leaf
    NodeKind control = NodeKind::Sequence;  // Control
    int threshold = 0;           // Control, Parallel only
    std::vector<ChildSpec> children;

    static ChildSpec open(Subgoal g) {
        ChildSpec c;
        c.kind = Kind::Open;
        c.subgoal = std::move(g);
        return c;
    }
    static ChildSpec leaf(std::string def) {
        ChildSpec c;
        c.kind = Kind::Leaf;
        c.definition = std::move(def);
        return c;
    }
    static ChildSpec node(NodeKind kind, std::vector<ChildSpec> children, int threshold = 0) {
        ChildSpec c;
        c.kind = Kind::Control;
        c.control = kind;
        c.threshold = threshold;
        c.children = std::move(children);
        return c;
    }

    friend bool operator==(const ChildSpec&, const ChildSpec&) = default;
};

/// One proposed rewrite of a frontier Open node.
///
/// BindLeaf: `definition` names the leaf. Seq/Fb/ParDecompose: `children`
/// (plus `threshold` for Parallel). GuardPattern: `definition` is the guard
/// condition, `handler` the subgoal run when it holds, and `fallback` the
/// optional default branch; the result is Sequence[Condition, handler], wrapped
/// as Fallback[guard, default] when a default is present.
struct ExpansionCandidate {
    std::string target;
    OperatorKind op = OperatorKind::BindLeaf;
    std::string definition;
    std::vector<ChildSpec> children;
    int threshold = 0;
    Subgoal handler;
    std::optional<Subgoal> fallback;
    double score = 0.0;

    /// Number of children the operator produces.
    int arity() const {
        switch (op) {
            case OperatorKind::BindLeaf: return 1;
            case OperatorKind::GuardPattern: return 2;
            default: return static_cast<int>(children.size());
        }
    }

    friend bool operator==(const ExpansionCandidate&, const ExpansionCandidate&) = default;
};

namespace detail {

inline void describe_spec(std::string& out, const ChildSpec& c) {
    switch (c.kind) {
        case ChildSpec::Kind::Open: out += "Open(" + format_goal(c.subgoal.goal) + ")"; break;
        case ChildSpec::Kind::Leaf: out += c.definition; break;
        case ChildSpec::Kind::Control:
            out += std::string(to_string(c.control));
            if (c.control == NodeKind::Parallel) out += "/" + std::to_string(c.threshold);
            out += "[";
            for (std::size_t i = 0; i < c.children.size(); ++i) {
                if (i) out += ", ";
                describe_spec(out, c.children[i]);
            }
            out += "]";
            break;
    }
}

}  // namespace detail

/// Stable human-readable key; used for logs and UCT tie-breaking.
inline std::string describe(const ExpansionCandidate& c) {
    std::string out = std::string(to_string(c.op)) + "@" + c.target + ":";
    switch (c.op) {
        case OperatorKind::BindLeaf: out += c.definition; break;
        case OperatorKind::GuardPattern:
            out += c.definition + "->Open(" + format_goal(c.handler.goal) + ")";
            if (c.fallback) out += "|Open(" + format_goal(c.fallback->goal) + ")";
            break;
        default:
            out += "[";
            for (std::size_t i = 0; i < c.children.size(); ++i) {
                if (i) out += ", ";
                detail::describe_spec(out, c.children[i]);
            }
            out += "]";
    }
    return out;
}

/// A partial behavior tree under synthesis.
struct SynthState {
    BehaviorTree tree;
    std::vector<std::string> frontier;  // Open nodes, leftmost first
    int next_open_id = 1;

    bool terminal() const noexcept { return frontier.empty(); }
};

/// The single-Open-root starting state for a task.
inline SynthState f_init(Subgoal task) {
    SynthState s{BehaviorTree(make_open("root", std::move(task))), {"root"}, 1};
    return s;
}

namespace detail {

class Builder {
public:
    Builder(const BTNode& root, const NodeLibrary& library, int next_open_id)
        : library_(library), next_open_id_(next_open_id) {
        visit_preorder(root, [&](const BTNode& n, int) { names_.insert(n.instance_name); });
    }

    BTNode build(const ChildSpec& spec) {
        switch (spec.kind) {
            case ChildSpec::Kind::Open: return open(spec.subgoal);
            case ChildSpec::Kind::Leaf: return leaf(spec.definition);
            case ChildSpec::Kind::Control: {
                std::vector<BTNode> kids;
                for (const auto& c : spec.children) kids.push_back(build(c));
                return control(spec.control, std::move(kids), spec.threshold);
            }
        }
        return open({});
    }

    BTNode open(const Subgoal& g) {
        std::string name;
        do {
            name = "open_" + std::to_string(next_open_id_++);
        } while (names_.contains(name));
        names_.insert(name);
        return make_open(std::move(name), g);
    }

    BTNode leaf(const std::string& def_name) {
        const NodeDefinition* def = library_.find(def_name);
        if (!def) throw Error(ErrorCode::UnknownNode, "expansion references unknown node '" + def_name + "'");
        return make_leaf(def->type == NodeType::Condition ? NodeKind::Condition : NodeKind::Action,
                         fresh(def->name), def->name);
    }

    BTNode control(NodeKind kind, std::vector<BTNode> kids, int threshold = 0) {
        std::string base = kind == NodeKind::Fallback ? "fallback_node"
                           : kind == NodeKind::Sequence ? "sequence_node"
                                                        : "parallel_node";
        return make_control(kind, fresh(base), std::move(kids), threshold);
    }

    int next_open_id() const { return next_open_id_; }

private:
    std::string fresh(const std::string& base) {
        std::string name = base;
        for (int i = 2; names_.contains(name); ++i) name = base + "_" + std::to_string(i);
        names_.insert(name);
        return name;
    }

    const NodeLibrary& library_;
    int next_open_id_;
    std::set<std::string> names_;
};

inline bool replace_open(BTNode& node, const std::string& target, BTNode& replacement) {
    if (node.kind == NodeKind::Open && node.instance_name == target) {
        node = std::move(replacement);
        return true;
    }
    for (auto& c : node.children)
        if (replace_open(c, target, replacement)) return true;
    return false;
}

}  // namespace detail

/// Applies a candidate to its target Open node and returns the successor state.
inline SynthState apply_candidate(const SynthState& state, const ExpansionCandidate& cand, const NodeLibrary& library) {
    const BTNode* target = find_node(state.tree.root(), cand.target);
    if (!target || target->kind != NodeKind::Open)
        throw Error(ErrorCode::UnknownNode, "expansion target '" + cand.target + "' is not an Open node");
    const OperatorDef& op = operator_def(cand.op);
    if (cand.arity() < op.min_children || cand.arity() > op.max_children)
        throw Error(ErrorCode::InvalidArgs, "candidate arity outside operator bounds: " + describe(cand));

    detail::Builder b(state.tree.root(), library, state.next_open_id);
    BTNode replacement;
    switch (cand.op) {
        case OperatorKind::BindLeaf: replacement = b.leaf(cand.definition); break;
        case OperatorKind::SeqDecompose:
        case OperatorKind::FbDecompose:
        case OperatorKind::ParDecompose: {
            const NodeKind kind = cand.op == OperatorKind::SeqDecompose  ? NodeKind::Sequence
                                  : cand.op == OperatorKind::FbDecompose ? NodeKind::Fallback
                                                                         : NodeKind::Parallel;
            std::vector<BTNode> kids;
            for (const auto& c : cand.children) kids.push_back(b.build(c));
            replacement = b.control(kind, std::move(kids), cand.threshold);
            break;
        }
        case OperatorKind::GuardPattern: {
            // Names are allocated outer-first so a guard reads fallback_node / sequence_node.
            BTNode fb_placeholder;
            if (cand.fallback) fb_placeholder = b.control(NodeKind::Fallback, {});
            BTNode cond = b.leaf(cand.definition);
            if (cond.kind != NodeKind::Condition)
                throw Error(ErrorCode::InvalidArgs, "guard '" + cand.definition + "' is not a condition");
            BTNode seq = b.control(NodeKind::Sequence, {});
            seq.children.push_back(std::move(cond));
            seq.children.push_back(b.open(cand.handler));
            if (cand.fallback) {
                fb_placeholder.children.push_back(std::move(seq));
                fb_placeholder.children.push_back(b.open(*cand.fallback));
                replacement = std::move(fb_placeholder);
            } else {
                replacement = std::move(seq);
            }
            break;
        }
    }

    BTNode root = state.tree.root();
    detail::replace_open(root, cand.target, replacement);
    SynthState next;
    next.tree = BehaviorTree(std::move(root));
    next.frontier = open_nodes(next.tree.root());
    next.next_open_id = b.next_open_id();
    return next;
}

}  // namespace btgen
