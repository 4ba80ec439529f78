#pragma once

#include <functional>
#include <string>
#include <vector>

#include "btgen/library.hpp"
#include "btgen/scenario.hpp"
#include "btgen/synth/state.hpp"

namespace btgen {

/// Everything an expansion policy sees when asked to grow one frontier node.
struct ExpansionRequest {
    const SynthState& state;
    const std::string& target;
    const Scenario& scenario;
    const NodeLibrary& library;
    std::size_t max_candidates = 8;
    std::size_t retrieval_k = 5;
    /// Unmet goal literals reported by validation of sibling states.
    std::vector<std::string> feedback;
    std::string task;
};

/// Returns candidates best-first. Throws Error(NoCandidates) when nothing applies.
using ExpansionPolicy = std::function<std::vector<ExpansionCandidate>(const ExpansionRequest&)>;

enum class PolicyKind { Oracle, MctsOracle, Remote };

inline constexpr std::string_view to_string(PolicyKind p) noexcept {
    switch (p) {
        case PolicyKind::Oracle: return "oracle";
        case PolicyKind::MctsOracle: return "mcts-oracle";
        case PolicyKind::Remote: return "remote";
    }
    return "?";
}

inline std::optional<PolicyKind> policy_from_string(std::string_view s) {
    if (s == "oracle") return PolicyKind::Oracle;
    if (s == "mcts-oracle") return PolicyKind::MctsOracle;
    if (s == "remote") return PolicyKind::Remote;
    return std::nullopt;
}

/// The Open node a request targets.
inline const BTNode& request_target(const ExpansionRequest& req) {
    const BTNode* n = find_node(req.state.tree.root(), req.target);
    if (!n || n->kind != NodeKind::Open)
        throw Error(ErrorCode::UnknownNode, "'" + req.target + "' is not an Open node of the state");
    return *n;
}

/// Retrieval query for a request: the subgoal description (or goal text) plus feedback.
inline std::string retrieval_query(const ExpansionRequest& req) {
    const Subgoal& g = request_target(req).subgoal;
    std::string q = g.description.empty() ? format_goal(g.goal) : g.description;
    for (const auto& f : req.feedback) q += " " + f;
    return q;
}

}  // namespace btgen
