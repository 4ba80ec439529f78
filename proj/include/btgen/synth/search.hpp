#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "btgen/simulator.hpp"
#include "btgen/synth/oracle.hpp"
#include "btgen/synth/policy.hpp"
#include "btgen/synth/state.hpp"
#include "btgen/validate.hpp"

namespace btgen {

struct ValidationLevels {
    bool stub_simulation = true;  // level 2
    bool full_simulation = true;  // level 3
};

struct SearchConfig {
    std::size_t budget = 10000;  // max expansions (applied candidates)
    double c_uct = std::numbers::sqrt2;
    int max_depth = 8;
    std::size_t max_nodes = 64;
    int rollout_episodes = 5;
    ValidationLevels levels;
    std::uint64_t seed = 0;
    PolicyKind policy = PolicyKind::Oracle;
    std::size_t candidates_per_expansion = 8;
    std::size_t retrieval_k = 5;

    void validate() const {
        auto bad = [](const std::string& m) { return Error(ErrorCode::InvalidArgs, m); };
        if (budget < 1) throw bad("budget must be >= 1");
        if (!(c_uct > 0.0) || !std::isfinite(c_uct)) throw bad("c_uct must be positive");
        if (max_depth < 1) throw bad("max_depth must be >= 1");
        if (max_nodes < 1) throw bad("max_nodes must be >= 1");
        if (rollout_episodes < 1) throw bad("rollout_episodes must be >= 1");
        if (candidates_per_expansion < 1) throw bad("candidates_per_expansion must be >= 1");
        if (retrieval_k < 1) throw bad("retrieval_k must be >= 1");
    }

    nlohmann::ordered_json to_json() const {
        return {{"budget", budget},
                {"c_uct", c_uct},
                {"max_depth", max_depth},
                {"max_nodes", max_nodes},
                {"rollout_episodes", rollout_episodes},
                {"levels", {{"stub_simulation", levels.stub_simulation}, {"full_simulation", levels.full_simulation}}},
                {"seed", seed},
                {"policy", std::string(to_string(policy))},
                {"candidates_per_expansion", candidates_per_expansion},
                {"retrieval_k", retrieval_k}};
    }
};

/// Overlays keys present in `j` onto `base`. Unknown keys are rejected.
inline SearchConfig search_config_from_json(const nlohmann::json& j, SearchConfig base = {}) {
    auto bad = [](const std::string& m) { return Error(ErrorCode::InvalidArgs, m); };
    if (!j.is_object()) throw bad("config must be a JSON object");
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "budget") base.budget = v.get<std::size_t>();
            else if (k == "c_uct") base.c_uct = v.get<double>();
            else if (k == "max_depth") base.max_depth = v.get<int>();
            else if (k == "max_nodes") base.max_nodes = v.get<std::size_t>();
            else if (k == "rollout_episodes") base.rollout_episodes = v.get<int>();
            else if (k == "seed") base.seed = v.get<std::uint64_t>();
            else if (k == "candidates_per_expansion") base.candidates_per_expansion = v.get<std::size_t>();
            else if (k == "retrieval_k") base.retrieval_k = v.get<std::size_t>();
            else if (k == "policy") {
                auto p = policy_from_string(v.get<std::string>());
                if (!p) throw bad("unknown policy '" + v.get<std::string>() + "'");
                base.policy = *p;
            } else if (k == "levels") {
                if (v.contains("stub_simulation")) base.levels.stub_simulation = v["stub_simulation"].get<bool>();
                if (v.contains("full_simulation")) base.levels.full_simulation = v["full_simulation"].get<bool>();
            } else {
                throw bad("unknown config key '" + k + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw bad(std::string("bad config value: ") + e.what());
    }
    base.validate();
    return base;
}

enum class Verdict { Accept, Reject };

inline constexpr std::string_view to_string(Verdict v) noexcept { return v == Verdict::Accept ? "accept" : "reject"; }

struct Feedback {
    Verdict verdict = Verdict::Accept;
    int level = 1;
    double reward = 0.0;
    std::optional<EpisodeResult> failing_trace;
    std::vector<std::string> unmet_goals;
    std::vector<Finding> findings;

    bool accepted() const noexcept { return verdict == Verdict::Accept; }
};

namespace detail {

inline std::vector<std::string> unmet_literals(const Scenario& sc, const std::vector<Value>& a) {
    std::vector<std::string> out;
    for (const auto& lit : sc.goal)
        if (!sc.holds(lit, a)) out.push_back(lit.to_string());
    return out;
}

}  // namespace detail

/// Level 1 structure and size bounds; level 2 one episode with Open nodes stubbed
/// as Failure (non-terminal states); level 3 `rollout_episodes` episodes over
/// event-schedule variants (terminal states).
inline Feedback validate_state(const SynthState& state, const Scenario& scenario, const NodeLibrary& library,
                               const SearchConfig& config) {
    Feedback fb;
    fb.level = 1;
    fb.findings = validate_structure(state.tree, library).structural();
    if (state.tree.depth() > config.max_depth)
        fb.findings.push_back({FindingKind::ExceedsMaxDepth, "",
                               "depth " + std::to_string(state.tree.depth()) + " exceeds " +
                                   std::to_string(config.max_depth)});
    if (state.tree.node_count() > config.max_nodes)
        fb.findings.push_back({FindingKind::ExceedsMaxNodes, "",
                               std::to_string(state.tree.node_count()) + " nodes exceed " +
                                   std::to_string(config.max_nodes)});
    if (!fb.findings.empty()) {
        fb.verdict = Verdict::Reject;
        return fb;
    }

    auto run = [&](const Scenario& sc, bool stub) -> EpisodeResult {
        return run_episode(state.tree, sc, library, config.seed, EpisodeOptions{stub, false});
    };

    try {
        if (!state.terminal() || !config.levels.full_simulation) {
            if (!config.levels.stub_simulation && !state.terminal()) return fb;
            fb.level = 2;
            EpisodeResult ep = run(scenario, true);
            fb.reward = ep.final_goal_fraction();
            fb.unmet_goals = detail::unmet_literals(scenario, ep.final_assignment);
            if (state.terminal() && !ep.success) {
                fb.verdict = Verdict::Reject;
                fb.failing_trace = std::move(ep);
            }
            return fb;
        }
        fb.level = 3;
        double total = 0.0;
        int successes = 0;
        for (int v = 0; v < config.rollout_episodes; ++v) {
            const Scenario variant = event_schedule_variant(scenario, config.seed, static_cast<std::size_t>(v));
            EpisodeResult ep = run(variant, false);
            if (ep.success) {
                ++successes;
                total += 1.0;
            } else {
                total += ep.final_goal_fraction();
                if (!fb.failing_trace) {
                    fb.unmet_goals = detail::unmet_literals(scenario, ep.final_assignment);
                    fb.failing_trace = std::move(ep);
                }
            }
        }
        fb.reward = successes == config.rollout_episodes ? 1.0 : total / config.rollout_episodes;
        if (successes != config.rollout_episodes) fb.verdict = Verdict::Reject;
    } catch (const Error& e) {
        fb.verdict = Verdict::Reject;
        fb.reward = 0.0;
        fb.findings.push_back({FindingKind::UnresolvedBinding, "", e.what()});
    }
    return fb;
}

/// A node of the search tree over synthesis states.
struct SearchNode {
    SynthState state;
    SearchNode* parent = nullptr;
    std::string via;  // describe() of the generating candidate
    double W = 0.0;
    std::size_t N = 0;
    bool pruned = false;
    bool expanded = false;
    bool exhausted = false;
    std::optional<Feedback> feedback;
    std::vector<std::unique_ptr<SearchNode>> children;
    std::vector<std::string> feedback_terms;  // unmet goals reported by children

    explicit SearchNode(SynthState s, SearchNode* p = nullptr, std::string v = {})
        : state(std::move(s)), parent(p), via(std::move(v)) {}

    SearchNode& add_child(SynthState s, std::string v) {
        children.push_back(std::make_unique<SearchNode>(std::move(s), this, std::move(v)));
        return *children.back();
    }
};

inline double uct_score(double W, std::size_t N, std::size_t parent_N, double c) {
    if (N == 0) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(N);
    return W / n + c * std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(parent_N, 1))) / n);
}

/// Descends by UCT to a state to expand. Returns the state; its target is the
/// leftmost frontier entry. Throws Exhausted when nothing is left to expand.
inline SearchNode& select(SearchNode& root, double c_uct) {
    SearchNode* n = &root;
    while (true) {
        if (!n->expanded && !n->pruned && !n->exhausted && !n->state.terminal()) return *n;
        SearchNode* best = nullptr;
        double best_score = 0.0;
        for (auto& child : n->children) {
            SearchNode& ch = *child;
            if (ch.pruned || ch.exhausted || ch.state.terminal()) continue;
            const double s = uct_score(ch.W, ch.N, n->N, c_uct);
            if (!best || s > best_score || (s == best_score && ch.via < best->via)) {
                best = &ch;
                best_score = s;
            }
        }
        if (best) {
            n = best;
            continue;
        }
        n->exhausted = true;
        if (!n->parent) throw Error(ErrorCode::Exhausted, "every search state is terminal, pruned or exhausted");
        n = n->parent;
    }
}

/// Backpropagates a validation result from `node` to the root.
inline void refine(SearchNode& node, const Feedback& fb) {
    node.feedback = fb;
    if (!fb.accepted()) node.pruned = true;
    const double reward = fb.accepted() ? fb.reward : 0.0;
    for (SearchNode* p = &node; p; p = p->parent) {
        p->N += 1;
        p->W += reward;
    }
    if (node.parent) {
        auto& terms = node.parent->feedback_terms;
        for (const auto& g : fb.unmet_goals)
            if (std::find(terms.begin(), terms.end(), g) == terms.end()) terms.push_back(g);
    }
}

struct SynthesisReport {
    PolicyKind policy = PolicyKind::Oracle;
    SearchConfig config;
    bool solved = false;
    std::size_t expansions = 0;
    std::size_t states = 1;
    double best_reward = 0.0;
    std::size_t rejections[3] = {0, 0, 0};
    std::size_t node_count = 0;
    int depth = 0;

    nlohmann::ordered_json to_json() const {
        return {{"policy", std::string(to_string(policy))},
                {"seed", config.seed},
                {"config", config.to_json()},
                {"solved", solved},
                {"expansions", expansions},
                {"states", states},
                {"best_reward", best_reward},
                {"rejections", {{"level1", rejections[0]}, {"level2", rejections[1]}, {"level3", rejections[2]}}},
                {"tree", {{"node_count", node_count}, {"depth", depth}}}};
    }
};

struct SynthesisResult {
    BehaviorTree tree;
    SynthesisReport report;
};

/// Raised for BudgetExhausted and Unsolvable; carries the best tree found.
class SynthesisError : public Error {
public:
    SynthesisError(ErrorCode code, const std::string& msg, BehaviorTree best, SynthesisReport report)
        : Error(code, msg), best_(std::move(best)), report_(std::move(report)) {}

    const BehaviorTree& best_tree() const noexcept { return best_; }
    const SynthesisReport& report() const noexcept { return report_; }

private:
    BehaviorTree best_;
    SynthesisReport report_;
};

/// Optional instrumentation callbacks.
struct SearchHooks {
    std::function<void(const SearchNode& parent, const SearchNode& child, const ExpansionCandidate&)> on_expand;
    std::function<void(const SearchNode& node, const Feedback&)> on_feedback;
    std::function<void(const SearchNode& root)> on_refine;
};

inline Subgoal task_of(const Scenario& scenario) { return Subgoal{scenario.goal, scenario.description, {}}; }

namespace detail {

class Search {
public:
    Search(Subgoal task, const Scenario& sc, const NodeLibrary& lib, const SearchConfig& cfg, ExpansionPolicy policy,
           const SearchHooks& hooks)
        : task_(std::move(task)), sc_(sc), lib_(lib), cfg_(cfg), policy_(std::move(policy)), hooks_(hooks),
          root_(f_init(task_)) {
        report_.policy = cfg.policy;
        report_.config = cfg;
    }

    SynthesisResult run() {
        if (sc_.holds(task_.goal, sc_.init)) return short_circuit();
        if (cfg_.policy == PolicyKind::Oracle) {
            if (!greedy(root_)) fail(ErrorCode::Unsolvable, "goal regression found no valid tree");
        } else {
            mcts();
        }
        return finish(*solution_);
    }

private:
    SynthesisResult short_circuit() {
        std::vector<ExpansionCandidate> cands;
        try {
            cands = oracle_expand(root_.state, "root", sc_, lib_, 1);
        } catch (const Error& e) {
            fail(ErrorCode::Unsolvable, std::string("goal holds initially but no condition can check it: ") + e.what());
        }
        SynthState s = apply_candidate(root_.state, cands.front(), lib_);
        report_.best_reward = 1.0;
        SearchNode leaf(std::move(s));
        return finish(leaf);
    }

    SynthesisResult finish(const SearchNode& n) {
        report_.solved = true;
        report_.node_count = n.state.tree.node_count();
        report_.depth = n.state.tree.depth();
        return {n.state.tree, report_};
    }

    [[noreturn]] void fail(ErrorCode code, const std::string& msg) {
        const SearchNode* best = best_ ? best_ : &root_;
        report_.node_count = best->state.tree.node_count();
        report_.depth = best->state.tree.depth();
        throw SynthesisError(code, msg, best->state.tree, report_);
    }

    std::vector<ExpansionCandidate> candidates(SearchNode& node) {
        const std::string& target = node.state.frontier.front();
        ExpansionRequest req{node.state,  target,  sc_, lib_, cfg_.candidates_per_expansion, cfg_.retrieval_k,
                             node.feedback_terms, format_goal(task_.goal) + (task_.description.empty() ? "" : ": " + task_.description)};
        try {
            return policy_(req);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoCandidates && e.code() != ErrorCode::EmptyAfterFiltering) throw;
            if (&node == &root_) fail(ErrorCode::Unsolvable, std::string("root cannot be expanded: ") + e.what());
            return {};
        }
    }

    /// Applies and validates one candidate. Returns the new child.
    SearchNode* expand_one(SearchNode& node, const ExpansionCandidate& cand) {
        if (report_.expansions >= cfg_.budget) fail(ErrorCode::BudgetExhausted, "expansion budget exhausted");
        ++report_.expansions;
        SynthState next;
        try {
            next = apply_candidate(node.state, cand, lib_);
        } catch (const Error&) {
            return nullptr;  // malformed candidate; policies filter these, count it as spent budget
        }
        SearchNode& child = node.add_child(std::move(next), describe(cand));
        ++report_.states;
        if (hooks_.on_expand) hooks_.on_expand(node, child, cand);
        const Feedback fb = validate_state(child.state, sc_, lib_, cfg_);
        if (hooks_.on_feedback) hooks_.on_feedback(child, fb);
        refine(child, fb);
        if (hooks_.on_refine) hooks_.on_refine(root_);
        if (!fb.accepted()) {
            ++report_.rejections[std::clamp(fb.level, 1, 3) - 1];
        } else if (!best_ || fb.reward > report_.best_reward) {
            best_ = &child;
            report_.best_reward = fb.reward;
        }
        if (fb.accepted() && child.state.terminal()) {
            best_ = &child;
            report_.best_reward = fb.reward;
            solution_ = &child;
        }
        return &child;
    }

    bool greedy(SearchNode& node) {
        node.expanded = true;
        for (const auto& cand : candidates(node)) {
            SearchNode* child = expand_one(node, cand);
            if (!child || child->pruned) continue;
            if (solution_) return true;
            if (greedy(*child)) return true;
        }
        node.exhausted = true;
        return false;
    }

    void mcts() {
        while (!solution_) {
            SearchNode* node = nullptr;
            try {
                node = &select(root_, cfg_.c_uct);
            } catch (const Error& e) {
                fail(ErrorCode::Unsolvable, std::string("search exhausted: ") + e.what());
            }
            node->expanded = true;
            const auto cands = candidates(*node);
            if (cands.empty()) node->exhausted = true;
            for (const auto& cand : cands) {
                expand_one(*node, cand);
                if (solution_) return;
            }
        }
    }

    Subgoal task_;
    const Scenario& sc_;
    const NodeLibrary& lib_;
    SearchConfig cfg_;
    ExpansionPolicy policy_;
    const SearchHooks& hooks_;
    SearchNode root_;
    SearchNode* best_ = nullptr;
    SearchNode* solution_ = nullptr;
    SynthesisReport report_;
};

}  // namespace detail

/// Runs the select / expand / validate / refine loop. An empty `policy` means
/// goal-regression expansion (required unless config.policy is remote).
inline SynthesisResult synthesize(const Subgoal& task, const Scenario& scenario, const NodeLibrary& library,
                                  const SearchConfig& config, ExpansionPolicy policy = {},
                                  const SearchHooks& hooks = {}) {
    config.validate();
    if (library.empty()) throw Error(ErrorCode::InvalidArgs, "node library is empty");
    if (!policy) {
        if (config.policy == PolicyKind::Remote)
            throw Error(ErrorCode::InvalidArgs, "remote policy selected but no remote expansion configured");
        policy = oracle_policy();
    }
    return detail::Search(task, scenario, library, config, std::move(policy), hooks).run();
}

inline SynthesisResult synthesize(const Scenario& scenario, const NodeLibrary& library, const SearchConfig& config,
                                  ExpansionPolicy policy = {}, const SearchHooks& hooks = {}) {
    return synthesize(task_of(scenario), scenario, library, config, std::move(policy), hooks);
}

}  // namespace btgen
