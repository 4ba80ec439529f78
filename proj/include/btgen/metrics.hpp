#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "btgen/synth/search.hpp"
#include "btgen/xml.hpp"

namespace btgen {

/// Unbiased pass@k: 1 - C(n-c, k) / C(n, k), as a running product.
inline double pass_at_k(long n, long c, long k) {
    if (k < 1 || n < 1 || c < 0 || k > n || c > n)
        throw Error(ErrorCode::InvalidArgs, "pass_at_k needs 1 <= k <= n and 0 <= c <= n, got n=" + std::to_string(n) +
                                                " c=" + std::to_string(c) + " k=" + std::to_string(k));
    if (n - c < k) return 1.0;
    double miss = 1.0;
    for (long i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    return 1.0 - miss;
}

/// exp(-mean(ln p)).
inline double perplexity(const std::vector<double>& probs) {
    if (probs.empty()) throw Error(ErrorCode::InvalidArgs, "perplexity of an empty sequence");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgs, "token probability outside (0, 1]");
        sum += std::log(p);
    }
    return std::exp(-sum / static_cast<double>(probs.size()));
}

inline double accuracy(const std::vector<bool>& outcomes) {
    if (outcomes.empty()) throw Error(ErrorCode::InvalidArgs, "accuracy of no outcomes");
    const auto ok = std::count(outcomes.begin(), outcomes.end(), true);
    return static_cast<double>(ok) / static_cast<double>(outcomes.size());
}

/// Population standard deviation. Deviations are taken from the first value so
/// that a constant list gives exactly zero.
inline double sensitivity(const std::vector<double>& accuracies) {
    if (accuracies.empty()) throw Error(ErrorCode::InvalidArgs, "sensitivity of no accuracies");
    const double n = static_cast<double>(accuracies.size());
    const double pivot = accuracies.front();
    double mean = 0.0;
    for (double a : accuracies) mean += a - pivot;
    mean /= n;
    double ss = 0.0;
    for (double a : accuracies) ss += (a - pivot - mean) * (a - pivot - mean);
    return std::sqrt(ss / n);
}

/// Produces one tree for a scenario; throwing counts as an incorrect sample.
using TreeGenerator = std::function<BehaviorTree(const Scenario&, const NodeLibrary&, std::uint64_t seed)>;

struct EvalProblem {
    std::string name;
    Scenario scenario;
    NodeLibrary library;
};

struct ProblemResult {
    std::string name;
    std::size_t n = 0;
    std::size_t c = 0;
    std::vector<std::pair<long, double>> pass_at;  // (k, pass@k)
    std::vector<std::string> errors;                // distinct failure messages
};

struct MetricReport {
    std::vector<long> ks;
    std::vector<ProblemResult> problems;
    std::vector<std::pair<long, double>> mean_pass_at;
    double accuracy = 0.0;
    double sensitivity = 0.0;
    std::optional<double> perplexity;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json probs = nlohmann::ordered_json::array();
        for (const auto& p : problems) {
            nlohmann::ordered_json pk = nlohmann::ordered_json::object();
            for (const auto& [k, v] : p.pass_at) pk[std::to_string(k)] = v;
            probs.push_back({{"name", p.name}, {"n", p.n}, {"c", p.c}, {"pass_at_k", pk}, {"errors", p.errors}});
        }
        nlohmann::ordered_json mean = nlohmann::ordered_json::object();
        for (const auto& [k, v] : mean_pass_at) mean[std::to_string(k)] = v;
        nlohmann::ordered_json j = {{"problems", probs},
                                    {"mean_pass_at_k", mean},
                                    {"accuracy", accuracy},
                                    {"sensitivity", sensitivity}};
        if (perplexity) j["perplexity"] = *perplexity;
        return j;
    }
};

/// A sample is correct when its XML re-parses, it passes structural validation
/// against the library, and full simulation gives reward 1.
inline bool sample_correct(const BehaviorTree& tree, const Scenario& scenario, const NodeLibrary& library,
                           const SearchConfig& config) {
    const BehaviorTree reparsed = parse_bt_xml(serialize_bt_xml(tree));
    if (!validate_structure(reparsed, library).ok()) return false;
    SynthState state{reparsed, open_nodes(reparsed.root()), 1};
    SearchConfig cfg = config;
    cfg.levels.full_simulation = true;
    const Feedback fb = validate_state(state, scenario, library, cfg);
    return fb.accepted() && fb.level == 3 && fb.reward == 1.0;
}

/// Generates `n` samples per problem with seeds config.seed + i and reports
/// pass@k per problem, mean pass@k, accuracy (all samples) and sensitivity
/// (population std of per-problem accuracies). Problems are ordered by name.
inline MetricReport evaluate_generator(const TreeGenerator& generate, std::vector<EvalProblem> problems, long n,
                                       std::vector<long> ks, const SearchConfig& config) {
    if (problems.empty()) throw Error(ErrorCode::InvalidArgs, "no problems to evaluate");
    if (ks.empty()) throw Error(ErrorCode::InvalidArgs, "no k values requested");
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    if (ks.front() < 1 || n < ks.back()) throw Error(ErrorCode::InvalidArgs, "need 1 <= k <= n for every k");
    std::stable_sort(problems.begin(), problems.end(), [](const auto& a, const auto& b) { return a.name < b.name; });

    MetricReport report;
    report.ks = ks;
    std::vector<bool> outcomes;
    std::vector<double> per_problem;
    for (const auto& prob : problems) {
        ProblemResult r;
        r.name = prob.name;
        r.n = static_cast<std::size_t>(n);
        for (long i = 0; i < n; ++i) {
            const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(i);
            bool ok = false;
            try {
                SearchConfig cfg = config;
                cfg.seed = seed;
                ok = sample_correct(generate(prob.scenario, prob.library, seed), prob.scenario, prob.library, cfg);
            } catch (const std::exception& e) {
                const std::string msg = e.what();
                if (std::find(r.errors.begin(), r.errors.end(), msg) == r.errors.end()) r.errors.push_back(msg);
            }
            r.c += ok;
            outcomes.push_back(ok);
        }
        for (long k : ks) r.pass_at.emplace_back(k, pass_at_k(n, static_cast<long>(r.c), k));
        per_problem.push_back(static_cast<double>(r.c) / static_cast<double>(n));
        report.problems.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
        double sum = 0.0;
        for (const auto& p : report.problems) sum += p.pass_at[i].second;
        report.mean_pass_at.emplace_back(ks[i], sum / static_cast<double>(report.problems.size()));
    }
    report.accuracy = accuracy(outcomes);
    report.sensitivity = btgen::sensitivity(per_problem);
    return report;
}

/// Generator backed by synthesize() with the given policy (empty = oracle).
inline TreeGenerator synthesis_generator(SearchConfig config, std::function<ExpansionPolicy(const Scenario&, const NodeLibrary&, std::uint64_t)> make_policy = {}) {
    return [config, make_policy](const Scenario& sc, const NodeLibrary& lib, std::uint64_t seed) {
        SearchConfig cfg = config;
        cfg.seed = seed;
        ExpansionPolicy policy = make_policy ? make_policy(sc, lib, seed) : ExpansionPolicy{};
        return synthesize(sc, lib, cfg, std::move(policy)).tree;
    };
}

/// Plain-text table of a report.
inline std::string format_metric_table(const MetricReport& r) {
    std::string out = "problem                 n    c";
    for (long k : r.ks) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "  pass@%-4ld", k);
        out += buf;
    }
    out += "\n";
    auto row = [&](const std::string& name, std::string n, std::string c, const std::vector<std::pair<long, double>>& v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-20s %4s %4s", name.c_str(), n.c_str(), c.c_str());
        out += buf;
        for (const auto& [k, p] : v) {
            std::snprintf(buf, sizeof buf, "  %-10.6f", p);
            out += buf;
        }
        out += "\n";
    };
    for (const auto& p : r.problems) row(p.name, std::to_string(p.n), std::to_string(p.c), p.pass_at);
    row("mean", "", "", r.mean_pass_at);
    char buf[96];
    std::snprintf(buf, sizeof buf, "accuracy %.6f  sensitivity %.6f\n", r.accuracy, r.sensitivity);
    out += buf;
    return out;
}

}  // namespace btgen
