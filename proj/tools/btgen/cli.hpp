#pragma once

// Command-line front end: synth, simulate, validate, eval, dataset.
// Exit codes: 0 success, 1 findings or failures, 2 usage or I/O error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "btgen/btgen.hpp"
#include "btgen/synth/http_transport.hpp"

namespace btgen::cli {

namespace fs = std::filesystem;

enum Exit { kOk = 0, kFindings = 1, kUsage = 2 };

/// An error tied to an input or output file.
struct FileError {
    std::string path;
    std::string message;
};

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError{path.string(), "cannot open file"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError{path.string(), "cannot write file"};
    out << content;
    if (!out) throw FileError{path.string(), "write failed"};
}

/// Runs `fn` on a file's text, attributing any library error to the file.
template <class Fn>
auto parse_file(const fs::path& path, Fn&& fn) {
    const std::string text = read_file(path);
    try {
        return fn(text);
    } catch (const Error& e) {
        throw FileError{path.string(), e.what()};
    }
}

inline Scenario load_scenario_file(const fs::path& p) {
    return parse_file(p, [](const std::string& t) { return load_scenario(t); });
}

inline NodeLibrary load_library_file(const fs::path& p) {
    return parse_file(p, [](const std::string& t) { return load_library(t); });
}

inline BehaviorTree load_tree_file(const fs::path& p) {
    return parse_file(p, [](const std::string& t) { return parse_bt_xml(t); });
}

/// The explicit library, or the one the scenario file points at.
inline NodeLibrary resolve_library(const std::string& flag, const fs::path& scenario_path, const Scenario& sc) {
    if (!flag.empty()) return load_library_file(flag);
    if (sc.library.empty())
        throw FileError{scenario_path.string(), "no --library given and the scenario names no library"};
    return load_library_file(scenario_path.parent_path() / sc.library);
}

/// Scenario files under `dir` (recursively), in path order. A scenario file is
/// a JSON object with a "variables" key.
inline std::vector<fs::path> find_scenarios(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw FileError{dir.string(), "not a directory"};
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<fs::path> out;
    for (const auto& f : files) {
        const auto doc = nlohmann::json::parse(read_file(f), nullptr, false);
        if (doc.is_object() && doc.contains("variables")) out.push_back(f);
    }
    if (out.empty()) throw FileError{dir.string(), "contains no scenario files"};
    return out;
}

struct SearchFlags {
    std::string policy = "oracle";
    std::uint64_t seed = 0;
    std::string config_path;
    std::size_t budget = 0;
    double c_uct = 0;
    int max_depth = 0;
    std::size_t max_nodes = 0;
    int episodes = 0;
    std::size_t candidates = 0;
    std::size_t retrieval_k = 0;
    bool no_stub = false;
    bool no_full = false;
    std::string mock;
    std::string endpoint;
    std::string role = "planner";
    std::string profiles;

    CLI::Option* policy_opt = nullptr;
    CLI::Option* seed_opt = nullptr;

    void add_to(CLI::App& app) {
        policy_opt = app.add_option("--policy", policy, "Expansion policy")
                         ->check(CLI::IsMember({"oracle", "mcts-oracle", "remote"}));
        seed_opt = app.add_option("--seed", seed, "Random seed");
        app.add_option("--config", config_path, "Search config JSON (flags take precedence)");
        app.add_option("--budget", budget, "Max expansions");
        app.add_option("--c-uct", c_uct, "UCT exploration constant");
        app.add_option("--max-depth", max_depth, "Max tree depth");
        app.add_option("--max-nodes", max_nodes, "Max tree nodes");
        app.add_option("--episodes", episodes, "Level-3 rollout episodes");
        app.add_option("--candidates", candidates, "Candidates per expansion");
        app.add_option("--retrieval-k", retrieval_k, "Retrieved definitions per request");
        app.add_flag("--no-stub-sim", no_stub, "Disable level-2 stub simulation");
        app.add_flag("--no-full-sim", no_full, "Disable level-3 simulation");
        app.add_option("--mock", mock, "In-process remote mock")
            ->check(CLI::IsMember({"echo-first", "oracle-echo", "runaway"}));
        app.add_option("--endpoint", endpoint, "Remote endpoint URL (default from $BTGEN_REMOTE_ENDPOINT)");
        app.add_option("--role", role, "Role profile")->check(CLI::IsMember({"planner", "validator"}));
        app.add_option("--profiles", profiles, "Directory of role profile templates");
    }

    SearchConfig config() const {
        SearchConfig cfg;
        if (!config_path.empty()) {
            cfg = parse_file(config_path, [](const std::string& t) {
                const auto j = nlohmann::json::parse(t, nullptr, false);
                if (j.is_discarded()) throw Error(ErrorCode::InvalidArgs, "config is not valid JSON");
                return search_config_from_json(j);
            });
        }
        if (policy_opt->count() || config_path.empty()) cfg.policy = *policy_from_string(policy);
        if (seed_opt->count() || config_path.empty()) cfg.seed = seed;
        if (budget) cfg.budget = budget;
        if (c_uct > 0) cfg.c_uct = c_uct;
        if (max_depth) cfg.max_depth = max_depth;
        if (max_nodes) cfg.max_nodes = max_nodes;
        if (episodes) cfg.rollout_episodes = episodes;
        if (candidates) cfg.candidates_per_expansion = candidates;
        if (retrieval_k) cfg.retrieval_k = retrieval_k;
        if (no_stub) cfg.levels.stub_simulation = false;
        if (no_full) cfg.levels.full_simulation = false;
        cfg.validate();
        return cfg;
    }

    /// Remote transport, or nullopt for the oracle policies.
    Transport transport(const Scenario& sc, const NodeLibrary& lib) const {
        if (mock == "echo-first") return mock::echo_first();
        if (mock == "oracle-echo") return mock::oracle_echo(sc, lib);
        if (mock == "runaway") return mock::runaway();
        std::string url = endpoint;
        if (url.empty()) url = remote_endpoint_from_env().value_or("");
        if (url.empty())
            throw Error(ErrorCode::InvalidArgs,
                        std::string("remote policy needs --mock, --endpoint or $") + kRemoteEndpointEnv);
        return http_transport(url);
    }

    RoleProfile profile() const { return profiles.empty() ? builtin_profile(role) : load_profile(profiles, role); }
};

struct RemoteRun {
    ExpansionPolicy policy;
    std::shared_ptr<std::vector<DroppedCandidate>> drops;
};

inline RemoteRun make_policy(const SearchFlags& f, const SearchConfig& cfg, const Scenario& sc, const NodeLibrary& lib) {
    if (cfg.policy != PolicyKind::Remote) return {};
    RemoteExpander ex(f.transport(sc, lib), f.profile());
    return {ex, ex.drop_log()};
}

inline nlohmann::ordered_json drops_json(const std::vector<DroppedCandidate>& drops) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& d : drops) arr.push_back({{"target", d.target}, {"reason", d.reason}, {"candidate", d.candidate}});
    return arr;
}

inline std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

inline int cmd_synth(const std::string& scenario_path, const std::string& library_path, const std::string& out_path,
                     std::string report_path, bool timestamps, const SearchFlags& flags, std::ostream& out,
                     std::ostream& err) {
    const Scenario sc = load_scenario_file(scenario_path);
    const NodeLibrary lib = resolve_library(library_path, scenario_path, sc);
    const SearchConfig cfg = flags.config();
    if (report_path.empty()) report_path = (fs::path(out_path).parent_path() / fs::path(out_path).stem()).string() + ".report.json";
    const RemoteRun remote = make_policy(flags, cfg, sc, lib);

    auto write_report = [&](nlohmann::ordered_json report) {
        report["scenario"] = sc.name;
        if (remote.drops) report["dropped"] = drops_json(*remote.drops);
        if (timestamps) report["generated_at"] = timestamp();
        write_file(report_path, report.dump(2) + "\n");
    };
    try {
        const SynthesisResult r = synthesize(sc, lib, cfg, remote.policy);
        write_file(out_path, serialize_bt_xml(r.tree));
        write_report(r.report.to_json());
        out << "synthesized " << out_path << " (" << r.tree.node_count() << " nodes, " << r.report.expansions
            << " expansions)\n";
        return kOk;
    } catch (const SynthesisError& e) {
        write_report(e.report().to_json());
        err << "btgen: " << scenario_path << ": " << e.what() << "\n";
        return kFindings;
    }
}

inline int cmd_simulate(const std::string& tree_path, const std::string& scenario_path, const std::string& library_path,
                        std::size_t variant, std::uint64_t seed, const std::string& out_path,
                        const std::string& trace_path, bool dump_states, std::ostream& out, std::ostream& err) {
    const BehaviorTree tree = load_tree_file(tree_path);
    const Scenario base = load_scenario_file(scenario_path);
    const NodeLibrary lib = resolve_library(library_path, scenario_path, base);
    const Scenario sc = event_schedule_variant(base, seed, variant);
    EpisodeResult r;
    try {
        r = run_episode(tree, sc, lib, seed, EpisodeOptions{false, dump_states});
    } catch (const Error& e) {
        throw FileError{tree_path, e.what()};
    }
    const std::string doc = episode_json(r, sc).dump(2) + "\n";
    if (out_path.empty()) out << doc;
    else write_file(out_path, doc);
    if (!trace_path.empty()) write_file(trace_path, trace_jsonl(r, sc));
    if (!r.success) err << "btgen: " << scenario_path << ": goal not reached within " << sc.max_ticks << " ticks\n";
    return r.success ? kOk : kFindings;
}

inline int cmd_validate(const std::string& tree_path, const std::string& library_path, const std::string& scenario_path,
                        const std::string& cases_path, std::ostream& out) {
    const BehaviorTree tree = load_tree_file(tree_path);
    std::optional<NodeLibrary> lib;
    if (!library_path.empty()) lib = load_library_file(library_path);
    const ValidationReport report = validate_structure(tree, lib ? &*lib : nullptr);
    std::size_t problems = report.findings.size();
    for (const auto& f : report.findings)
        out << tree_path << ": " << to_string(f.kind) << (f.node.empty() ? "" : " at '" + f.node + "'") << ": "
            << f.message << "\n";
    if (!scenario_path.empty()) {
        const Scenario sc = load_scenario_file(scenario_path);
        const NodeLibrary scen_lib = lib ? *lib : resolve_library("", scenario_path, sc);
        for (const auto& p : check_library_bindings(scen_lib, sc)) {
            out << scenario_path << ": " << p << "\n";
            ++problems;
        }
        if (!cases_path.empty()) {
            const auto cases = parse_file(cases_path, [](const std::string& t) { return load_node_test_cases(t); });
            NodeTestReport tr;
            try {
                tr = unit_test_nodes(scen_lib, sc, cases);
            } catch (const Error& e) {
                throw FileError{cases_path, e.what()};
            }
            for (const auto& r : tr.results) {
                out << cases_path << ": " << r.node << " " << (r.passed ? "pass" : "FAIL") << " (expected "
                    << to_string(r.expected_status) << ", got " << to_string(r.actual_status) << ")\n";
            }
            problems += tr.failures();
        }
    }
    out << tree_path << ": " << tree.node_count() << " nodes, depth " << tree.depth() << ", "
        << (problems ? std::to_string(problems) + " finding(s)" : "ok") << "\n";
    return problems ? kFindings : kOk;
}

inline std::vector<EvalProblem> load_problems(const std::string& dir, const std::string& library_flag) {
    std::vector<EvalProblem> problems;
    for (const auto& path : find_scenarios(dir)) {
        Scenario sc = load_scenario_file(path);
        NodeLibrary lib = resolve_library(library_flag, path, sc);
        std::string name = sc.name.empty() ? path.stem().string() : sc.name;
        problems.push_back({std::move(name), std::move(sc), std::move(lib)});
    }
    return problems;
}

inline int cmd_eval(const std::string& dir, const std::string& library_flag, long n, std::vector<long> ks,
                    const std::string& out_path, const SearchFlags& flags, std::ostream& out) {
    const SearchConfig cfg = flags.config();
    std::vector<EvalProblem> problems = load_problems(dir, library_flag);
    if (ks.empty()) ks = {1};
    std::function<ExpansionPolicy(const Scenario&, const NodeLibrary&, std::uint64_t)> make;
    if (cfg.policy == PolicyKind::Remote)
        make = [&flags, &cfg](const Scenario& sc, const NodeLibrary& lib, std::uint64_t) {
            return make_policy(flags, cfg, sc, lib).policy;
        };
    const MetricReport report = evaluate_generator(synthesis_generator(cfg, make), std::move(problems), n, ks, cfg);
    nlohmann::ordered_json j = {{"policy", std::string(to_string(cfg.policy))}, {"n", n}, {"seed", cfg.seed}};
    const nlohmann::ordered_json body = report.to_json();
    for (const auto& [k, v] : body.items()) j[k] = v;
    if (!out_path.empty()) write_file(out_path, j.dump(2) + "\n");
    out << format_metric_table(report);
    return kOk;
}

inline int cmd_dataset(const std::string& dir, const std::string& library_flag, const std::string& out_path,
                       const SearchFlags& flags, std::ostream& out, std::ostream& err) {
    SearchConfig cfg = flags.config();
    cfg.policy = PolicyKind::Oracle;
    std::vector<DatasetRecord> records;
    std::size_t skipped = 0;
    for (const auto& p : load_problems(dir, library_flag)) {
        try {
            const SynthesisResult r = synthesize(p.scenario, p.library, cfg);
            if (!sample_correct(r.tree, p.scenario, p.library, cfg))
                throw Error(ErrorCode::Unsolvable, "tree fails full simulation");
            records.push_back(make_record(p.name, p.scenario.description, r.tree, p.library));
        } catch (const Error& e) {
            ++skipped;
            err << "btgen: skipped " << p.name << ": " << e.what() << "\n";
        }
    }
    write_file(out_path, write_records(records));
    out << "wrote " << records.size() << " record(s) to " << out_path;
    if (skipped) out << ", skipped " << skipped;
    out << "\n";
    return skipped ? kFindings : kOk;
}

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Behavior tree synthesis, simulation and evaluation", "btgen"};
    app.require_subcommand(1);
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "More output");

    std::string scenario, library, tree, out_path, report, trace, cases, scen_dir;
    bool timestamps = false, dump_states = false;
    std::size_t variant = 0;
    std::uint64_t sim_seed = 0;
    long n = 10;
    std::vector<long> ks;

    SearchFlags synth_flags, eval_flags, dataset_flags;

    auto* synth = app.add_subcommand("synth", "Synthesize a behavior tree for a scenario");
    synth->add_option("--scenario", scenario, "Scenario JSON")->required();
    synth->add_option("--library", library, "Node library JSON (default: the scenario's)");
    synth->add_option("--out", out_path, "Output tree XML")->required();
    synth->add_option("--report", report, "Output report JSON (default: <out stem>.report.json)");
    synth->add_flag("--timestamps", timestamps, "Include a timestamp in the report");
    synth_flags.add_to(*synth);

    auto* sim = app.add_subcommand("simulate", "Run a tree against a scenario");
    sim->add_option("--tree", tree, "Tree XML")->required();
    sim->add_option("--scenario", scenario, "Scenario JSON")->required();
    sim->add_option("--library", library, "Node library JSON (default: the scenario's)");
    sim->add_option("--variant", variant, "Event schedule variant (0 = as written)");
    sim->add_option("--seed", sim_seed, "Seed for schedule variants");
    sim->add_option("--out", out_path, "Episode JSON (default: stdout)");
    sim->add_option("--trace", trace, "Trace JSONL output");
    sim->add_flag("--dump-states", dump_states, "Record full states in the trace");

    auto* val = app.add_subcommand("validate", "Check a tree's structure and bindings");
    val->add_option("--tree", tree, "Tree XML")->required();
    val->add_option("--library", library, "Node library JSON");
    val->add_option("--scenario", scenario, "Scenario JSON for binding checks");
    val->add_option("--cases", cases, "Node unit-test cases JSON (needs --scenario)");

    auto* ev = app.add_subcommand("eval", "Evaluate a policy over a scenario directory");
    ev->add_option("--scenarios", scen_dir, "Directory searched for scenario files")->required();
    ev->add_option("--library", library, "Node library for every scenario");
    ev->add_option("--n", n, "Samples per scenario")->check(CLI::PositiveNumber);
    ev->add_option("--k", ks, "k for pass@k (repeatable)");
    ev->add_option("--out", out_path, "Metric report JSON");
    eval_flags.add_to(*ev);

    auto* ds = app.add_subcommand("dataset", "Build a validated JSONL corpus from scenarios");
    ds->add_option("--scenarios", scen_dir, "Directory searched for scenario files")->required();
    ds->add_option("--library", library, "Node library for every scenario");
    ds->add_option("--out", out_path, "Corpus JSONL")->required();
    dataset_flags.add_to(*ds);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "btgen: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*synth) return cmd_synth(scenario, library, out_path, report, timestamps, synth_flags, out, err);
        if (*sim) return cmd_simulate(tree, scenario, library, variant, sim_seed, out_path, trace, dump_states, out, err);
        if (*val) {
            if (!cases.empty() && scenario.empty()) {
                err << "btgen: validate: --cases needs --scenario\n";
                return kUsage;
            }
            return cmd_validate(tree, library, scenario, cases, out);
        }
        if (*ev) return cmd_eval(scen_dir, library, n, ks, out_path, eval_flags, out);
        if (*ds) return cmd_dataset(scen_dir, library, out_path, dataset_flags, out, err);
    } catch (const FileError& e) {
        err << "btgen: " << e.path << ": " << e.message << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "btgen: " << e.what() << "\n";
        return e.code() == ErrorCode::InvalidArgs ? kUsage : kFindings;
    } catch (const std::exception& e) {
        err << "btgen: " << e.what() << "\n";
        return kUsage;
    }
    (void)verbosity;
    return kUsage;
}

}  // namespace btgen::cli
