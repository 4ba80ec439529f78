#pragma once

// Expansion through a remote generator speaking a JSON request/response
// contract, with schema validation and library-constraint filtering of every
// returned candidate.
//
// Request (keys in this order):
//   {"task", "tree_xml", "target", "subgoal": {"goal", "description", "context"},
//    "retrieved_nodes": [{"name", "type", "description", "score"}],
//    "operators": [{"kind", "min_children", "max_children"}],
//    "role": {"name", "prompt"}, "feedback": [...]}
// Response:
//   {"candidates": [{"operator", "target", "payload"}]}
// Payloads:
//   BindLeaf                    {"node": name}
//   Seq/Fb/ParDecompose         {"children": [child...], "threshold": M}   (threshold for Parallel)
//   GuardPattern                {"condition": name, "handler": subgoal, "default": subgoal}   (default optional)
//   child                       {"open": subgoal} | {"leaf": name} |
//                               {"control": kind, "threshold": M, "children": [child...]}
//   subgoal                     {"goal": "a = 1 && b = 2", "description": "...", "context": "..."}

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "btgen/synth/oracle.hpp"
#include "btgen/synth/policy.hpp"
#include "btgen/xml.hpp"

namespace btgen {

/// Sends one request body and returns the response body. Throws
/// Error(RemoteUnavailable) when the endpoint cannot be reached.
using Transport = std::function<std::string(const std::string&)>;

struct RoleProfile {
    std::string name;
    std::string prompt;  // template; {{task}}, {{target}}, {{subgoal}}, {{nodes}}, {{feedback}}
};

inline RoleProfile builtin_profile(std::string_view role) {
    if (role == "validator")
        return {"validator",
                "You review behavior tree expansions for the task: {{task}}.\n"
                "Check that the proposed subtree for {{target}} achieves {{subgoal}} using only these nodes: "
                "{{nodes}}.\nKnown problems: {{feedback}}\n"};
    if (role == "planner")
        return {"planner",
                "You are a robot task planner. Task: {{task}}.\n"
                "Expand the open node {{target}} whose subgoal is {{subgoal}}.\n"
                "Use only these nodes: {{nodes}}.\nPrevious attempts left unmet: {{feedback}}\n"
                "Answer with JSON candidates only.\n"};
    throw Error(ErrorCode::InvalidArgs, "unknown role profile '" + std::string(role) + "'");
}

/// Loads `<dir>/<role>.txt`, falling back to the built-in template.
inline RoleProfile load_profile(const std::filesystem::path& dir, std::string_view role) {
    const auto path = dir / (std::string(role) + ".txt");
    std::ifstream in(path);
    if (!in) return builtin_profile(role);
    std::ostringstream ss;
    ss << in.rdbuf();
    return {std::string(role), ss.str()};
}

inline std::string render_prompt(std::string tmpl, const std::vector<std::pair<std::string, std::string>>& vars) {
    for (const auto& [key, value] : vars) {
        const std::string needle = "{{" + key + "}}";
        for (std::size_t pos = tmpl.find(needle); pos != std::string::npos; pos = tmpl.find(needle, pos + value.size()))
            tmpl.replace(pos, needle.size(), value);
    }
    return tmpl;
}

namespace detail {

inline nlohmann::ordered_json subgoal_json(const Subgoal& g) {
    nlohmann::ordered_json j = {{"goal", format_goal(g.goal)}, {"description", g.description}};
    if (!g.context.empty()) j["context"] = format_goal(g.context);
    return j;
}

inline nlohmann::ordered_json child_json(const ChildSpec& c) {
    switch (c.kind) {
        case ChildSpec::Kind::Open: return {{"open", subgoal_json(c.subgoal)}};
        case ChildSpec::Kind::Leaf: return {{"leaf", c.definition}};
        case ChildSpec::Kind::Control: {
            nlohmann::ordered_json j = {{"control", std::string(to_string(c.control))}};
            if (c.control == NodeKind::Parallel) j["threshold"] = c.threshold;
            nlohmann::ordered_json kids = nlohmann::ordered_json::array();
            for (const auto& k : c.children) kids.push_back(child_json(k));
            j["children"] = kids;
            return j;
        }
    }
    return {};
}

/// Thrown inside the parser for a candidate that must be dropped.
struct Drop {
    std::string reason;
};

inline std::string expect_string(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_string())
        throw Drop{std::string("missing string \"") + key + "\""};
    return j[key].get<std::string>();
}

inline Subgoal parse_subgoal(const nlohmann::json& j, const Scenario& sc) {
    if (!j.is_object()) throw Drop{"subgoal must be an object"};
    Subgoal g;
    try {
        g.goal = parse_goal(expect_string(j, "goal"));
        if (j.contains("description")) g.description = expect_string(j, "description");
        if (j.contains("context")) g.context = parse_goal(expect_string(j, "context"));
        for (const auto& l : g.goal) sc.compile(l);
        for (const auto& l : g.context) sc.compile(l);
    } catch (const Error& e) {
        throw Drop{std::string("bad subgoal: ") + e.what()};
    }
    return g;
}

inline void require_definition(const NodeLibrary& lib, const std::string& name, std::optional<NodeType> type = {}) {
    const NodeDefinition* d = lib.find(name);
    if (!d) throw Drop{"references '" + name + "', which is not in the node library"};
    if (type && d->type != *type)
        throw Drop{"'" + name + "' is a " + std::string(to_string(d->type)) + ", expected a " +
                   std::string(to_string(*type))};
}

inline ChildSpec parse_child(const nlohmann::json& j, const Scenario& sc, const NodeLibrary& lib, int depth) {
    if (depth > 64) throw Drop{"payload nesting too deep"};
    if (!j.is_object() || j.size() < 1) throw Drop{"child must be an object"};
    if (j.contains("open")) return ChildSpec::open(parse_subgoal(j["open"], sc));
    if (j.contains("leaf")) {
        const std::string name = expect_string(j, "leaf");
        require_definition(lib, name);
        return ChildSpec::leaf(name);
    }
    if (j.contains("control")) {
        auto kind = node_kind_from_string(expect_string(j, "control"));
        if (!kind || !is_control(*kind)) throw Drop{"unknown control kind"};
        if (!j.contains("children") || !j["children"].is_array() || j["children"].empty())
            throw Drop{"control child needs a non-empty children array"};
        std::vector<ChildSpec> kids;
        for (const auto& k : j["children"]) kids.push_back(parse_child(k, sc, lib, depth + 1));
        int threshold = 0;
        if (*kind == NodeKind::Parallel) {
            if (!j.contains("threshold") || !j["threshold"].is_number_integer()) throw Drop{"parallel needs a threshold"};
            threshold = j["threshold"].get<int>();
            if (threshold < 1 || threshold > static_cast<int>(kids.size())) throw Drop{"parallel threshold out of range"};
        }
        return ChildSpec::node(*kind, std::move(kids), threshold);
    }
    throw Drop{"child must have one of \"open\", \"leaf\", \"control\""};
}

inline ExpansionCandidate parse_candidate(const nlohmann::json& j, const ExpansionRequest& req) {
    if (!j.is_object()) throw Drop{"candidate must be an object"};
    ExpansionCandidate c;
    auto op = operator_kind_from_string(expect_string(j, "operator"));
    if (!op) throw Drop{"unknown operator '" + j["operator"].get<std::string>() + "'"};
    c.op = *op;
    c.target = expect_string(j, "target");
    if (c.target != req.target) throw Drop{"target '" + c.target + "' is not the requested frontier node"};
    if (!j.contains("payload") || !j["payload"].is_object()) throw Drop{"missing payload object"};
    const auto& p = j["payload"];
    switch (c.op) {
        case OperatorKind::BindLeaf:
            c.definition = expect_string(p, "node");
            require_definition(req.library, c.definition);
            break;
        case OperatorKind::GuardPattern:
            c.definition = expect_string(p, "condition");
            require_definition(req.library, c.definition, NodeType::Condition);
            if (!p.contains("handler")) throw Drop{"guard needs a handler subgoal"};
            c.handler = parse_subgoal(p["handler"], req.scenario);
            if (p.contains("default")) c.fallback = parse_subgoal(p["default"], req.scenario);
            break;
        default: {
            if (!p.contains("children") || !p["children"].is_array()) throw Drop{"decomposition needs children"};
            for (const auto& k : p["children"]) c.children.push_back(parse_child(k, req.scenario, req.library, 1));
            if (c.op == OperatorKind::ParDecompose) {
                if (!p.contains("threshold") || !p["threshold"].is_number_integer()) throw Drop{"parallel needs a threshold"};
                c.threshold = p["threshold"].get<int>();
                if (c.threshold < 1 || c.threshold > static_cast<int>(c.children.size()))
                    throw Drop{"parallel threshold out of range"};
            }
        }
    }
    const OperatorDef& def = operator_def(c.op);
    if (c.arity() < def.min_children || c.arity() > def.max_children)
        throw Drop{"arity " + std::to_string(c.arity()) + " outside operator bounds"};
    return c;
}

}  // namespace detail

/// Wire form of a candidate, the inverse of response parsing.
inline nlohmann::ordered_json candidate_to_json(const ExpansionCandidate& c) {
    nlohmann::ordered_json payload = nlohmann::ordered_json::object();
    switch (c.op) {
        case OperatorKind::BindLeaf: payload["node"] = c.definition; break;
        case OperatorKind::GuardPattern:
            payload["condition"] = c.definition;
            payload["handler"] = detail::subgoal_json(c.handler);
            if (c.fallback) payload["default"] = detail::subgoal_json(*c.fallback);
            break;
        default: {
            nlohmann::ordered_json kids = nlohmann::ordered_json::array();
            for (const auto& k : c.children) kids.push_back(detail::child_json(k));
            payload["children"] = kids;
            if (c.op == OperatorKind::ParDecompose) payload["threshold"] = c.threshold;
        }
    }
    return {{"operator", std::string(to_string(c.op))}, {"target", c.target}, {"payload", payload}};
}

inline std::string candidates_response(const std::vector<ExpansionCandidate>& cands) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : cands) arr.push_back(candidate_to_json(c));
    return nlohmann::ordered_json{{"candidates", arr}}.dump();
}

inline nlohmann::ordered_json build_request(const ExpansionRequest& req, const RoleProfile& profile) {
    const BTNode& open = request_target(req);
    const std::string query = retrieval_query(req);
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    std::string node_list;
    for (const auto& s : retrieve(query, req.retrieval_k, req.library)) {
        nodes.push_back({{"name", s.definition.name},
                         {"type", std::string(to_string(s.definition.type))},
                         {"description", s.definition.description},
                         {"score", s.score}});
        if (!node_list.empty()) node_list += ", ";
        node_list += s.definition.name;
    }
    nlohmann::ordered_json ops = nlohmann::ordered_json::array();
    for (const auto& op : req.library.operators())
        ops.push_back({{"kind", std::string(to_string(op.kind))},
                       {"min_children", op.min_children},
                       {"max_children", op.max_children}});
    std::string fb_text;
    for (const auto& f : req.feedback) fb_text += (fb_text.empty() ? "" : "; ") + f;
    const std::string prompt = render_prompt(profile.prompt, {{"task", req.task},
                                                              {"target", req.target},
                                                              {"subgoal", format_goal(open.subgoal.goal)},
                                                              {"nodes", node_list},
                                                              {"feedback", fb_text.empty() ? "none" : fb_text}});
    return {{"task", req.task},
            {"tree_xml", serialize_bt_xml(req.state.tree)},
            {"target", req.target},
            {"subgoal", detail::subgoal_json(open.subgoal)},
            {"retrieved_nodes", nodes},
            {"operators", ops},
            {"role", {{"name", profile.name}, {"prompt", prompt}}},
            {"feedback", req.feedback}};
}

struct DroppedCandidate {
    std::string target;
    std::string candidate;  // raw JSON
    std::string reason;
};

struct ParsedResponse {
    std::vector<ExpansionCandidate> candidates;
    std::vector<DroppedCandidate> dropped;
};

/// Parses a response body. Throws MalformedResponse when the envelope is not
/// `{"candidates": [...]}`; individual bad candidates are dropped and recorded.
inline ParsedResponse parse_response(std::string_view body, const ExpansionRequest& req) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedResponse, std::string("response is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("candidates") || !doc["candidates"].is_array())
        throw Error(ErrorCode::MalformedResponse, "response must be an object with a \"candidates\" array");
    ParsedResponse out;
    for (const auto& j : doc["candidates"]) {
        try {
            out.candidates.push_back(detail::parse_candidate(j, req));
        } catch (const detail::Drop& d) {
            out.dropped.push_back({req.target, j.dump(), d.reason});
        } catch (const nlohmann::json::exception& e) {
            out.dropped.push_back({req.target, j.dump(), e.what()});
        }
    }
    return out;
}

/// Remote expansion policy. Transport failures and malformed envelopes are
/// retried once.
class RemoteExpander {
public:
    RemoteExpander(Transport transport, RoleProfile profile)
        : transport_(std::move(transport)), profile_(std::move(profile)),
          drops_(std::make_shared<std::vector<DroppedCandidate>>()) {}

    std::vector<ExpansionCandidate> operator()(const ExpansionRequest& req) const {
        const std::string body = build_request(req, profile_).dump();
        ParsedResponse parsed;
        for (int attempt = 0;; ++attempt) {
            try {
                parsed = parse_response(call(body), req);
                break;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::MalformedResponse || attempt == 1) throw;
            }
        }
        drops_->insert(drops_->end(), parsed.dropped.begin(), parsed.dropped.end());
        if (parsed.candidates.empty())
            throw Error(ErrorCode::EmptyAfterFiltering,
                        "no valid candidates for '" + req.target + "' (" + std::to_string(parsed.dropped.size()) +
                            " dropped)");
        if (parsed.candidates.size() > req.max_candidates) parsed.candidates.resize(req.max_candidates);
        return parsed.candidates;
    }

    /// Every candidate dropped so far, shared across copies of this expander.
    const std::vector<DroppedCandidate>& drops() const { return *drops_; }
    std::shared_ptr<std::vector<DroppedCandidate>> drop_log() const { return drops_; }

private:
    std::string call(const std::string& body) const {
        try {
            return transport_(body);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::RemoteUnavailable) throw;
            return transport_(body);
        }
    }

    Transport transport_;
    RoleProfile profile_;
    std::shared_ptr<std::vector<DroppedCandidate>> drops_;
};

// In-process mocks implementing the same contract.
namespace mock {

/// BindLeaf of the first retrieved definition.
inline Transport echo_first() {
    return [](const std::string& body) {
        const auto req = nlohmann::ordered_json::parse(body);
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        if (!req["retrieved_nodes"].empty())
            arr.push_back({{"operator", "BindLeaf"},
                           {"target", req["target"]},
                           {"payload", {{"node", req["retrieved_nodes"][0]["name"]}}}});
        return nlohmann::ordered_json{{"candidates", arr}}.dump();
    };
}

/// Reconstructs the partial tree from the request and answers with the
/// goal-regression candidates.
inline Transport oracle_echo(const Scenario& scenario, const NodeLibrary& library, std::size_t k = 8) {
    return [&scenario, &library, k](const std::string& body) {
        const auto req = nlohmann::json::parse(body);
        SynthState state;
        state.tree = parse_bt_xml(req["tree_xml"].get<std::string>());
        state.frontier = open_nodes(state.tree.root());
        std::vector<std::string> feedback = req["feedback"].get<std::vector<std::string>>();
        return candidates_response(
            oracle_expand(state, req["target"].get<std::string>(), scenario, library, k, feedback));
    };
}

/// Replays fixed responses in order, repeating the last.
inline Transport scripted(std::vector<std::string> responses) {
    auto next = std::make_shared<std::size_t>(0);
    return [responses = std::move(responses), next](const std::string&) {
        if (responses.empty()) throw Error(ErrorCode::RemoteUnavailable, "scripted mock has no responses");
        const std::string& r = responses[std::min(*next, responses.size() - 1)];
        ++*next;
        return r;
    };
}

/// Always proposes a chain of nested Sequences deeper than any sane depth
/// bound, so every resulting state fails structural validation.
inline Transport runaway(int nesting = 16) {
    return [nesting](const std::string& body) {
        const auto req = nlohmann::ordered_json::parse(body);
        nlohmann::ordered_json child = {{"leaf", req["retrieved_nodes"][0]["name"]}};
        for (int i = 0; i < nesting; ++i)
            child = {{"control", "Sequence"}, {"children", nlohmann::ordered_json::array({child})}};
        nlohmann::ordered_json cand = {{"operator", "SeqDecompose"},
                                       {"target", req["target"]},
                                       {"payload", {{"children", nlohmann::ordered_json::array({child})}}}};
        return nlohmann::ordered_json{{"candidates", nlohmann::ordered_json::array({cand})}}.dump();
    };
}

/// Always unreachable.
inline Transport unavailable() {
    return [](const std::string&) -> std::string {
        throw Error(ErrorCode::RemoteUnavailable, "mock endpoint is down");
    };
}

}  // namespace mock

}  // namespace btgen
