#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "btgen/error.hpp"

namespace btgen {

enum class NodeType { Condition, Action };

inline constexpr std::string_view to_string(NodeType t) noexcept {
    return t == NodeType::Condition ? "condition" : "action";
}

struct NodeDefinition {
    NodeType type = NodeType::Action;
    std::string name;
    std::string description;
    std::string implementation;
    /// Scenario primitive (condition predicate or action schema) this node executes.
    std::string binding;

    friend bool operator==(const NodeDefinition&, const NodeDefinition&) = default;
};

enum class OperatorKind { SeqDecompose, FbDecompose, ParDecompose, GuardPattern, BindLeaf };

inline constexpr std::string_view to_string(OperatorKind k) noexcept {
    switch (k) {
        case OperatorKind::SeqDecompose: return "SeqDecompose";
        case OperatorKind::FbDecompose: return "FbDecompose";
        case OperatorKind::ParDecompose: return "ParDecompose";
        case OperatorKind::GuardPattern: return "GuardPattern";
        case OperatorKind::BindLeaf: return "BindLeaf";
    }
    return "?";
}

inline std::optional<OperatorKind> operator_kind_from_string(std::string_view s) {
    for (auto k : {OperatorKind::SeqDecompose, OperatorKind::FbDecompose, OperatorKind::ParDecompose,
                   OperatorKind::GuardPattern, OperatorKind::BindLeaf}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

/// A decomposition rule of the ops library with the number of children it produces.
struct OperatorDef {
    OperatorKind kind;
    int min_children;
    int max_children;
};

inline const std::vector<OperatorDef>& builtin_operators() {
    static const std::vector<OperatorDef> ops = {
        {OperatorKind::SeqDecompose, 1, 16}, {OperatorKind::FbDecompose, 1, 16},
        {OperatorKind::ParDecompose, 1, 16}, {OperatorKind::GuardPattern, 2, 2},
        {OperatorKind::BindLeaf, 1, 1},
    };
    return ops;
}

inline const OperatorDef& operator_def(OperatorKind kind) {
    for (const auto& op : builtin_operators())
        if (op.kind == kind) return op;
    throw Error(ErrorCode::InvalidArgs, "unknown operator");
}

/// Leaf-node catalog plus the built-in operator catalog. Iteration order is
/// lexicographic by node name regardless of insertion order.
class NodeLibrary {
public:
    NodeLibrary() = default;

    explicit NodeLibrary(std::vector<NodeDefinition> defs) {
        for (auto& d : defs) add(std::move(d));
    }

    void add(NodeDefinition def) {
        if (defs_.contains(def.name)) throw Error(ErrorCode::DuplicateName, "duplicate node name '" + def.name + "'");
        auto name = def.name;
        defs_.emplace(std::move(name), std::move(def));
    }

    const NodeDefinition* find(std::string_view name) const {
        auto it = defs_.find(std::string(name));
        return it == defs_.end() ? nullptr : &it->second;
    }

    std::size_t size() const noexcept { return defs_.size(); }
    bool empty() const noexcept { return defs_.empty(); }

    /// Definitions in name order.
    std::vector<const NodeDefinition*> definitions() const {
        std::vector<const NodeDefinition*> out;
        out.reserve(defs_.size());
        for (const auto& [_, d] : defs_) out.push_back(&d);
        return out;
    }

    const std::vector<OperatorDef>& operators() const noexcept { return builtin_operators(); }

    friend bool operator==(const NodeLibrary& a, const NodeLibrary& b) { return a.defs_ == b.defs_; }

private:
    std::map<std::string, NodeDefinition, std::less<>> defs_;
};

/// Parses `{"nodes": [{type, name, description, implementation, binding}]}`.
inline NodeLibrary load_library(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("library is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
        throw Error(ErrorCode::SchemaViolation, "library must be an object with a \"nodes\" array");

    NodeLibrary lib;
    std::size_t index = 0;
    for (const auto& entry : doc["nodes"]) {
        const std::string where = "nodes[" + std::to_string(index++) + "]";
        if (!entry.is_object()) throw Error(ErrorCode::SchemaViolation, where + " must be an object");
        auto field = [&](const char* key, bool required) -> std::string {
            if (!entry.contains(key)) {
                if (required) throw Error(ErrorCode::SchemaViolation, where + " is missing \"" + key + "\"");
                return {};
            }
            if (!entry[key].is_string())
                throw Error(ErrorCode::SchemaViolation, where + "." + key + " must be a string");
            return entry[key].get<std::string>();
        };
        NodeDefinition def;
        const std::string type = field("type", true);
        if (type == "condition") def.type = NodeType::Condition;
        else if (type == "action") def.type = NodeType::Action;
        else throw Error(ErrorCode::UnknownNodeType, where + " has unknown type '" + type + "'");
        def.name = field("name", true);
        if (def.name.empty()) throw Error(ErrorCode::SchemaViolation, where + ".name must not be empty");
        def.description = field("description", false);
        def.implementation = field("implementation", false);
        def.binding = field("binding", false);
        if (def.binding.empty()) def.binding = def.name;
        lib.add(std::move(def));
    }
    return lib;
}

inline nlohmann::ordered_json library_to_json(const NodeLibrary& lib) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto* d : lib.definitions()) {
        nodes.push_back({{"type", std::string(to_string(d->type))},
                         {"name", d->name},
                         {"description", d->description},
                         {"implementation", d->implementation},
                         {"binding", d->binding}});
    }
    return {{"nodes", nodes}};
}

// ---------------------------------------------------------------------------
// Retrieval

/// Lowercased tokens split on every non-alphanumeric byte.
inline std::set<std::string> tokenize(std::string_view text) {
    std::set<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.insert(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.insert(std::move(cur));
    return out;
}

/// |a ∩ b| / |a ∪ b|, zero when both sets are empty.
inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& t : a) common += b.count(t);
    const std::size_t uni = a.size() + b.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

struct ScoredDefinition {
    NodeDefinition definition;
    double score = 0.0;
};

inline double retrieval_score(std::string_view query, const NodeDefinition& def) {
    return jaccard(tokenize(query), tokenize(def.name + " " + def.description));
}

/// Top-min(k, |library|) definitions by lexical Jaccard score; ties by name.
inline std::vector<ScoredDefinition> retrieve(std::string_view query, std::size_t k, const NodeLibrary& library) {
    if (k < 1) throw Error(ErrorCode::InvalidArgs, "retrieve requires k >= 1");
    const auto q = tokenize(query);
    std::vector<ScoredDefinition> scored;
    for (const auto* d : library.definitions()) {
        scored.push_back({*d, jaccard(q, tokenize(d->name + " " + d->description))});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.definition.name < b.definition.name;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

}  // namespace btgen
