#pragma once

// Dataset corpus: one JSON object per line with keys, in this order,
// name, description, xml, nodes, implementations.

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "btgen/validate.hpp"
#include "btgen/xml.hpp"

namespace btgen {

struct NodeMeta {
    std::string name;
    std::string description;
    friend bool operator==(const NodeMeta&, const NodeMeta&) = default;
};

struct NodeImplementation {
    std::string name;
    std::string implementation;
    friend bool operator==(const NodeImplementation&, const NodeImplementation&) = default;
};

struct DatasetRecord {
    std::string name;
    std::string description;
    std::string xml;
    std::vector<NodeMeta> nodes;
    std::vector<NodeImplementation> implementations;

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// Enforces the record invariants: the xml parses into a structurally valid,
/// fully expanded tree and every leaf binding has exactly one metadata entry
/// and one implementation entry.
inline void check_record(const DatasetRecord& rec) {
    BehaviorTree tree = [&] {
        try {
            return parse_bt_xml(rec.xml);
        } catch (const Error& e) {
            throw Error(ErrorCode::SchemaViolation, "record '" + rec.name + "' xml: " + e.what());
        }
    }();
    const ValidationReport report = validate_structure(tree, nullptr);
    if (!report.ok())
        throw Error(ErrorCode::SchemaViolation, "record '" + rec.name + "' tree: " + report.findings.front().message);

    auto count_meta = [&](const std::string& n) {
        std::size_t c = 0;
        for (const auto& m : rec.nodes) c += m.name == n;
        return c;
    };
    auto count_impl = [&](const std::string& n) {
        std::size_t c = 0;
        for (const auto& m : rec.implementations) c += m.name == n;
        return c;
    };
    for (const auto& binding : leaf_bindings(tree.root())) {
        if (count_meta(binding) != 1)
            throw Error(ErrorCode::CrossRefViolation, "record '" + rec.name + "': binding '" + binding + "' has " +
                                                          std::to_string(count_meta(binding)) + " nodes entries");
        if (count_impl(binding) != 1)
            throw Error(ErrorCode::CrossRefViolation, "record '" + rec.name + "': binding '" + binding + "' has " +
                                                          std::to_string(count_impl(binding)) +
                                                          " implementations entries");
    }
}

/// Builds a record for a fully expanded tree, taking node metadata and
/// implementations from the library in first-use order.
inline DatasetRecord make_record(std::string name, std::string description, const BehaviorTree& tree,
                                 const NodeLibrary& library) {
    DatasetRecord rec{std::move(name), std::move(description), serialize_bt_xml(tree), {}, {}};
    for (const auto& binding : leaf_bindings(tree.root())) {
        const NodeDefinition* def = library.find(binding);
        if (!def) throw Error(ErrorCode::CrossRefViolation, "leaf binding '" + binding + "' is not in the library");
        rec.nodes.push_back({def->name, def->description});
        rec.implementations.push_back({def->name, def->implementation});
    }
    check_record(rec);
    return rec;
}

inline nlohmann::ordered_json record_to_json(const DatasetRecord& rec) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& m : rec.nodes) nodes.push_back({{"name", m.name}, {"description", m.description}});
    nlohmann::ordered_json impls = nlohmann::ordered_json::array();
    for (const auto& m : rec.implementations)
        impls.push_back({{"name", m.name}, {"implementation", m.implementation}});
    return {{"name", rec.name},
            {"description", rec.description},
            {"xml", rec.xml},
            {"nodes", nodes},
            {"implementations", impls}};
}

/// Single JSON line, no trailing newline.
inline std::string write_record(const DatasetRecord& rec) { return record_to_json(rec).dump(); }

inline DatasetRecord read_record(std::string_view line, int line_number = 1) {
    auto fail = [&](const std::string& msg) -> Error {
        return Error(ErrorCode::SchemaViolation, msg, {line_number, 1});
    };
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw fail(std::string("record is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw fail("record must be a JSON object");
    static const std::set<std::string> keys = {"name", "description", "xml", "nodes", "implementations"};
    for (const auto& [k, _] : j.items())
        if (!keys.contains(k)) throw fail("unexpected key \"" + k + "\"");
    for (const auto& k : keys)
        if (!j.contains(k)) throw fail("missing key \"" + k + "\"");

    auto str = [&](const nlohmann::json& v, const std::string& what) {
        if (!v.is_string()) throw fail(what + " must be a string");
        return v.get<std::string>();
    };
    DatasetRecord rec;
    rec.name = str(j["name"], "name");
    rec.description = str(j["description"], "description");
    rec.xml = str(j["xml"], "xml");
    if (!j["nodes"].is_array()) throw fail("nodes must be an array");
    for (const auto& n : j["nodes"]) {
        if (!n.is_object() || !n.contains("name") || !n.contains("description") || n.size() != 2)
            throw fail("nodes entries must be {name, description}");
        rec.nodes.push_back({str(n["name"], "nodes[].name"), str(n["description"], "nodes[].description")});
    }
    if (!j["implementations"].is_array()) throw fail("implementations must be an array");
    for (const auto& n : j["implementations"]) {
        if (!n.is_object() || !n.contains("name") || !n.contains("implementation") || n.size() != 2)
            throw fail("implementations entries must be {name, implementation}");
        rec.implementations.push_back(
            {str(n["name"], "implementations[].name"), str(n["implementation"], "implementations[].implementation")});
    }
    try {
        check_record(rec);
    } catch (const Error& e) {
        throw Error(e.code(), e.detail(), {line_number, 1});
    }
    return rec;
}

/// Reads a JSON Lines corpus; blank lines are skipped.
inline std::vector<DatasetRecord> read_records(std::string_view text) {
    std::vector<DatasetRecord> out;
    int line_number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_number;
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") != std::string_view::npos) out.push_back(read_record(line, line_number));
        start = end + 1;
    }
    return out;
}

inline std::string write_records(const std::vector<DatasetRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += write_record(r);
        out += '\n';
    }
    return out;
}

}  // namespace btgen
