#pragma once

// Declarative discrete world: typed variables, an initial assignment, a goal,
// named condition predicates, action schemas and scripted exogenous events.
//
// Scenario file (JSON):
//   {
//     "name": "...", "description": "...", "library": "relative/path.json",   (optional)
//     "variables": {"pos": {"type": "int", "min": 0, "max": 4},
//                   "door": {"type": "enum", "values": ["closed", "open"]},
//                   "lit": {"type": "bool"}},
//     "init": {"pos": 0, "door": "closed", "lit": false},
//     "goal": ["pos = 4", "door = open"],
//     "conditions": {"door_open": "door = open"},
//     "actions": {"advance": {"precondition": "pos < 4", "effects": ["pos += 1"], "duration": 1}},
//     "events": [{"tick": 3, "variable": "lit", "value": true}],
//     "max_ticks": 20
//   }
//
// Values are stored as integers: booleans as 0/1, enumerations as label index.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "btgen/error.hpp"
#include "btgen/expr.hpp"

namespace btgen {

using Value = std::int64_t;

struct Domain {
    enum class Kind { Bool, Int, Enum };
    Kind kind = Kind::Bool;
    Value lo = 0;
    Value hi = 1;
    std::vector<std::string> labels;  // Enum

    bool contains(Value v) const noexcept { return v >= lo && v <= hi; }
    Value clamp(Value v) const noexcept { return std::clamp(v, lo, hi); }

    std::optional<Value> parse(std::string_view text) const {
        switch (kind) {
            case Kind::Bool:
                if (text == "true") return 1;
                if (text == "false") return 0;
                return std::nullopt;
            case Kind::Int: {
                if (text.empty()) return std::nullopt;
                try {
                    std::size_t used = 0;
                    const Value v = std::stoll(std::string(text), &used);
                    if (used != text.size()) return std::nullopt;
                    return v;
                } catch (...) {
                    return std::nullopt;
                }
            }
            case Kind::Enum:
                for (std::size_t i = 0; i < labels.size(); ++i)
                    if (labels[i] == text) return static_cast<Value>(i);
                return std::nullopt;
        }
        return std::nullopt;
    }

    std::string format(Value v) const {
        switch (kind) {
            case Kind::Bool: return v ? "true" : "false";
            case Kind::Int: return std::to_string(v);
            case Kind::Enum:
                return v >= 0 && v < static_cast<Value>(labels.size()) ? labels[static_cast<std::size_t>(v)]
                                                                       : std::to_string(v);
        }
        return std::to_string(v);
    }

    nlohmann::json to_json(Value v) const {
        switch (kind) {
            case Kind::Bool: return v != 0;
            case Kind::Int: return v;
            case Kind::Enum: return format(v);
        }
        return v;
    }
};

struct CompiledLiteral {
    std::size_t var = 0;
    CmpOp op = CmpOp::Eq;
    Value value = 0;

    bool eval(const std::vector<Value>& assignment) const { return compare(assignment[var], op, value); }
};

struct CompiledPredicate {
    Predicate::Op op = Predicate::Op::True;
    CompiledLiteral literal;
    std::vector<CompiledPredicate> args;

    bool eval(const std::vector<Value>& a) const {
        switch (op) {
            case Predicate::Op::True: return true;
            case Predicate::Op::False: return false;
            case Predicate::Op::Lit: return literal.eval(a);
            case Predicate::Op::Not: return !args.front().eval(a);
            case Predicate::Op::And:
                return std::all_of(args.begin(), args.end(), [&](const auto& p) { return p.eval(a); });
            case Predicate::Op::Or:
                return std::any_of(args.begin(), args.end(), [&](const auto& p) { return p.eval(a); });
        }
        return false;
    }
};

struct CompiledEffect {
    std::size_t var = 0;
    Effect::Kind kind = Effect::Kind::Set;
    Value value = 0;  // Set value or increment step
};

struct ConditionSchema {
    std::string name;
    Predicate predicate;
    CompiledPredicate compiled;
};

struct ActionSchema {
    std::string name;
    Predicate precondition;
    CompiledPredicate compiled_precondition;
    std::vector<Effect> effects;
    std::vector<CompiledEffect> compiled_effects;
    int duration = 1;
};

struct ScheduledEvent {
    int tick = 1;
    std::size_t var = 0;
    Value value = 0;

    friend bool operator==(const ScheduledEvent&, const ScheduledEvent&) = default;
};

struct InProgress {
    std::string action;  // scenario action name
    int remaining = 1;

    friend bool operator==(const InProgress&, const InProgress&) = default;
};

struct WorldState {
    std::vector<Value> values;  // indexed like Scenario::variables
    int tick_index = 0;
    std::optional<InProgress> in_progress;

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

class Scenario {
public:
    std::string name;
    std::string description;
    std::string library;  // optional path hint, relative to the scenario file

    std::vector<std::string> variables;
    std::vector<Domain> domains;
    std::vector<Value> init;
    Goal goal;
    std::map<std::string, ConditionSchema> conditions;
    std::map<std::string, ActionSchema> actions;
    std::vector<ScheduledEvent> events;  // sorted by tick, file order within a tick
    int max_ticks = 1;

    std::optional<std::size_t> find_variable(std::string_view var) const {
        for (std::size_t i = 0; i < variables.size(); ++i)
            if (variables[i] == var) return i;
        return std::nullopt;
    }

    std::size_t variable_index(std::string_view var) const {
        if (auto i = find_variable(var)) return *i;
        throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(var) + "'");
    }

    /// Resolves a textual value for `var`; DomainViolation if not in its domain.
    Value resolve_value(std::size_t var, std::string_view text) const {
        const Domain& d = domains[var];
        auto v = d.parse(text);
        if (!v || !d.contains(*v))
            throw Error(ErrorCode::DomainViolation,
                        "value '" + std::string(text) + "' is outside the domain of '" + variables[var] + "'");
        return *v;
    }

    CompiledLiteral compile(const Literal& lit) const {
        CompiledLiteral out;
        out.var = variable_index(lit.variable);
        out.op = lit.op;
        const Domain& d = domains[out.var];
        if (d.kind != Domain::Kind::Int && lit.op != CmpOp::Eq && lit.op != CmpOp::Ne)
            throw Error(ErrorCode::SchemaViolation, "ordering comparison on non-integer variable '" + lit.variable + "'");
        if (d.kind == Domain::Kind::Int) {
            auto v = d.parse(lit.value);
            if (!v) throw Error(ErrorCode::DomainViolation, "'" + lit.value + "' is not an integer");
            out.value = *v;  // comparisons may reference out-of-range thresholds
        } else {
            out.value = resolve_value(out.var, lit.value);
        }
        return out;
    }

    CompiledPredicate compile(const Predicate& p) const {
        CompiledPredicate out;
        out.op = p.op;
        if (p.op == Predicate::Op::Lit) out.literal = compile(p.literal);
        for (const auto& a : p.args) out.args.push_back(compile(a));
        return out;
    }

    bool holds(const Literal& lit, const std::vector<Value>& a) const { return compile(lit).eval(a); }

    bool holds(const Goal& g, const std::vector<Value>& a) const {
        return std::all_of(g.begin(), g.end(), [&](const Literal& l) { return holds(l, a); });
    }

    std::size_t goal_satisfied(const std::vector<Value>& a) const {
        std::size_t n = 0;
        for (const auto& l : goal) n += holds(l, a);
        return n;
    }

    bool goal_holds(const std::vector<Value>& a) const { return goal_satisfied(a) == goal.size(); }

    WorldState initial_world() const { return WorldState{init, 0, std::nullopt}; }

    void apply(const CompiledEffect& e, std::vector<Value>& a) const {
        const Domain& d = domains[e.var];
        if (e.kind == Effect::Kind::Set) a[e.var] = e.value;
        else a[e.var] = d.clamp(a[e.var] + e.value);
    }

    std::string format_value(std::size_t var, Value v) const { return domains[var].format(v); }

    nlohmann::ordered_json assignment_json(const std::vector<Value>& a) const {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < variables.size(); ++i) j[variables[i]] = domains[i].to_json(a[i]);
        return j;
    }

    /// Copy with a different event schedule (validated like loaded events).
    Scenario with_events(std::vector<ScheduledEvent> evs) const {
        Scenario s = *this;
        for (const auto& e : evs) {
            if (e.tick < 1 || e.tick > max_ticks)
                throw Error(ErrorCode::SchemaViolation, "event tick " + std::to_string(e.tick) + " outside [1, max_ticks]");
            if (e.var >= variables.size() || !domains[e.var].contains(e.value))
                throw Error(ErrorCode::DomainViolation, "event value outside its variable's domain");
        }
        std::stable_sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) { return a.tick < b.tick; });
        s.events = std::move(evs);
        return s;
    }
};

namespace detail {

inline std::string json_value_text(const nlohmann::json& v) {
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_string()) return v.get<std::string>();
    throw Error(ErrorCode::SchemaViolation, "value must be a boolean, integer or string, got " + v.dump());
}

}  // namespace detail

/// Parses and validates a scenario document.
inline Scenario load_scenario(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("scenario is not valid JSON: ") + e.what());
    }
    auto schema = [](const std::string& msg) { return Error(ErrorCode::SchemaViolation, msg); };
    if (!doc.is_object()) throw schema("scenario must be a JSON object");
    static const std::set<std::string> allowed = {"name",    "description", "library", "variables", "init",
                                                  "goal",    "conditions",  "actions", "events",    "max_ticks"};
    for (const auto& [k, _] : doc.items())
        if (!allowed.contains(k)) throw schema("unexpected scenario key \"" + k + "\"");
    for (const char* k : {"variables", "init", "goal", "max_ticks"})
        if (!doc.contains(k)) throw schema(std::string("scenario is missing \"") + k + "\"");

    Scenario s;
    auto opt_string = [&](const char* key) -> std::string {
        if (!doc.contains(key)) return {};
        if (!doc[key].is_string()) throw schema(std::string(key) + " must be a string");
        return doc[key].get<std::string>();
    };
    s.name = opt_string("name");
    s.description = opt_string("description");
    s.library = opt_string("library");

    // Variables are indexed in name order.
    if (!doc["variables"].is_object() || doc["variables"].empty()) throw schema("variables must be a non-empty object");
    for (const auto& [var, spec] : doc["variables"].items()) {
        if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string())
            throw schema("variable '" + var + "' needs a string \"type\"");
        Domain d;
        const std::string type = spec["type"].get<std::string>();
        if (type == "bool") {
            d.kind = Domain::Kind::Bool;
        } else if (type == "int") {
            d.kind = Domain::Kind::Int;
            if (!spec.contains("min") || !spec.contains("max") || !spec["min"].is_number_integer() ||
                !spec["max"].is_number_integer())
                throw schema("int variable '" + var + "' needs integer \"min\" and \"max\"");
            d.lo = spec["min"].get<Value>();
            d.hi = spec["max"].get<Value>();
            if (d.lo > d.hi) throw schema("int variable '" + var + "' has min > max");
        } else if (type == "enum") {
            d.kind = Domain::Kind::Enum;
            if (!spec.contains("values") || !spec["values"].is_array() || spec["values"].empty())
                throw schema("enum variable '" + var + "' needs a non-empty \"values\" array");
            std::set<std::string> seen;
            for (const auto& l : spec["values"]) {
                if (!l.is_string()) throw schema("enum labels of '" + var + "' must be strings");
                if (!seen.insert(l.get<std::string>()).second) throw schema("duplicate enum label in '" + var + "'");
                d.labels.push_back(l.get<std::string>());
            }
            d.lo = 0;
            d.hi = static_cast<Value>(d.labels.size()) - 1;
        } else {
            throw schema("variable '" + var + "' has unknown type '" + type + "'");
        }
        s.variables.push_back(var);
        s.domains.push_back(std::move(d));
    }

    if (!doc["init"].is_object()) throw schema("init must be an object");
    s.init.assign(s.variables.size(), 0);
    std::vector<bool> assigned(s.variables.size(), false);
    for (const auto& [var, v] : doc["init"].items()) {
        const std::size_t i = s.variable_index(var);
        s.init[i] = s.resolve_value(i, detail::json_value_text(v));
        assigned[i] = true;
    }
    for (std::size_t i = 0; i < assigned.size(); ++i)
        if (!assigned[i]) throw schema("init does not assign '" + s.variables[i] + "'");

    const json& goal = doc["goal"];
    if (goal.is_string()) {
        s.goal = parse_goal(goal.get<std::string>());
    } else if (goal.is_array()) {
        for (const auto& g : goal) {
            if (!g.is_string()) throw schema("goal entries must be literal strings");
            for (auto& lit : parse_goal(g.get<std::string>())) s.goal.push_back(std::move(lit));
        }
    } else {
        throw schema("goal must be a string or an array of literal strings");
    }
    for (const auto& lit : s.goal) s.compile(lit);

    if (doc.contains("conditions")) {
        if (!doc["conditions"].is_object()) throw schema("conditions must be an object");
        for (const auto& [name, expr] : doc["conditions"].items()) {
            if (!expr.is_string()) throw schema("condition '" + name + "' must be a predicate string");
            ConditionSchema c;
            c.name = name;
            c.predicate = parse_predicate(expr.get<std::string>());
            c.compiled = s.compile(c.predicate);
            s.conditions.emplace(name, std::move(c));
        }
    }

    if (doc.contains("actions")) {
        if (!doc["actions"].is_object()) throw schema("actions must be an object");
        for (const auto& [name, spec] : doc["actions"].items()) {
            if (!spec.is_object()) throw schema("action '" + name + "' must be an object");
            for (const auto& [k, _] : spec.items())
                if (k != "precondition" && k != "effects" && k != "duration")
                    throw schema("action '" + name + "' has unexpected key \"" + k + "\"");
            ActionSchema a;
            a.name = name;
            if (spec.contains("precondition")) {
                if (!spec["precondition"].is_string()) throw schema("action '" + name + "' precondition must be a string");
                a.precondition = parse_predicate(spec["precondition"].get<std::string>());
            }
            a.compiled_precondition = s.compile(a.precondition);
            if (!spec.contains("effects") || !spec["effects"].is_array())
                throw schema("action '" + name + "' needs an \"effects\" array");
            for (const auto& e : spec["effects"]) {
                if (!e.is_string()) throw schema("action '" + name + "' effects must be strings");
                Effect eff = parse_effect(e.get<std::string>());
                CompiledEffect ce;
                ce.var = s.variable_index(eff.variable);
                ce.kind = eff.kind;
                if (eff.kind == Effect::Kind::Set) {
                    ce.value = s.resolve_value(ce.var, eff.value);
                } else {
                    if (s.domains[ce.var].kind != Domain::Kind::Int)
                        throw Error(ErrorCode::DomainViolation,
                                    "increment of non-integer variable '" + eff.variable + "' in action '" + name + "'");
                    ce.value = eff.delta;
                }
                a.effects.push_back(std::move(eff));
                a.compiled_effects.push_back(ce);
            }
            if (spec.contains("duration")) {
                if (!spec["duration"].is_number_integer() || spec["duration"].get<int>() < 1)
                    throw schema("action '" + name + "' duration must be an integer >= 1");
                a.duration = spec["duration"].get<int>();
            }
            s.actions.emplace(name, std::move(a));
        }
    }

    if (!doc["max_ticks"].is_number_integer() || doc["max_ticks"].get<int>() < 1)
        throw schema("max_ticks must be a positive integer");
    s.max_ticks = doc["max_ticks"].get<int>();

    std::vector<ScheduledEvent> events;
    if (doc.contains("events")) {
        if (!doc["events"].is_array()) throw schema("events must be an array");
        for (const auto& e : doc["events"]) {
            if (!e.is_object() || !e.contains("tick") || !e.contains("variable") || !e.contains("value"))
                throw schema("events entries must be {tick, variable, value}");
            if (!e["tick"].is_number_integer()) throw schema("event tick must be an integer");
            const int tick = e["tick"].get<int>();
            if (tick < 1 || tick > s.max_ticks)
                throw schema("event tick " + std::to_string(tick) + " outside [1, " + std::to_string(s.max_ticks) + "]");
            if (!e["variable"].is_string()) throw schema("event variable must be a string");
            const std::size_t var = s.variable_index(e["variable"].get<std::string>());
            events.push_back({tick, var, s.resolve_value(var, detail::json_value_text(e["value"]))});
        }
    }
    return s.with_events(std::move(events));
}

}  // namespace btgen
