#pragma once

// Deterministic goal-regression expansion policy.
//
// For the target subgoal, literals are split against a reference world (the
// scenario's initial state overridden by the subgoal's context):
//   unmet     - false in the reference world, must be achieved;
//   toggled   - true now but falsified by some scheduled event, must be guarded.
// Candidates, best first:
//   1. GuardPattern per toggled literal and observing condition;
//   2. for a single unmet literal and each achieving action: the action wrapped
//      as Fallback[goal condition, action] when such a condition exists, then
//      the bare action (BindLeaf, or a Sequence whose Open child collects its
//      unmet preconditions); finally a Fallback over all achievers;
//   3. for several unmet literals, Sequence decompositions over orderings,
//      cheapest interference first;
//   4. for a vacuous subgoal, a single goal-checking condition.

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "btgen/scenario.hpp"
#include "btgen/synth/policy.hpp"

namespace btgen {

namespace detail {

class Regression {
public:
    Regression(const Scenario& sc, const NodeLibrary& lib, std::string query)
        : sc_(sc), lib_(lib), query_(std::move(query)) {}

    std::vector<Value> reference_world(const Goal& context) const {
        std::vector<Value> w = sc_.init;
        for (const auto& lit : context) force(w, lit);
        return w;
    }

    bool holds(const Literal& lit, const std::vector<Value>& w) const { return sc_.compile(lit).eval(w); }

    /// Sets the literal's variable to the first domain value satisfying it.
    void force(std::vector<Value>& w, const Literal& lit) const {
        const CompiledLiteral c = sc_.compile(lit);
        if (c.eval(w)) return;
        const Domain& d = sc_.domains[c.var];
        for (Value v = d.lo; v <= d.hi; ++v) {
            if (compare(v, c.op, c.value)) {
                w[c.var] = v;
                return;
            }
        }
    }

    /// Distance of a value from satisfying an integer literal.
    static Value distance(Value v, const CompiledLiteral& c) {
        switch (c.op) {
            case CmpOp::Eq: return v > c.value ? v - c.value : c.value - v;
            case CmpOp::Ne: return v == c.value ? 1 : 0;
            case CmpOp::Lt: return std::max<Value>(0, v - (c.value - 1));
            case CmpOp::Le: return std::max<Value>(0, v - c.value);
            case CmpOp::Gt: return std::max<Value>(0, c.value + 1 - v);
            case CmpOp::Ge: return std::max<Value>(0, c.value - v);
        }
        return 0;
    }

    /// True when applying the action's effects in `w` establishes the literal
    /// or, for an integer variable, strictly moves it toward the literal.
    bool achieves(const ActionSchema& a, const Literal& lit, const std::vector<Value>& w) const {
        const CompiledLiteral c = sc_.compile(lit);
        bool touches = false;
        std::vector<Value> after = w;
        for (const auto& e : a.compiled_effects) {
            touches |= e.var == c.var;
            sc_.apply(e, after);
        }
        if (!touches || c.eval(w)) return false;
        if (c.eval(after)) return true;
        if (sc_.domains[c.var].kind != Domain::Kind::Int) return false;
        return distance(after[c.var], c) < distance(w[c.var], c);
    }

    /// Unmet precondition literals, or nullopt when the precondition is not a
    /// plain conjunction and does not already hold.
    std::optional<Goal> unmet_preconditions(const ActionSchema& a, const std::vector<Value>& w) const {
        Goal pre;
        if (!as_conjunction(a.precondition, pre)) {
            if (a.compiled_precondition.eval(w)) return Goal{};
            return std::nullopt;
        }
        Goal unmet;
        for (const auto& l : pre)
            if (!holds(l, w)) unmet.push_back(l);
        return unmet;
    }

    /// Satisfying values of a literal over its variable's domain.
    std::set<Value> satisfying(const Literal& lit) const {
        const CompiledLiteral c = sc_.compile(lit);
        const Domain& d = sc_.domains[c.var];
        std::set<Value> out;
        for (Value v = d.lo; v <= d.hi; ++v)
            if (compare(v, c.op, c.value)) out.insert(v);
        return out;
    }

    /// A condition whose predicate depends only on the literal's variable and
    /// agrees with it on every domain value.
    bool condition_matches(const ConditionSchema& cond, const Literal& lit) const {
        const CompiledLiteral c = sc_.compile(lit);
        std::set<std::size_t> vars;
        collect_vars(cond.compiled, vars);
        if (vars.size() != 1 || *vars.begin() != c.var) return false;
        const Domain& d = sc_.domains[c.var];
        std::vector<Value> w = sc_.init;
        for (Value v = d.lo; v <= d.hi; ++v) {
            w[c.var] = v;
            if (cond.compiled.eval(w) != compare(v, c.op, c.value)) return false;
        }
        return true;
    }

    static void collect_vars(const CompiledPredicate& p, std::set<std::size_t>& out) {
        if (p.op == Predicate::Op::Lit) out.insert(p.literal.var);
        for (const auto& a : p.args) collect_vars(a, out);
    }

    struct Bound {
        const NodeDefinition* def;
        double score;
    };

    /// Library definitions of `type` whose primitive satisfies `pred`, best score
    /// first. `pred` takes an ActionSchema or a ConditionSchema to match `type`.
    template <class Pred>
    std::vector<Bound> definitions(NodeType type, Pred&& pred) const {
        std::vector<Bound> out;
        for (const auto* d : lib_.definitions()) {
            if (d->type != type) continue;
            if constexpr (std::is_invocable_v<Pred, const ActionSchema&>) {
                auto it = sc_.actions.find(d->binding);
                if (it == sc_.actions.end() || !pred(it->second)) continue;
            } else {
                auto it = sc_.conditions.find(d->binding);
                if (it == sc_.conditions.end() || !pred(it->second)) continue;
            }
            out.push_back({d, retrieval_score(query_, *d)});
        }
        std::stable_sort(out.begin(), out.end(), [](const Bound& a, const Bound& b) { return a.score > b.score; });
        return out;
    }

    const ActionSchema& action_of(const NodeDefinition& d) const { return sc_.actions.at(d.binding); }
    const ConditionSchema& condition_of(const NodeDefinition& d) const { return sc_.conditions.at(d.binding); }

    /// Literal is true in `w` but some event tick group would falsify it.
    /// Returns the assignments of each such group.
    std::vector<std::vector<ScheduledEvent>> toggling_groups(const Literal& lit) const {
        const CompiledLiteral c = sc_.compile(lit);
        std::vector<std::vector<ScheduledEvent>> groups;
        for (std::size_t i = 0; i < sc_.events.size();) {
            std::size_t j = i;
            std::vector<ScheduledEvent> group;
            while (j < sc_.events.size() && sc_.events[j].tick == sc_.events[i].tick) group.push_back(sc_.events[j++]);
            const bool violates = std::any_of(group.begin(), group.end(), [&](const ScheduledEvent& e) {
                return e.var == c.var && !compare(e.value, c.op, c.value);
            });
            if (violates) groups.push_back(std::move(group));
            i = j;
        }
        return groups;
    }

    Literal literal_of(const ScheduledEvent& e) const {
        return Literal{sc_.variables[e.var], CmpOp::Eq, sc_.format_value(e.var, e.value)};
    }

    const Scenario& scenario() const { return sc_; }

private:
    const Scenario& sc_;
    const NodeLibrary& lib_;
    std::string query_;
};

inline Goal without(const Goal& g, const Literal& drop) {
    Goal out;
    for (const auto& l : g)
        if (!(l == drop)) out.push_back(l);
    return out;
}

}  // namespace detail

/// Goal-regression candidates for the target Open node, at most `k`, best first.
inline std::vector<ExpansionCandidate> oracle_expand(const SynthState& state, const std::string& target,
                                                     const Scenario& scenario, const NodeLibrary& library,
                                                     std::size_t k, const std::vector<std::string>& feedback = {}) {
    ExpansionRequest req{state, target, scenario, library, k, 5, feedback, {}};
    const BTNode& open = request_target(req);
    const Subgoal& sg = open.subgoal;
    detail::Regression rx(scenario, library, retrieval_query(req));
    const std::vector<Value> ref = rx.reference_world(sg.context);

    Goal unmet;
    Goal toggled;
    for (const auto& lit : sg.goal) {
        if (!rx.holds(lit, ref)) unmet.push_back(lit);
        else if (!rx.toggling_groups(lit).empty()) toggled.push_back(lit);
    }

    std::vector<ExpansionCandidate> out;
    auto emit = [&](ExpansionCandidate c) {
        c.target = target;
        out.push_back(std::move(c));
    };

    if (unmet.empty() && toggled.empty()) {
        // Vacuous: a goal-checking condition, preferring one that matches a literal.
        const NodeDefinition* best = nullptr;
        bool best_matches = false;
        for (const auto& b : rx.definitions(NodeType::Condition, [](const ConditionSchema&) { return true; })) {
            const auto& cond = rx.condition_of(*b.def);
            const bool m = std::any_of(sg.goal.begin(), sg.goal.end(),
                                       [&](const Literal& l) { return rx.condition_matches(cond, l); });
            if (!best || (m && !best_matches)) {
                best = b.def;
                best_matches = m;
            }
        }
        if (!best) throw Error(ErrorCode::NoCandidates, "no condition can check subgoal '" + format_goal(sg.goal) + "'");
        ExpansionCandidate c;
        c.op = OperatorKind::BindLeaf;
        c.definition = best->name;
        c.score = retrieval_score(retrieval_query(req), *best);
        emit(std::move(c));
        return out;
    }

    // 1. Guards for event-toggled literals.
    for (const auto& lit : toggled) {
        std::vector<ExpansionCandidate> guards;
        std::set<std::string> seen;
        for (const auto& group : rx.toggling_groups(lit)) {
            std::vector<Value> event_world = ref;
            Goal event_literals;
            for (const auto& e : group) {
                event_world[e.var] = e.value;
                event_literals.push_back(rx.literal_of(e));
            }
            auto triggers = rx.definitions(NodeType::Condition, [&](const ConditionSchema& cs) {
                return !cs.compiled.eval(ref) && cs.compiled.eval(event_world);
            });
            for (const auto& t : triggers) {
                if (!seen.insert(t.def->name).second) continue;
                Goal context;
                for (const auto& l : sg.context) {
                    const bool overridden = std::any_of(event_literals.begin(), event_literals.end(),
                                                        [&](const Literal& e) { return e.variable == l.variable; });
                    if (!overridden) context.push_back(l);
                }
                context.insert(context.end(), event_literals.begin(), event_literals.end());
                ExpansionCandidate c;
                c.op = OperatorKind::GuardPattern;
                c.definition = t.def->name;
                c.handler = Subgoal{{lit}, "restore " + lit.to_string() + " when " + t.def->name, context};
                const Goal rest = detail::without(sg.goal, lit);
                if (!rest.empty()) c.fallback = Subgoal{rest, sg.description, sg.context};
                c.score = t.score;
                guards.push_back(std::move(c));
            }
        }
        for (auto& g : guards) emit(std::move(g));
    }
    const bool have_guards = !out.empty();

    // 2./3. Achieving the unmet literals directly.
    auto achievers_of = [&](const Literal& lit) {
        std::vector<detail::Regression::Bound> usable;
        for (const auto& b : rx.definitions(NodeType::Action, [&](const ActionSchema& a) {
                 return rx.achieves(a, lit, ref);
             })) {
            auto pre = rx.unmet_preconditions(rx.action_of(*b.def), ref);
            if (!pre) continue;
            if (std::find(pre->begin(), pre->end(), lit) != pre->end()) continue;
            usable.push_back(b);
        }
        return usable;
    };

    if (unmet.size() == 1) {
        const Literal& lit = unmet.front();
        const auto achievers = achievers_of(lit);
        if (achievers.empty() && !have_guards)
            throw Error(ErrorCode::NoCandidates, "no action achieves '" + lit.to_string() + "'");
        const auto checks = rx.definitions(NodeType::Condition, [&](const ConditionSchema& cs) {
            return rx.condition_matches(cs, lit);
        });
        std::vector<ChildSpec> cores;
        for (const auto& a : achievers) {
            const Goal pre = *rx.unmet_preconditions(rx.action_of(*a.def), ref);
            ChildSpec core = ChildSpec::leaf(a.def->name);
            ExpansionCandidate bare;
            bare.score = a.score;
            if (pre.empty()) {
                bare.op = OperatorKind::BindLeaf;
                bare.definition = a.def->name;
            } else {
                Subgoal enable{pre, "enable " + a.def->name + ": " + format_goal(pre), sg.context};
                core = ChildSpec::node(NodeKind::Sequence, {ChildSpec::open(enable), ChildSpec::leaf(a.def->name)});
                bare.op = OperatorKind::SeqDecompose;
                bare.children = core.children;
            }
            if (!checks.empty()) {
                ExpansionCandidate guarded;
                guarded.op = OperatorKind::FbDecompose;
                guarded.children = {ChildSpec::leaf(checks.front().def->name), core};
                guarded.score = a.score;
                emit(std::move(guarded));
            }
            emit(std::move(bare));
            cores.push_back(std::move(core));
        }
        if (cores.size() > 1) {
            ExpansionCandidate any;
            any.op = OperatorKind::FbDecompose;
            any.children = cores;
            any.score = achievers.front().score;
            emit(std::move(any));
        }
    } else if (unmet.size() > 1) {
        for (const auto& lit : unmet) {
            if (achievers_of(lit).empty() && !have_guards)
                throw Error(ErrorCode::NoCandidates, "no action achieves '" + lit.to_string() + "'");
        }
        // Interference cost of achieving literal b after literal a already holds.
        auto interferes = [&](const Literal& a, const Literal& b) {
            const auto achievers = achievers_of(b);
            if (achievers.empty()) return 0;
            const ActionSchema& act = rx.action_of(*achievers.front().def);
            const std::set<Value> keep = rx.satisfying(a);
            const std::size_t var = scenario.variable_index(a.variable);
            Goal pre;
            if (as_conjunction(act.precondition, pre)) {
                for (const auto& p : pre) {
                    if (p.variable != a.variable) continue;
                    const std::set<Value> need = rx.satisfying(p);
                    const bool disjoint = std::none_of(need.begin(), need.end(), [&](Value v) { return keep.contains(v); });
                    if (disjoint) return 1;
                }
            }
            for (const auto& e : act.compiled_effects)
                if (e.var == var && e.kind == Effect::Kind::Set && !keep.contains(e.value)) return 1;
            return 0;
        };
        std::vector<std::size_t> idx(unmet.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<std::pair<int, std::vector<std::size_t>>> orders;
        if (unmet.size() <= 4) {
            do {
                int cost = 0;
                for (std::size_t i = 0; i < idx.size(); ++i)
                    for (std::size_t j = i + 1; j < idx.size(); ++j) cost += interferes(unmet[idx[i]], unmet[idx[j]]);
                orders.emplace_back(cost, idx);
            } while (std::next_permutation(idx.begin(), idx.end()));
        } else {
            orders.emplace_back(0, idx);
            std::reverse(idx.begin(), idx.end());
            orders.emplace_back(0, idx);
        }
        std::stable_sort(orders.begin(), orders.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [cost, order] : orders) {
            ExpansionCandidate c;
            c.op = OperatorKind::SeqDecompose;
            // Later siblings run only after earlier ones succeed, so they may assume them.
            Goal context = sg.context;
            for (std::size_t i : order) {
                c.children.push_back(ChildSpec::open(Subgoal{{unmet[i]}, "achieve " + unmet[i].to_string(), context}));
                context.push_back(unmet[i]);
            }
            c.score = -static_cast<double>(cost);
            emit(std::move(c));
        }
    }

    if (out.empty()) throw Error(ErrorCode::NoCandidates, "no candidates for '" + format_goal(sg.goal) + "'");
    if (out.size() > k) out.resize(k);
    return out;
}

/// The oracle as a pluggable policy.
inline ExpansionPolicy oracle_policy() {
    return [](const ExpansionRequest& req) {
        return oracle_expand(req.state, req.target, req.scenario, req.library, req.max_candidates, req.feedback);
    };
}

}  // namespace btgen
