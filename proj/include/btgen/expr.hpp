#pragma once

// Textual literal language shared by scenarios, Open-node subgoals and the
// remote wire format:
//
//   literal   := IDENT op VALUE           op in {=, !=, <, <=, >, >=}
//   goal      := "true" | literal ("&&" literal)*
//   predicate := or-expr over "&&", "||", "!", parentheses, true, false
//   effect    := IDENT "=" VALUE | IDENT "+=" INT | IDENT "-=" INT
//
// Values stay textual here; a Scenario resolves them against variable domains.

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "btgen/error.hpp"

namespace btgen {

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

inline constexpr std::string_view to_string(CmpOp op) noexcept {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

inline constexpr bool compare(std::int64_t lhs, CmpOp op, std::int64_t rhs) noexcept {
    switch (op) {
        case CmpOp::Eq: return lhs == rhs;
        case CmpOp::Ne: return lhs != rhs;
        case CmpOp::Lt: return lhs < rhs;
        case CmpOp::Le: return lhs <= rhs;
        case CmpOp::Gt: return lhs > rhs;
        case CmpOp::Ge: return lhs >= rhs;
    }
    return false;
}

struct Literal {
    std::string variable;
    CmpOp op = CmpOp::Eq;
    std::string value;

    std::string to_string() const {
        return variable + " " + std::string(btgen::to_string(op)) + " " + value;
    }
    friend bool operator==(const Literal&, const Literal&) = default;
};

/// Conjunction of literals; empty means "true".
using Goal = std::vector<Literal>;

inline std::string format_goal(const Goal& goal) {
    if (goal.empty()) return "true";
    std::string out;
    for (std::size_t i = 0; i < goal.size(); ++i) {
        if (i) out += " && ";
        out += goal[i].to_string();
    }
    return out;
}

struct Predicate {
    enum class Op { True, False, Lit, And, Or, Not };
    Op op = Op::True;
    Literal literal;
    std::vector<Predicate> args;

    friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct Effect {
    enum class Kind { Set, Increment };
    std::string variable;
    Kind kind = Kind::Set;
    std::string value;       // Set
    std::int64_t delta = 0;  // Increment (negative for "-=")

    std::string to_string() const {
        if (kind == Kind::Set) return variable + " = " + value;
        return variable + (delta < 0 ? " -= " : " += ") + std::to_string(delta < 0 ? -delta : delta);
    }
    friend bool operator==(const Effect&, const Effect&) = default;
};

namespace detail {

enum class TokKind { Ident, Int, Op, LParen, RParen, End };

struct Token {
    TokKind kind;
    std::string text;
    int column;  // 1-based
};

inline std::vector<Token> lex_expr(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorCode::SchemaViolation, msg + " in expression '" + std::string(text) + "'",
                    {1, static_cast<int>(i) + 1});
    };
    while (i < text.size()) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        const int col = static_cast<int>(i) + 1;
        if (std::isspace(c)) {
            ++i;
        } else if (std::isalpha(c) || c == '_') {
            std::size_t j = i;
            while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
            out.push_back({TokKind::Ident, std::string(text.substr(i, j - i)), col});
            i = j;
        } else if (std::isdigit(c) ||
                   (c == '-' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
                    (out.empty() || out.back().kind == TokKind::Op))) {
            std::size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            out.push_back({TokKind::Int, std::string(text.substr(i, j - i)), col});
            i = j;
        } else if (c == '(') {
            out.push_back({TokKind::LParen, "(", col});
            ++i;
        } else if (c == ')') {
            out.push_back({TokKind::RParen, ")", col});
            ++i;
        } else {
            static constexpr std::string_view two[] = {"!=", "<=", ">=", "&&", "||", "+=", "-=", "=="};
            bool matched = false;
            for (auto op : two) {
                if (text.substr(i, 2) == op) {
                    out.push_back({TokKind::Op, op == "==" ? "=" : std::string(op), col});
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            if (c == '=' || c == '<' || c == '>' || c == '!') {
                out.push_back({TokKind::Op, std::string(1, static_cast<char>(c)), col});
                ++i;
            } else {
                fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
            }
        }
    }
    out.push_back({TokKind::End, "", static_cast<int>(text.size()) + 1});
    return out;
}

class ExprParser {
public:
    explicit ExprParser(std::string_view text) : text_(text), toks_(lex_expr(text)) {}

    Predicate predicate() {
        Predicate p = parse_or();
        expect_end();
        return p;
    }

    Goal goal() {
        Goal g;
        if (peek().kind == TokKind::Ident && peek().text == "true" && toks_[pos_ + 1].kind == TokKind::End) {
            ++pos_;
            return g;
        }
        g.push_back(literal());
        while (accept_op("&&")) g.push_back(literal());
        expect_end();
        return g;
    }

    Effect effect() {
        Effect e;
        e.variable = ident("variable name");
        const Token& op = next();
        if (op.kind != TokKind::Op) fail(op, "expected '=', '+=' or '-='");
        if (op.text == "=") {
            e.kind = Effect::Kind::Set;
            e.value = value();
        } else if (op.text == "+=" || op.text == "-=") {
            e.kind = Effect::Kind::Increment;
            const Token& n = next();
            if (n.kind != TokKind::Int) fail(n, "expected integer step");
            e.delta = std::stoll(n.text);
            if (op.text == "-=") e.delta = -e.delta;
        } else {
            fail(op, "expected '=', '+=' or '-='");
        }
        expect_end();
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const {
        throw Error(ErrorCode::SchemaViolation, msg + " in expression '" + std::string(text_) + "'", {1, t.column});
    }

    static bool is_comparison(const Token& t) {
        return t.kind == TokKind::Op && (t.text == "=" || t.text == "!=" || t.text == "<" || t.text == "<=" ||
                                         t.text == ">" || t.text == ">=");
    }

    bool accept_op(std::string_view op) {
        if (peek().kind == TokKind::Op && peek().text == op) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_end() {
        if (peek().kind != TokKind::End) fail(peek(), "unexpected '" + peek().text + "'");
    }

    std::string ident(const char* what) {
        const Token& t = next();
        if (t.kind != TokKind::Ident) fail(t, std::string("expected ") + what);
        return t.text;
    }

    std::string value() {
        const Token& t = next();
        if (t.kind != TokKind::Ident && t.kind != TokKind::Int) fail(t, "expected value");
        return t.text;
    }

    Literal literal() {
        Literal lit;
        lit.variable = ident("variable name");
        const Token& op = next();
        if (op.kind != TokKind::Op) fail(op, "expected comparison operator");
        if (op.text == "=") lit.op = CmpOp::Eq;
        else if (op.text == "!=") lit.op = CmpOp::Ne;
        else if (op.text == "<") lit.op = CmpOp::Lt;
        else if (op.text == "<=") lit.op = CmpOp::Le;
        else if (op.text == ">") lit.op = CmpOp::Gt;
        else if (op.text == ">=") lit.op = CmpOp::Ge;
        else fail(op, "expected comparison operator");
        lit.value = value();
        return lit;
    }

    Predicate parse_or() {
        Predicate lhs = parse_and();
        if (!(peek().kind == TokKind::Op && peek().text == "||")) return lhs;
        Predicate out{Predicate::Op::Or, {}, {std::move(lhs)}};
        while (accept_op("||")) out.args.push_back(parse_and());
        return out;
    }

    Predicate parse_and() {
        Predicate lhs = parse_unary();
        if (!(peek().kind == TokKind::Op && peek().text == "&&")) return lhs;
        Predicate out{Predicate::Op::And, {}, {std::move(lhs)}};
        while (accept_op("&&")) out.args.push_back(parse_unary());
        return out;
    }

    Predicate parse_unary() {
        if (accept_op("!")) return Predicate{Predicate::Op::Not, {}, {parse_unary()}};
        if (peek().kind == TokKind::LParen) {
            ++pos_;
            Predicate inner = parse_or();
            if (peek().kind != TokKind::RParen) fail(peek(), "expected ')'");
            ++pos_;
            return inner;
        }
        if (peek().kind == TokKind::Ident && !is_comparison(toks_[pos_ + 1])) {
            if (peek().text == "true") { ++pos_; return Predicate{Predicate::Op::True, {}, {}}; }
            if (peek().text == "false") { ++pos_; return Predicate{Predicate::Op::False, {}, {}}; }
        }
        return Predicate{Predicate::Op::Lit, literal(), {}};
    }

    std::string_view text_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Goal parse_goal(std::string_view text) { return detail::ExprParser(text).goal(); }
inline Predicate parse_predicate(std::string_view text) { return detail::ExprParser(text).predicate(); }
inline Effect parse_effect(std::string_view text) { return detail::ExprParser(text).effect(); }

inline Literal parse_literal(std::string_view text) {
    Goal g = parse_goal(text);
    if (g.size() != 1) throw Error(ErrorCode::SchemaViolation, "expected a single literal: '" + std::string(text) + "'");
    return g.front();
}

inline std::string format_predicate(const Predicate& p) {
    switch (p.op) {
        case Predicate::Op::True: return "true";
        case Predicate::Op::False: return "false";
        case Predicate::Op::Lit: return p.literal.to_string();
        case Predicate::Op::Not: return "!(" + format_predicate(p.args.front()) + ")";
        case Predicate::Op::And:
        case Predicate::Op::Or: {
            std::string out = "(";
            for (std::size_t i = 0; i < p.args.size(); ++i) {
                if (i) out += p.op == Predicate::Op::And ? " && " : " || ";
                out += format_predicate(p.args[i]);
            }
            return out + ")";
        }
    }
    return "true";
}

/// Flattens a predicate made only of conjunctions of literals. Returns false
/// (leaving `out` unspecified) when the predicate uses Or/Not/False.
inline bool as_conjunction(const Predicate& p, Goal& out) {
    switch (p.op) {
        case Predicate::Op::True: return true;
        case Predicate::Op::Lit: out.push_back(p.literal); return true;
        case Predicate::Op::And:
            for (const auto& a : p.args)
                if (!as_conjunction(a, out)) return false;
            return true;
        default: return false;
    }
}

}  // namespace btgen
