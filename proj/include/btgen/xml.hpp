#pragma once

// BT XML dialect.
//
//   <Fallback|Sequence instance_name="..."> children </...>
//   <Parallel instance_name="..." threshold="M"> children </Parallel>
//   <Condition|Action instance_name="..." [binding="..."] />
//   <Open instance_name="..." subgoal="goal" [description="..."] [context="goal"] />
//
// A leaf without a binding attribute binds the node definition named by its
// instance_name. The parser accepts either quote style and whitespace around
// '='; the serializer always emits the canonical form.

#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "btgen/error.hpp"
#include "btgen/tree.hpp"

namespace btgen {

namespace detail {

class XmlParser {
public:
    explicit XmlParser(std::string_view text) : s_(text) {}

    BehaviorTree parse() {
        if (s_.substr(0, 3) == "\xEF\xBB\xBF") advance(3);
        skip_misc(true);
        if (eof()) fail(ErrorCode::MalformedXml, "document has no root element");
        BTNode root = element(0);
        skip_misc(false);
        if (!eof()) fail(ErrorCode::MalformedXml, "content after the root element");
        return BehaviorTree(std::move(root));
    }

private:
    static constexpr int kMaxNesting = 256;

    bool eof() const { return pos_ >= s_.size(); }
    char cur() const { return eof() ? '\0' : s_[pos_]; }
    bool starts_with(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && !eof(); ++i) {
            if (s_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    [[noreturn]] void fail(ErrorCode code, const std::string& msg) const { throw Error(code, msg, {line_, col_}); }
    [[noreturn]] void fail_at(ErrorCode code, const std::string& msg, SourceLocation loc) const {
        throw Error(code, msg, loc);
    }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(cur()))) advance();
    }

    // Whitespace, comments, and (before the root only) processing instructions.
    void skip_misc(bool allow_pi) {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                const auto end = s_.find("-->", pos_ + 4);
                if (end == std::string_view::npos) fail(ErrorCode::MalformedXml, "unterminated comment");
                advance(end + 3 - pos_);
            } else if (allow_pi && starts_with("<?")) {
                const auto end = s_.find("?>", pos_ + 2);
                if (end == std::string_view::npos) fail(ErrorCode::MalformedXml, "unterminated processing instruction");
                advance(end + 2 - pos_);
            } else {
                return;
            }
        }
    }

    static bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':'; }
    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.';
    }

    std::string name() {
        if (!name_start(cur())) fail(ErrorCode::MalformedXml, "expected a name");
        const std::size_t start = pos_;
        while (!eof() && name_char(cur())) advance();
        return std::string(s_.substr(start, pos_ - start));
    }

    std::string decode_entities(std::string_view raw, SourceLocation loc) const {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const char c = raw[i];
            if (c == '<') fail_at(ErrorCode::MalformedXml, "'<' inside attribute value", loc);
            if (c != '&') {
                out.push_back(c);
                continue;
            }
            const auto semi = raw.find(';', i);
            if (semi == std::string_view::npos) fail_at(ErrorCode::MalformedXml, "unterminated entity", loc);
            const std::string_view ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") out.push_back('&');
            else if (ent == "lt") out.push_back('<');
            else if (ent == "gt") out.push_back('>');
            else if (ent == "quot") out.push_back('"');
            else if (ent == "apos") out.push_back('\'');
            else if (ent.size() > 1 && ent[0] == '#') {
                unsigned long cp = 0;
                const bool hex = ent[1] == 'x' || ent[1] == 'X';
                const std::string_view digits = ent.substr(hex ? 2 : 1);
                auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
                if (digits.empty() || ec != std::errc{} || p != digits.data() + digits.size() || cp == 0 ||
                    cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
                    fail_at(ErrorCode::MalformedXml, "invalid character reference '&" + std::string(ent) + ";'", loc);
                append_utf8(out, static_cast<char32_t>(cp));
            } else {
                fail_at(ErrorCode::MalformedXml, "unknown entity '&" + std::string(ent) + ";'", loc);
            }
            i = semi;
        }
        return out;
    }

    static void append_utf8(std::string& out, char32_t cp) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }

    struct Attr {
        std::string value;
        SourceLocation loc;
    };

    BTNode element(int nesting) {
        if (nesting > kMaxNesting) fail(ErrorCode::MalformedXml, "elements nested too deeply");
        const SourceLocation open_loc{line_, col_};
        if (cur() != '<') fail(ErrorCode::MalformedXml, "expected '<'");
        advance();
        const std::string tag = name();
        const auto kind = node_kind_from_string(tag);
        if (!kind) fail_at(ErrorCode::UnknownElement, "unknown element <" + tag + ">", open_loc);

        std::map<std::string, Attr> attrs;
        bool self_closing = false;
        for (;;) {
            const bool had_ws = !eof() && std::isspace(static_cast<unsigned char>(cur()));
            skip_ws();
            if (eof()) fail(ErrorCode::MalformedXml, "unterminated start tag <" + tag + ">");
            if (starts_with("/>")) {
                advance(2);
                self_closing = true;
                break;
            }
            if (cur() == '>') {
                advance();
                break;
            }
            if (!had_ws) fail(ErrorCode::MalformedXml, "expected whitespace before attribute");
            const SourceLocation attr_loc{line_, col_};
            const std::string key = name();
            skip_ws();
            if (cur() != '=') fail(ErrorCode::MalformedXml, "expected '=' after attribute '" + key + "'");
            advance();
            skip_ws();
            const char quote = cur();
            if (quote != '"' && quote != '\'') fail(ErrorCode::MalformedXml, "expected quoted attribute value");
            advance();
            const std::size_t start = pos_;
            while (!eof() && cur() != quote) advance();
            if (eof()) fail_at(ErrorCode::MalformedXml, "unterminated attribute value", attr_loc);
            const std::string value = decode_entities(s_.substr(start, pos_ - start), attr_loc);
            advance();
            if (!attrs.emplace(key, Attr{value, attr_loc}).second)
                fail_at(ErrorCode::MalformedXml, "duplicate attribute '" + key + "'", attr_loc);
        }

        BTNode node = node_from_attrs(*kind, tag, attrs, open_loc);

        if (!self_closing) {
            for (;;) {
                skip_misc(false);
                if (eof()) fail_at(ErrorCode::MalformedXml, "element <" + tag + "> is never closed", open_loc);
                if (starts_with("</")) {
                    advance(2);
                    const std::string close = name();
                    skip_ws();
                    if (cur() != '>') fail(ErrorCode::MalformedXml, "expected '>' in end tag");
                    advance();
                    if (close != tag)
                        fail(ErrorCode::MalformedXml, "end tag </" + close + "> does not match <" + tag + ">");
                    break;
                }
                if (cur() == '<') {
                    node.children.push_back(element(nesting + 1));
                    continue;
                }
                fail(ErrorCode::MalformedXml, "unexpected text content");
            }
        }
        if (!names_.insert(node.instance_name).second)
            fail_at(ErrorCode::DuplicateInstanceName, "duplicate instance_name '" + node.instance_name + "'",
                    open_loc);
        return node;
    }

    BTNode node_from_attrs(NodeKind kind, const std::string& tag, std::map<std::string, Attr>& attrs,
                           SourceLocation loc) const {
        std::set<std::string> allowed = {"instance_name"};
        if (kind == NodeKind::Parallel) allowed.insert("threshold");
        if (is_leaf(kind)) allowed.insert("binding");
        if (kind == NodeKind::Open) allowed.insert({"subgoal", "description", "context"});
        for (const auto& [key, attr] : attrs)
            if (!allowed.contains(key))
                fail_at(ErrorCode::MalformedXml, "attribute '" + key + "' is not allowed on <" + tag + ">", attr.loc);

        BTNode node;
        node.kind = kind;
        auto it = attrs.find("instance_name");
        if (it == attrs.end()) fail_at(ErrorCode::MissingAttribute, "<" + tag + "> has no instance_name", loc);
        node.instance_name = it->second.value;

        if (kind == NodeKind::Parallel) {
            auto t = attrs.find("threshold");
            if (t == attrs.end()) fail_at(ErrorCode::MissingAttribute, "<Parallel> has no threshold", loc);
            const std::string& v = t->second.value;
            int m = 0;
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), m);
            if (v.empty() || ec != std::errc{} || p != v.data() + v.size() || m < 1)
                fail_at(ErrorCode::MalformedXml, "threshold must be a positive integer", t->second.loc);
            node.threshold = m;
        }
        if (is_leaf(kind)) {
            auto b = attrs.find("binding");
            node.binding = b == attrs.end() ? node.instance_name : b->second.value;
        }
        if (kind == NodeKind::Open) {
            auto g = attrs.find("subgoal");
            if (g == attrs.end()) fail_at(ErrorCode::MissingAttribute, "<Open> has no subgoal", loc);
            try {
                node.subgoal.goal = parse_goal(g->second.value);
                if (auto c = attrs.find("context"); c != attrs.end()) node.subgoal.context = parse_goal(c->second.value);
            } catch (const Error& e) {
                fail_at(ErrorCode::MalformedXml, "bad goal expression: " + e.detail(), g->second.loc);
            }
            if (auto d = attrs.find("description"); d != attrs.end()) node.subgoal.description = d->second.value;
        }
        return node;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::set<std::string> names_;
};

inline void escape_attr(std::string& out, std::string_view v) {
    for (char c : v) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\n': out += "&#10;"; break;
            case '\r': out += "&#13;"; break;
            case '\t': out += "&#9;"; break;
            default: out.push_back(c);
        }
    }
}

inline void serialize_node(std::string& out, const BTNode& n, int indent) {
    out.append(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string_view tag = to_string(n.kind);
    out += '<';
    out += tag;
    auto attr = [&](std::string_view key, std::string_view value) {
        out += ' ';
        out += key;
        out += "=\"";
        escape_attr(out, value);
        out += '"';
    };
    attr("instance_name", n.instance_name);
    if (n.kind == NodeKind::Parallel) attr("threshold", std::to_string(n.threshold));
    if (is_leaf(n.kind) && n.binding != n.instance_name) attr("binding", n.binding);
    if (n.kind == NodeKind::Open) {
        attr("subgoal", format_goal(n.subgoal.goal));
        if (!n.subgoal.description.empty()) attr("description", n.subgoal.description);
        if (!n.subgoal.context.empty()) attr("context", format_goal(n.subgoal.context));
    }
    if (n.children.empty()) {
        out += " />\n";
        return;
    }
    out += ">\n";
    for (const auto& c : n.children) serialize_node(out, c, indent + 1);
    out.append(static_cast<std::size_t>(indent) * 2, ' ');
    out += "</";
    out += tag;
    out += ">\n";
}

}  // namespace detail

/// Parses the BT XML dialect. Throws Error with a line/column location.
inline BehaviorTree parse_bt_xml(std::string_view text) { return detail::XmlParser(text).parse(); }

/// Canonical form: double quotes, two-space indent, self-closing leaves, LF endings.
inline std::string serialize_bt_xml(const BehaviorTree& tree) {
    std::string out;
    detail::serialize_node(out, tree.root(), 0);
    return out;
}

}  // namespace btgen
