// SPDX-License-Identifier: Apache-2.0
#include "keysig/sva.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "keysig/lexer.hpp"
#include "keysig/util.hpp"

namespace keysig {

namespace {

bool word_boundary(const std::string& s, std::size_t pos, std::size_t len) {
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    if (pos > 0 && is_word(s[pos - 1]))
        return false;
    std::size_t end = pos + len;
    if (end < s.size() && is_word(s[end]))
        return false;
    return true;
}

// Scans one text body for assert-property statements, copying each out to
// the terminating top-level semicolon.
void scan_body(const std::string& body, std::vector<std::string>& out) {
    std::size_t pos = 0;
    while ((pos = body.find("assert", pos)) != std::string::npos) {
        if (!word_boundary(body, pos, 6)) {
            pos += 6;
            continue;
        }
        std::size_t after = pos + 6;
        while (after < body.size() && std::isspace(static_cast<unsigned char>(body[after])))
            ++after;
        if (body.compare(after, 8, "property") != 0 || !word_boundary(body, after, 8)) {
            pos += 6;
            continue;
        }
        // optional `label :` directly before
        std::size_t start = pos;
        {
            std::size_t p = pos;
            while (p > 0 && std::isspace(static_cast<unsigned char>(body[p - 1])))
                --p;
            if (p > 0 && body[p - 1] == ':') {
                std::size_t colon = p - 1;
                --p;
                while (p > 0 && std::isspace(static_cast<unsigned char>(body[p - 1])))
                    --p;
                std::size_t name_end = p;
                while (p > 0 &&
                       (std::isalnum(static_cast<unsigned char>(body[p - 1])) || body[p - 1] == '_'))
                    --p;
                if (p < name_end && !std::isdigit(static_cast<unsigned char>(body[p])))
                    start = p;
                (void)colon;
            }
        }
        // copy to the first ';' outside parentheses and strings
        int depth = 0;
        bool in_str = false;
        std::size_t end = std::string::npos;
        for (std::size_t i = after; i < body.size(); ++i) {
            char c = body[i];
            if (in_str) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_str = false;
                continue;
            }
            if (c == '"')
                in_str = true;
            else if (c == '(' || c == '[' || c == '{')
                ++depth;
            else if (c == ')' || c == ']' || c == '}')
                --depth;
            else if (c == ';' && depth <= 0) {
                end = i;
                break;
            }
        }
        if (end == std::string::npos)
            break;
        out.push_back(body.substr(start, end - start + 1));
        pos = end + 1;
    }
}

} // namespace

std::vector<std::string> extract_assertions(const std::string& response) {
    std::vector<std::string> out;
    // fenced blocks first
    std::vector<std::string> bodies;
    std::size_t pos = 0;
    while ((pos = response.find("```", pos)) != std::string::npos) {
        std::size_t body_start = response.find('\n', pos + 3);
        if (body_start == std::string::npos)
            break;
        ++body_start;
        std::size_t close = response.find("```", body_start);
        if (close == std::string::npos)
            break;
        bodies.push_back(response.substr(body_start, close - body_start));
        pos = close + 3;
    }
    if (bodies.empty())
        bodies.push_back(response);
    for (const auto& b : bodies)
        scan_body(b, out);
    return out;
}

// ---- subset parser --------------------------------------------------------

namespace {

const std::set<std::string> kPropertyFuncs = {
    "$past",    "$rose",     "$fell",      "$stable", "$changed",  "$sampled",
    "$onehot",  "$onehot0",  "$isunknown", "$countones", "$signed", "$unsigned",
};
const std::set<std::string> kActionTasks = {"$error", "$fatal", "$warning", "$info", "$display"};

class SvaParser {
public:
    SvaParser(std::vector<Token> tokens, const LintContext& ctx)
        : toks_(std::move(tokens)), ctx_(ctx) {}

    LintResult run() {
        try {
            parse_assertion();
        } catch (const LintFailure& f) {
            return {false, f.reason};
        }
        for (const auto& id : referenced_) {
            if (!ctx_.allowed_names.count(id))
                return {false, "references unknown signal '" + id + "'"};
        }
        if (ctx_.require_clocking && !has_clock_)
            return {false, "missing clocking event for a sequential target"};
        return {true, {}};
    }

private:
    struct LintFailure {
        std::string reason;
    };

    [[noreturn]] void fail(const std::string& reason) { throw LintFailure{reason}; }

    // peek clamps to the trailing Eof token, so walking past the end is safe
    const Token& peek() const { return toks_[std::min(pos_, toks_.size() - 1)]; }
    Token consume() {
        Token t = peek();
        ++pos_;
        return t;
    }
    bool accept_op(const std::string& op) {
        if (peek().is_op(op)) {
            consume();
            return true;
        }
        return false;
    }
    bool accept_kw(const std::string& kw) {
        if (peek().is_ident(kw)) {
            consume();
            return true;
        }
        return false;
    }
    void expect_op(const std::string& op) {
        if (!accept_op(op))
            fail("expected '" + op + "' near '" + peek().text + "'");
    }
    void expect_kw(const std::string& kw) {
        if (!accept_kw(kw))
            fail("expected '" + kw + "' near '" + peek().text + "'");
    }

    void note_identifier(const std::string& name) {
        // dotted paths arrive as separate tokens; each segment is checked
        referenced_.insert(name);
    }

    void parse_assertion() {
        // optional label
        if (peek().kind == TokKind::Identifier && !is_verilog_keyword(peek().text)) {
            Token label = consume();
            if (!accept_op(":"))
                fail("unexpected '" + label.text + "' before 'assert'");
        }
        expect_kw("assert");
        expect_kw("property");
        expect_op("(");
        parse_property_header();
        parse_prop(0);
        expect_op(")");
        parse_action();
        expect_op(";");
        if (!peek().is(TokKind::Eof))
            fail("trailing text after assertion");
    }

    void parse_property_header() {
        bool saw_clock = false, saw_disable = false;
        for (;;) {
            if (!saw_clock && peek().is_op("@")) {
                consume();
                expect_op("(");
                if (!accept_kw("posedge") && !accept_kw("negedge"))
                    fail("clocking event must name posedge or negedge");
                parse_prop(4);
                expect_op(")");
                has_clock_ = true;
                saw_clock = true;
                continue;
            }
            if (!saw_disable && peek().is_ident("disable")) {
                consume();
                expect_kw("iff");
                expect_op("(");
                parse_prop(4);
                expect_op(")");
                saw_disable = true;
                continue;
            }
            break;
        }
    }

    void parse_action() {
        // [$task(...)] ['else' $task(...)]
        if (peek().kind == TokKind::SystemIdent)
            parse_action_call();
        if (accept_kw("else"))
            parse_action_call();
    }

    void parse_action_call() {
        Token t = consume();
        if (t.kind != TokKind::SystemIdent || !kActionTasks.count(t.text))
            fail("unsupported action '" + t.text + "'");
        if (accept_op("(")) {
            if (!peek().is_op(")")) {
                do {
                    parse_prop(4);
                } while (accept_op(","));
            }
            expect_op(")");
        }
    }

    // Unified precedence ladder from property implication down to the
    // boolean expression grammar.
    //   0 |-> |=>   1 or   2 and   3 ## concat   4 boolean ladder
    void parse_prop(int level) {
        switch (level) {
        case 0:
            parse_prop(1);
            if (peek().is_op("|->") || peek().is_op("|=>")) {
                consume();
                parse_prop(0);
            }
            return;
        case 1:
            parse_prop(2);
            while (peek().is_ident("or")) {
                consume();
                parse_prop(2);
            }
            return;
        case 2:
            parse_prop(3);
            while (peek().is_ident("and")) {
                consume();
                parse_prop(3);
            }
            return;
        case 3:
            if (peek().is_op("##")) {
                consume();
                parse_delay();
            }
            parse_prop(4);
            while (peek().is_op("##")) {
                consume();
                parse_delay();
                parse_prop(4);
            }
            return;
        default:
            parse_ternary();
            return;
        }
    }

    void parse_delay() {
        if (peek().kind == TokKind::Number) {
            consume();
            return;
        }
        if (accept_op("[")) {
            parse_delay_bound();
            if (accept_op(":"))
                parse_delay_bound();
            expect_op("]");
            return;
        }
        fail("expected delay after '##'");
    }

    void parse_delay_bound() {
        if (peek().kind == TokKind::Number) {
            consume();
            return;
        }
        if (peek().kind == TokKind::SystemIdent && peek().text == "$") {
            consume();
            return;
        }
        fail("expected number or '$' in delay range");
    }

    void parse_ternary() {
        parse_binary(1);
        if (accept_op("?")) {
            parse_ternary();
            expect_op(":");
            parse_ternary();
        }
    }

    static int power(const std::string& op) {
        if (op == "||")
            return 1;
        if (op == "&&")
            return 2;
        if (op == "|")
            return 3;
        if (op == "^" || op == "~^" || op == "^~")
            return 4;
        if (op == "&")
            return 5;
        if (op == "==" || op == "!=" || op == "===" || op == "!==")
            return 6;
        if (op == "<" || op == "<=" || op == ">" || op == ">=")
            return 7;
        if (op == "<<" || op == ">>" || op == "<<<" || op == ">>>")
            return 8;
        if (op == "+" || op == "-")
            return 9;
        if (op == "*" || op == "/" || op == "%")
            return 10;
        return 0;
    }

    void parse_binary(int min_power) {
        parse_unary();
        for (;;) {
            const Token& t = peek();
            if (t.kind != TokKind::Operator)
                return;
            int p = power(t.text);
            if (p == 0 || p < min_power)
                return;
            consume();
            parse_binary(p + 1);
        }
    }

    void parse_unary() {
        const Token& t = peek();
        if (t.kind == TokKind::Operator &&
            (t.text == "!" || t.text == "~" || t.text == "-" || t.text == "+" || t.text == "&" ||
             t.text == "|" || t.text == "^" || t.text == "~&" || t.text == "~|" || t.text == "~^")) {
            consume();
            parse_unary();
            return;
        }
        if (t.is_ident("not")) {
            consume();
            parse_prop(4);
            return;
        }
        parse_primary();
    }

    void parse_primary() {
        Token t = consume();
        switch (t.kind) {
        case TokKind::Number:
        case TokKind::String:
            break;
        case TokKind::SystemIdent:
            if (!kPropertyFuncs.count(t.text))
                fail("unsupported system function '" + t.text + "'");
            if (accept_op("(")) {
                if (!peek().is_op(")")) {
                    do {
                        parse_prop(4);
                    } while (accept_op(","));
                }
                expect_op(")");
            }
            break;
        case TokKind::Identifier: {
            if (is_verilog_keyword(t.text))
                fail("unexpected keyword '" + t.text + "'");
            note_identifier(t.text);
            // dotted path segments
            while (peek().is_op(".")) {
                consume();
                Token seg = consume();
                if (seg.kind != TokKind::Identifier || is_verilog_keyword(seg.text))
                    fail("malformed hierarchical reference");
                note_identifier(seg.text);
            }
            parse_selects();
            break;
        }
        case TokKind::Operator:
            if (t.text == "(") {
                parse_prop(0);
                expect_op(")");
                parse_repetition();
                break;
            }
            if (t.text == "{") {
                do {
                    parse_prop(4);
                } while (accept_op(","));
                expect_op("}");
                break;
            }
            fail("unexpected '" + t.text + "'");
        default:
            fail("unexpected end of assertion");
        }
        parse_repetition();
    }

    void parse_selects() {
        while (peek().is_op("[")) {
            // distinguish repetition [*...] / [->...] / [=...] from a select
            const Token& next = toks_[std::min(pos_ + 1, toks_.size() - 1)];
            if (next.is_op("*") || next.is_op("->") || next.is_op("="))
                return;
            consume();
            parse_prop(4);
            if (accept_op(":") || accept_op("+:") || accept_op("-:"))
                parse_prop(4);
            expect_op("]");
        }
    }

    void parse_repetition() {
        if (!peek().is_op("["))
            return;
        const Token& next = toks_[std::min(pos_ + 1, toks_.size() - 1)];
        if (!(next.is_op("*") || next.is_op("->") || next.is_op("=")))
            return;
        consume(); // [
        consume(); // * -> =
        if (!peek().is_op("]")) {
            parse_delay_bound();
            if (accept_op(":"))
                parse_delay_bound();
        }
        expect_op("]");
    }

    std::vector<Token> toks_;
    const LintContext& ctx_;
    std::size_t pos_ = 0;
    bool has_clock_ = false;
    std::set<std::string> referenced_;
};

LintResult run_external(const std::string& assertion, const std::string& cmd_template) {
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() /
                   ("keysig_sva_" + fnv1a_hex(assertion).substr(8) + ".sv");
    {
        std::ofstream out(tmp, std::ios::binary);
        out << assertion << "\n";
    }
    std::string cmd = cmd_template;
    const std::string placeholder = "{file}";
    for (std::size_t pos = 0; (pos = cmd.find(placeholder, pos)) != std::string::npos;) {
        cmd.replace(pos, placeholder.size(), tmp.string());
        pos += tmp.string().size();
    }
    int rc = std::system(cmd.c_str());
    std::error_code ec;
    fs::remove(tmp, ec);
    if (rc == 0)
        return {true, {}};
    return {false, "external verifier rejected the assertion (command '" + cmd_template + "')"};
}

} // namespace

LintResult lint_assertion(const std::string& assertion, const LintContext& ctx) {
    if (!ctx.external_command.empty())
        return run_external(assertion, ctx.external_command);

    SourceManager sm;
    std::uint32_t id;
    std::vector<Token> tokens;
    try {
        id = sm.add_virtual("<assertion>", assertion);
        tokens = lex_file(sm, id);
    } catch (const ParseError& e) {
        return {false, std::string("cannot tokenize assertion: ") + e.diagnostic.message};
    }
    SvaParser parser(std::move(tokens), ctx);
    return parser.run();
}

} // namespace keysig
