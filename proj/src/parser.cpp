// SPDX-License-Identifier: Apache-2.0
#include "keysig/parser.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <unordered_map>

#include "keysig/util.hpp"

namespace keysig {

namespace {

// Binding powers for the Verilog binary operator ladder.
int binary_power(const std::string& op) {
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
    if (op == "**")
        return 11;
    return 0;
}

bool is_unary_op(const std::string& op) {
    return op == "+" || op == "-" || op == "!" || op == "~" || op == "&" || op == "|" || op == "^" ||
           op == "~&" || op == "~|" || op == "~^" || op == "^~";
}

// Token stream with an include stack.
class TokenCursor {
public:
    TokenCursor(SourceManager& sm, DiagnosticEngine& diags) : sm_(sm), diags_(diags) {}

    void push_file(std::uint32_t file_id) {
        frames_.push_back(Frame{lex_file(sm_, file_id), 0, file_id});
        if (frames_.size() > 16)
            fail(peek_raw().span, "include nesting too deep");
    }

    const Token& peek() {
        resolve_directives();
        return peek_raw();
    }

    Token consume() {
        resolve_directives();
        Token t = peek_raw();
        if (t.kind != TokKind::Eof)
            ++frames_.back().pos;
        // pop exhausted include frames so Eof means end of the root file
        while (frames_.size() > 1 && peek_raw().kind == TokKind::Eof)
            frames_.pop_back();
        return t;
    }

    [[noreturn]] void fail(SourceSpan span, const std::string& msg, bool unsupported = false) {
        auto [line, col] = sm_.line_col(span.file, span.begin);
        Diagnostic d{Severity::Error, sm_.file(span.file).path, line, col, msg};
        if (unsupported)
            throw UnsupportedConstruct(std::move(d));
        throw SyntaxError(std::move(d));
    }

    SourceManager& sources() { return sm_; }

private:
    struct Frame {
        std::vector<Token> tokens;
        std::size_t pos;
        std::uint32_t file_id;
    };

    const Token& peek_raw() const {
        const Frame& f = frames_.back();
        return f.tokens[std::min(f.pos, f.tokens.size() - 1)];
    }

    void resolve_directives() {
        for (;;) {
            while (frames_.size() > 1 && peek_raw().kind == TokKind::Eof)
                frames_.pop_back();
            const Token& t = peek_raw();
            if (t.kind != TokKind::Directive)
                return;
            if (t.text == "`include") {
                SourceSpan dspan = t.span;
                ++frames_.back().pos;
                const Token& name = peek_raw();
                if (name.kind != TokKind::String)
                    fail(dspan, "`include expects a quoted file name");
                std::string fname = name.text.substr(1, name.text.size() - 2);
                ++frames_.back().pos;
                namespace fs = std::filesystem;
                fs::path base = fs::path(sm_.file(frames_.back().file_id).path).parent_path();
                fs::path full = base / fname;
                std::uint32_t id;
                try {
                    id = sm_.load(full.string());
                } catch (const IoError& e) {
                    fail(dspan, e.what());
                }
                push_file(id);
            } else {
                fail(t.span, "unsupported compiler directive '" + t.text + "'", true);
            }
        }
    }

    SourceManager& sm_;
    DiagnosticEngine& diags_;
    std::vector<Frame> frames_;
};

class Parser {
public:
    Parser(TokenCursor& cur) : cur_(cur) {}

    Ast parse_translation_unit() {
        Ast ast;
        while (!cur_.peek().is(TokKind::Eof)) {
            const Token& t = cur_.peek();
            if (t.is_ident("module")) {
                ast.modules.push_back(parse_module());
            } else {
                reject_unsupported_top(t);
                cur_.fail(t.span, "expected 'module', found '" + t.text + "'");
            }
        }
        return ast;
    }

    StmtPtr parse_statement_entry() { return parse_statement(); }
    std::unique_ptr<Item> parse_item_entry() {
        auto item = std::make_unique<Item>(parse_item());
        return item;
    }

private:
    TokenCursor& cur_;

    // ---- small helpers ----

    Token expect_op(const std::string& op) {
        Token t = cur_.consume();
        if (!t.is_op(op))
            cur_.fail(t.span, "expected '" + op + "', found '" + describe(t) + "'");
        return t;
    }

    Token expect_keyword(const std::string& kw) {
        Token t = cur_.consume();
        if (!t.is_ident(kw))
            cur_.fail(t.span, "expected '" + kw + "', found '" + describe(t) + "'");
        return t;
    }

    Token expect_name(const char* what) {
        Token t = cur_.consume();
        if (!t.is(TokKind::Identifier) || is_verilog_keyword(t.text))
            cur_.fail(t.span, std::string("expected ") + what + ", found '" + describe(t) + "'");
        return t;
    }

    static std::string describe(const Token& t) {
        if (t.kind == TokKind::Eof)
            return "end of file";
        return t.text;
    }

    bool peek_op(const std::string& op) { return cur_.peek().is_op(op); }
    bool peek_kw(const std::string& kw) { return cur_.peek().is_ident(kw); }

    bool accept_op(const std::string& op) {
        if (peek_op(op)) {
            cur_.consume();
            return true;
        }
        return false;
    }
    bool accept_kw(const std::string& kw) {
        if (peek_kw(kw)) {
            cur_.consume();
            return true;
        }
        return false;
    }

    void reject_unsupported_top(const Token& t) {
        static const std::set<std::string> unsupported = {"primitive", "config", "library", "macromodule"};
        if (t.kind == TokKind::Identifier && unsupported.count(t.text))
            cur_.fail(t.span, "unsupported construct '" + t.text + "'", true);
    }

    [[noreturn]] void unsupported(const Token& t, const std::string& what) {
        cur_.fail(t.span, "unsupported construct: " + what, true);
    }

    // ---- expressions ----

    ExprPtr parse_expression() { return parse_ternary(); }

    ExprPtr parse_ternary() {
        ExprPtr cond = parse_binary(1);
        if (accept_op("?")) {
            ExprPtr then_e = parse_expression();
            expect_op(":");
            ExprPtr else_e = parse_expression();
            auto e = Expr::make(ExprKind::Ternary, cond->span, "?:");
            e->span.end = else_e->span.end;
            e->operands.push_back(std::move(cond));
            e->operands.push_back(std::move(then_e));
            e->operands.push_back(std::move(else_e));
            return e;
        }
        return cond;
    }

    ExprPtr parse_binary(int min_power) {
        ExprPtr lhs = parse_unary();
        for (;;) {
            const Token& t = cur_.peek();
            if (t.kind != TokKind::Operator)
                break;
            int power = binary_power(t.text);
            if (power < min_power || power == 0)
                break;
            std::string op = t.text;
            cur_.consume();
            ExprPtr rhs = parse_binary(power + 1); // left-associative
            auto e = Expr::make(ExprKind::Binary, lhs->span, op);
            e->span.end = rhs->span.end;
            e->operands.push_back(std::move(lhs));
            e->operands.push_back(std::move(rhs));
            lhs = std::move(e);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        const Token& t = cur_.peek();
        if (t.kind == TokKind::Operator && is_unary_op(t.text)) {
            Token op = cur_.consume();
            ExprPtr operand = parse_unary();
            auto e = Expr::make(ExprKind::Unary, op.span, op.text);
            e->span.end = operand->span.end;
            e->operands.push_back(std::move(operand));
            return e;
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        Token t = cur_.consume();
        switch (t.kind) {
        case TokKind::Number:
            return Expr::make(ExprKind::Number, t.span, t.text);
        case TokKind::String:
            return Expr::make(ExprKind::String, t.span, t.text);
        case TokKind::SystemIdent:
            unsupported(t, "system function call '" + t.text + "'");
        case TokKind::Identifier: {
            if (is_verilog_keyword(t.text))
                cur_.fail(t.span, "unexpected keyword '" + t.text + "' in expression");
            ExprPtr e = Expr::make(ExprKind::Identifier, t.span, t.text);
            return parse_selects(std::move(e));
        }
        case TokKind::Operator:
            if (t.text == "(") {
                ExprPtr inner = parse_expression();
                Token close = expect_op(")");
                inner->span.begin = t.span.begin;
                inner->span.end = close.span.end;
                return inner;
            }
            if (t.text == "{")
                return parse_concat(t);
            break;
        default:
            break;
        }
        cur_.fail(t.span, "expected expression, found '" + describe(t) + "'");
    }

    // base[...] chains; each select wraps the previous expression.
    ExprPtr parse_selects(ExprPtr base) {
        while (peek_op("[")) {
            Token open = cur_.consume();
            ExprPtr first = parse_expression();
            if (accept_op(":")) {
                ExprPtr lsb = parse_expression();
                Token close = expect_op("]");
                auto e = Expr::make(ExprKind::PartSelect, base->span);
                e->part_kind = PartSelectKind::Range;
                e->span.end = close.span.end;
                e->operands.push_back(std::move(base));
                e->operands.push_back(std::move(first));
                e->operands.push_back(std::move(lsb));
                base = std::move(e);
            } else if (peek_op("+:") || peek_op("-:")) {
                Token k = cur_.consume();
                ExprPtr width = parse_expression();
                Token close = expect_op("]");
                auto e = Expr::make(ExprKind::PartSelect, base->span);
                e->part_kind = k.text == "+:" ? PartSelectKind::IndexedUp : PartSelectKind::IndexedDown;
                e->span.end = close.span.end;
                e->operands.push_back(std::move(base));
                e->operands.push_back(std::move(first));
                e->operands.push_back(std::move(width));
                base = std::move(e);
            } else {
                Token close = expect_op("]");
                auto e = Expr::make(ExprKind::Select, base->span);
                e->span.end = close.span.end;
                e->operands.push_back(std::move(base));
                e->operands.push_back(std::move(first));
                base = std::move(e);
            }
            (void)open;
        }
        return base;
    }

    ExprPtr parse_concat(const Token& open) {
        // {expr, expr, ...} or {count{...}}
        ExprPtr first = parse_expression();
        if (peek_op("{")) {
            Token inner_open = cur_.consume();
            ExprPtr inner = parse_concat(inner_open);
            Token close = expect_op("}");
            auto e = Expr::make(ExprKind::Repeat, open.span);
            e->span.end = close.span.end;
            e->operands.push_back(std::move(first));
            e->operands.push_back(std::move(inner));
            return e;
        }
        auto e = Expr::make(ExprKind::Concat, open.span);
        e->operands.push_back(std::move(first));
        while (accept_op(","))
            e->operands.push_back(parse_expression());
        Token close = expect_op("}");
        e->span.end = close.span.end;
        return e;
    }

    // lvalue: identifier with selects, or concat of lvalues
    ExprPtr parse_lvalue() {
        if (peek_op("{")) {
            Token open = cur_.consume();
            auto e = Expr::make(ExprKind::Concat, open.span);
            e->operands.push_back(parse_lvalue());
            while (accept_op(","))
                e->operands.push_back(parse_lvalue());
            Token close = expect_op("}");
            e->span.end = close.span.end;
            return e;
        }
        Token name = expect_name("assignment target");
        ExprPtr e = Expr::make(ExprKind::Identifier, name.span, name.text);
        return parse_selects(std::move(e));
    }

    // ---- statements ----

    StmtPtr parse_statement() {
        const Token& t = cur_.peek();
        if (t.is(TokKind::Eof))
            cur_.fail(t.span, "expected statement, found end of file");

        if (t.is_ident("begin"))
            return parse_block();
        if (t.is_ident("if"))
            return parse_if();
        if (t.is_ident("case") || t.is_ident("casex") || t.is_ident("casez"))
            return parse_case();
        if (t.is_ident("for"))
            return parse_for();
        if (t.is_op(";")) {
            Token semi = cur_.consume();
            return Stmt::make(StmtKind::Null, semi.span);
        }
        if (t.is(TokKind::SystemIdent))
            unsupported(t, "system task '" + t.text + "'");
        if (t.is(TokKind::Identifier) && is_verilog_keyword(t.text) && !t.is_ident("begin")) {
            static const std::set<std::string> rejected = {"while", "repeat",  "forever", "wait",
                                                           "fork",  "disable", "deassign", "force",
                                                           "release"};
            if (rejected.count(t.text))
                unsupported(t, "'" + t.text + "' statement");
        }
        return parse_assignment_stmt();
    }

    StmtPtr parse_block() {
        Token open = expect_keyword("begin");
        auto s = Stmt::make(StmtKind::Block, open.span);
        if (accept_op(":")) {
            Token label = expect_name("block label");
            s->label = label.text;
        }
        while (!peek_kw("end")) {
            if (cur_.peek().is(TokKind::Eof))
                cur_.fail(cur_.peek().span, "unterminated begin/end block");
            s->stmts.push_back(parse_statement());
        }
        Token close = expect_keyword("end");
        s->span.end = close.span.end;
        return s;
    }

    StmtPtr parse_if() {
        Token kw = expect_keyword("if");
        auto s = Stmt::make(StmtKind::If, kw.span);
        expect_op("(");
        s->cond = parse_expression();
        expect_op(")");
        s->then_branch = parse_statement();
        s->span.end = s->then_branch->span.end;
        if (accept_kw("else")) {
            s->else_branch = parse_statement();
            s->span.end = s->else_branch->span.end;
        }
        return s;
    }

    StmtPtr parse_case() {
        Token kw = cur_.consume();
        auto s = Stmt::make(StmtKind::Case, kw.span);
        s->case_kind = kw.text == "case" ? CaseKind::Case : kw.text == "casex" ? CaseKind::Casex : CaseKind::Casez;
        expect_op("(");
        s->cond = parse_expression();
        expect_op(")");
        while (!peek_kw("endcase")) {
            if (cur_.peek().is(TokKind::Eof))
                cur_.fail(cur_.peek().span, "unterminated case statement");
            CaseItem item;
            item.span = cur_.peek().span;
            if (accept_kw("default")) {
                accept_op(":");
            } else {
                item.labels.push_back(parse_expression());
                while (accept_op(","))
                    item.labels.push_back(parse_expression());
                expect_op(":");
            }
            item.body = parse_statement();
            item.span.end = item.body->span.end;
            s->items.push_back(std::move(item));
        }
        Token close = expect_keyword("endcase");
        s->span.end = close.span.end;
        return s;
    }

    StmtPtr parse_for() {
        Token kw = expect_keyword("for");
        auto s = Stmt::make(StmtKind::For, kw.span);
        expect_op("(");
        s->init = parse_plain_assign();
        expect_op(";");
        s->cond = parse_expression();
        expect_op(";");
        s->step = parse_plain_assign();
        expect_op(")");
        s->body = parse_statement();
        s->span.end = s->body->span.end;
        return s;
    }

    // `i = expr` without the trailing semicolon (for-loop header slots)
    StmtPtr parse_plain_assign() {
        ExprPtr lhs = parse_lvalue();
        Token eq = cur_.consume();
        if (!eq.is_op("="))
            cur_.fail(eq.span, "expected '=' in for-loop assignment");
        ExprPtr rhs = parse_expression();
        auto s = Stmt::make(StmtKind::Blocking, lhs->span);
        s->span.end = rhs->span.end;
        s->lhs = std::move(lhs);
        s->rhs = std::move(rhs);
        return s;
    }

    StmtPtr parse_assignment_stmt() {
        ExprPtr lhs = parse_lvalue();
        Token op = cur_.consume();
        StmtKind kind;
        if (op.is_op("="))
            kind = StmtKind::Blocking;
        else if (op.is_op("<="))
            kind = StmtKind::Nonblocking;
        else
            cur_.fail(op.span, "expected '=' or '<=', found '" + describe(op) + "'");
        if (peek_op("#"))
            unsupported(cur_.peek(), "intra-assignment delay");
        ExprPtr rhs = parse_expression();
        Token semi = expect_op(";");
        auto s = Stmt::make(kind, lhs->span);
        s->span.begin = lhs->span.begin;
        s->span.end = semi.span.end;
        s->lhs = std::move(lhs);
        s->rhs = std::move(rhs);
        return s;
    }

    // ---- module level ----

    ModuleDecl parse_module() {
        Token kw = expect_keyword("module");
        ModuleDecl m;
        m.span = kw.span;
        m.header_span = kw.span;
        Token name = expect_name("module name");
        m.name = name.text;

        if (accept_op("#")) {
            expect_op("(");
            parse_header_params(m);
            expect_op(")");
        }

        if (accept_op("(")) {
            if (!peek_op(")"))
                parse_port_list(m);
            expect_op(")");
        }
        Token semi = expect_op(";");
        m.header_span.end = semi.span.end;

        while (!peek_kw("endmodule")) {
            if (cur_.peek().is(TokKind::Eof))
                cur_.fail(cur_.peek().span, "missing 'endmodule'");
            m.items.push_back(parse_item());
        }
        Token end = expect_keyword("endmodule");
        m.span.end = end.span.end;
        return m;
    }

    // module m #(parameter W = 8, D = 4) (...); the keyword may repeat
    void parse_header_params(ModuleDecl& m) {
        bool first = true;
        do {
            Token start = cur_.peek();
            if (first)
                expect_keyword("parameter");
            else
                accept_kw("parameter");
            first = false;
            Item item;
            item.kind = ItemKind::ParamDecl;
            item.in_header = true;
            item.span = start.span;
            if (peek_op("["))
                item.range = parse_range();
            Token name = expect_name("parameter name");
            expect_op("=");
            Declarator d;
            d.name = name.text;
            d.span = name.span;
            d.init = parse_expression();
            item.span.end = d.init->span.end;
            item.decls.push_back(std::move(d));
            m.items.push_back(std::move(item));
        } while (accept_op(","));
    }

    void parse_port_list(ModuleDecl& m) {
        const Token& first = cur_.peek();
        bool ansi = first.is_ident("input") || first.is_ident("output") || first.is_ident("inout");
        m.ansi_ports = ansi;
        if (!ansi) {
            do {
                Token name = expect_name("port name");
                Port p;
                p.name = name.text;
                p.span = name.span;
                m.ports.push_back(std::move(p));
            } while (accept_op(","));
            return;
        }
        // ANSI: direction [reg] [signed] [range] name {, [direction ...] name}
        PortDir dir = PortDir::Input;
        bool is_reg = false;
        bool is_signed = false;
        std::optional<Range> range;
        bool have_dir = false;
        do {
            const Token& t = cur_.peek();
            if (t.is_ident("input") || t.is_ident("output") || t.is_ident("inout")) {
                Token d = cur_.consume();
                dir = d.text == "input" ? PortDir::Input : d.text == "output" ? PortDir::Output : PortDir::Inout;
                is_reg = accept_kw("reg");
                if (!is_reg)
                    accept_kw("wire");
                is_signed = accept_kw("signed");
                range.reset();
                if (peek_op("["))
                    range = parse_range();
                have_dir = true;
            }
            if (!have_dir)
                cur_.fail(cur_.peek().span, "expected port direction");
            Token name = expect_name("port name");
            Port p;
            p.name = name.text;
            p.dir = dir;
            p.is_reg = is_reg;
            p.is_signed = is_signed;
            if (range)
                p.range = clone_range(*range);
            p.span = name.span;
            m.ports.push_back(std::move(p));
        } while (accept_op(","));
    }

    Range parse_range() {
        expect_op("[");
        Range r;
        r.msb = parse_expression();
        expect_op(":");
        r.lsb = parse_expression();
        expect_op("]");
        return r;
    }

    static ExprPtr clone_expr(const Expr& e) {
        auto c = Expr::make(e.kind, e.span, e.text);
        c->part_kind = e.part_kind;
        for (const auto& op : e.operands)
            c->operands.push_back(clone_expr(*op));
        return c;
    }
    static Range clone_range(const Range& r) {
        Range c;
        c.msb = clone_expr(*r.msb);
        c.lsb = clone_expr(*r.lsb);
        return c;
    }

    Item parse_item() {
        const Token& t = cur_.peek();
        if (t.is_ident("wire") || t.is_ident("reg") || t.is_ident("integer"))
            return parse_net_decl();
        if (t.is_ident("parameter") || t.is_ident("localparam"))
            return parse_param_decl();
        if (t.is_ident("input") || t.is_ident("output") || t.is_ident("inout"))
            return parse_port_decl();
        if (t.is_ident("assign"))
            return parse_continuous_assign();
        if (t.is_ident("always"))
            return parse_always();
        if (t.is(TokKind::Identifier) && is_verilog_keyword(t.text)) {
            static const std::set<std::string> rejected = {
                "generate", "genvar", "function", "task", "initial", "specify",
                "defparam", "real",   "time",     "event", "tri",    "supply0",
                "supply1",  "endgenerate"};
            if (rejected.count(t.text))
                unsupported(t, "'" + t.text + "'");
            cur_.fail(t.span, "unexpected '" + t.text + "'");
        }
        if (t.is(TokKind::Identifier))
            return parse_instantiation();
        cur_.fail(t.span, "expected module item, found '" + describe(t) + "'");
    }

    Item parse_net_decl() {
        Token kw = cur_.consume();
        Item item;
        item.kind = ItemKind::NetDecl;
        item.span = kw.span;
        item.net_kind = kw.text == "wire" ? NetKind::Wire : kw.text == "reg" ? NetKind::Reg : NetKind::Integer;
        item.is_signed = accept_kw("signed");
        if (peek_op("["))
            item.range = parse_range();
        do {
            Token name = expect_name("signal name");
            Declarator d;
            d.name = name.text;
            d.span = name.span;
            if (peek_op("[")) {
                // memory dimension: reg [7:0] mem [0:15]; dimension kept as a range
                parse_range();
            }
            if (accept_op("="))
                d.init = parse_expression();
            item.decls.push_back(std::move(d));
        } while (accept_op(","));
        Token semi = expect_op(";");
        item.span.end = semi.span.end;
        return item;
    }

    Item parse_param_decl() {
        Token kw = cur_.consume();
        Item item;
        item.kind = ItemKind::ParamDecl;
        item.span = kw.span;
        item.localparam = kw.text == "localparam";
        if (accept_kw("signed"))
            item.is_signed = true;
        if (peek_op("["))
            item.range = parse_range();
        do {
            Token name = expect_name("parameter name");
            expect_op("=");
            Declarator d;
            d.name = name.text;
            d.span = name.span;
            d.init = parse_expression();
            item.decls.push_back(std::move(d));
        } while (accept_op(","));
        Token semi = expect_op(";");
        item.span.end = semi.span.end;
        return item;
    }

    Item parse_port_decl() {
        Token kw = cur_.consume();
        Item item;
        item.kind = ItemKind::PortDecl;
        item.span = kw.span;
        item.dir = kw.text == "input" ? PortDir::Input : kw.text == "output" ? PortDir::Output : PortDir::Inout;
        item.port_reg = accept_kw("reg");
        if (!item.port_reg)
            accept_kw("wire");
        item.is_signed = accept_kw("signed");
        if (peek_op("["))
            item.range = parse_range();
        do {
            Token name = expect_name("port name");
            Declarator d;
            d.name = name.text;
            d.span = name.span;
            item.decls.push_back(std::move(d));
        } while (accept_op(","));
        Token semi = expect_op(";");
        item.span.end = semi.span.end;
        return item;
    }

    Item parse_continuous_assign() {
        Token kw = expect_keyword("assign");
        if (peek_op("#"))
            unsupported(cur_.peek(), "assignment delay");
        Item item;
        item.kind = ItemKind::ContinuousAssign;
        item.span = kw.span;
        do {
            AssignPair a;
            a.lhs = parse_lvalue();
            a.span = a.lhs->span;
            Token eq = cur_.consume();
            if (!eq.is_op("="))
                cur_.fail(eq.span, "expected '=' in continuous assign");
            a.rhs = parse_expression();
            a.span.end = a.rhs->span.end;
            item.assigns.push_back(std::move(a));
        } while (accept_op(","));
        Token semi = expect_op(";");
        item.span.end = semi.span.end;
        return item;
    }

    Item parse_always() {
        Token kw = expect_keyword("always");
        Item item;
        item.kind = ItemKind::Always;
        item.span = kw.span;
        if (peek_op("@*")) {
            cur_.consume();
            item.sens_star = true;
            item.always_body = parse_statement();
            item.span.end = item.always_body->span.end;
            return item;
        }
        if (!peek_op("@"))
            unsupported(kw, "always block without event control");
        expect_op("@");
        if (accept_op("*")) {
            item.sens_star = true;
        } else {
            expect_op("(");
            if (accept_op("*")) {
                item.sens_star = true;
            } else {
                do {
                    SensItem s;
                    if (accept_kw("posedge"))
                        s.sense = EdgeSense::Posedge;
                    else if (accept_kw("negedge"))
                        s.sense = EdgeSense::Negedge;
                    s.signal = parse_expression();
                    item.sensitivity.push_back(std::move(s));
                } while (accept_op(",") || accept_kw("or"));
            }
            expect_op(")");
        }
        item.always_body = parse_statement();
        item.span.end = item.always_body->span.end;
        return item;
    }

    Item parse_instantiation() {
        Token mod = expect_name("module name");
        Item item;
        item.kind = ItemKind::Instantiation;
        item.span = mod.span;
        item.target_module = mod.text;
        if (accept_op("#")) {
            expect_op("(");
            if (!peek_op(")")) {
                if (peek_op(".")) {
                    do {
                        expect_op(".");
                        Token p = expect_name("parameter name");
                        expect_op("(");
                        PortBinding b;
                        b.port = p.text;
                        b.span = p.span;
                        if (!peek_op(")"))
                            b.expr = parse_expression();
                        expect_op(")");
                        item.param_overrides.push_back(std::move(b));
                    } while (accept_op(","));
                } else {
                    do {
                        PortBinding b;
                        b.expr = parse_expression();
                        b.span = b.expr->span;
                        item.param_overrides.push_back(std::move(b));
                    } while (accept_op(","));
                }
            }
            expect_op(")");
        }
        Token inst = expect_name("instance name");
        item.instance_name = inst.text;
        if (peek_op("["))
            unsupported(cur_.peek(), "instance array");
        expect_op("(");
        if (!peek_op(")")) {
            if (peek_op(".")) {
                do {
                    Token dot = expect_op(".");
                    Token p = expect_name("port name");
                    expect_op("(");
                    PortBinding b;
                    b.port = p.text;
                    b.span = dot.span;
                    if (!peek_op(")")) {
                        b.expr = parse_expression();
                        b.span.end = b.expr->span.end;
                    }
                    Token close = expect_op(")");
                    b.span.end = close.span.end;
                    item.bindings.push_back(std::move(b));
                } while (accept_op(","));
            } else {
                do {
                    PortBinding b;
                    b.expr = parse_expression();
                    b.span = b.expr->span;
                    item.bindings.push_back(std::move(b));
                } while (accept_op(","));
            }
        }
        expect_op(")");
        Token semi = expect_op(";");
        item.span.end = semi.span.end;
        return item;
    }
};

} // namespace

Ast parse_sources(SourceManager& sm, const std::vector<std::uint32_t>& files, DiagnosticEngine& diags) {
    if (files.empty())
        throw IoError("no input files");
    Ast ast;
    std::map<std::string, std::uint32_t> seen_modules;
    for (auto id : files) {
        TokenCursor cur(sm, diags);
        cur.push_file(id);
        Parser p(cur);
        Ast part = p.parse_translation_unit();
        for (auto& m : part.modules) {
            if (seen_modules.count(m.name)) {
                diags.report(Severity::Error, sm, m.span, "duplicate module '" + m.name + "'");
                continue;
            }
            seen_modules[m.name] = id;
            ast.modules.push_back(std::move(m));
        }
    }
    check_resolution(ast, sm, diags);
    return ast;
}

Ast parse_files(SourceManager& sm, const std::vector<std::string>& paths, DiagnosticEngine& diags) {
    std::vector<std::uint32_t> ids;
    ids.reserve(paths.size());
    for (const auto& p : paths)
        ids.push_back(sm.load(p));
    return parse_sources(sm, ids, diags);
}

StmtPtr parse_statement_text(SourceManager& sm, const std::string& text) {
    DiagnosticEngine diags;
    std::uint32_t id = sm.add_virtual("<stmt>", text);
    TokenCursor cur(sm, diags);
    cur.push_file(id);
    Parser p(cur);
    return p.parse_statement_entry();
}

std::unique_ptr<Item> parse_item_text(SourceManager& sm, const std::string& text) {
    DiagnosticEngine diags;
    std::uint32_t id = sm.add_virtual("<item>", text);
    TokenCursor cur(sm, diags);
    cur.push_file(id);
    Parser p(cur);
    return p.parse_item_entry();
}

// ---- resolution ----------------------------------------------------------

namespace {

struct ModuleScope {
    std::set<std::string> names; // ports, nets, params, integers
};

ModuleScope collect_scope(const ModuleDecl& m) {
    ModuleScope scope;
    for (const auto& p : m.ports)
        scope.names.insert(p.name);
    for (const auto& item : m.items) {
        if (item.kind == ItemKind::NetDecl || item.kind == ItemKind::ParamDecl ||
            item.kind == ItemKind::PortDecl) {
            for (const auto& d : item.decls)
                scope.names.insert(d.name);
        }
    }
    return scope;
}

void check_expr(const Expr& e, const ModuleScope& scope, const SourceManager& sm,
                const std::string& module, DiagnosticEngine& diags) {
    for_each_identifier(e, [&](const Expr& id) {
        if (!scope.names.count(id.text))
            diags.report(Severity::Error, sm, id.span,
                         "unresolved identifier '" + id.text + "' in module '" + module + "'");
    });
}

void check_stmt(const Stmt& s, const ModuleScope& scope, const SourceManager& sm,
                const std::string& module, DiagnosticEngine& diags) {
    auto expr = [&](const ExprPtr& e) {
        if (e)
            check_expr(*e, scope, sm, module, diags);
    };
    expr(s.lhs);
    expr(s.rhs);
    expr(s.cond);
    if (s.then_branch)
        check_stmt(*s.then_branch, scope, sm, module, diags);
    if (s.else_branch)
        check_stmt(*s.else_branch, scope, sm, module, diags);
    for (const auto& item : s.items) {
        for (const auto& l : item.labels)
            check_expr(*l, scope, sm, module, diags);
        check_stmt(*item.body, scope, sm, module, diags);
    }
    if (s.init)
        check_stmt(*s.init, scope, sm, module, diags);
    if (s.step)
        check_stmt(*s.step, scope, sm, module, diags);
    if (s.body)
        check_stmt(*s.body, scope, sm, module, diags);
    for (const auto& c : s.stmts)
        check_stmt(*c, scope, sm, module, diags);
}

} // namespace

std::size_t check_resolution(const Ast& ast, const SourceManager& sm, DiagnosticEngine& diags) {
    std::size_t before = diags.error_count();
    for (const auto& m : ast.modules) {
        ModuleScope scope = collect_scope(m);
        for (const auto& p : m.ports) {
            if (p.range) {
                check_expr(*p.range->msb, scope, sm, m.name, diags);
                check_expr(*p.range->lsb, scope, sm, m.name, diags);
            }
        }
        bool is_ansi = m.ansi_ports;
        for (const auto& item : m.items) {
            if (item.range) {
                check_expr(*item.range->msb, scope, sm, m.name, diags);
                check_expr(*item.range->lsb, scope, sm, m.name, diags);
            }
            switch (item.kind) {
            case ItemKind::NetDecl:
            case ItemKind::ParamDecl:
                for (const auto& d : item.decls)
                    if (d.init)
                        check_expr(*d.init, scope, sm, m.name, diags);
                break;
            case ItemKind::PortDecl:
                for (const auto& d : item.decls) {
                    bool in_port_list = false;
                    for (const auto& p : m.ports)
                        if (p.name == d.name)
                            in_port_list = true;
                    if (!in_port_list)
                        diags.report(Severity::Error, sm, d.span,
                                     "'" + d.name + "' declared " +
                                         (item.dir == PortDir::Input ? "input" : item.dir == PortDir::Output ? "output" : "inout") +
                                         " but missing from the port list of '" + m.name + "'");
                }
                if (is_ansi)
                    diags.report(Severity::Error, sm, item.span,
                                 "port direction declaration inside ANSI-style module '" + m.name + "'");
                break;
            case ItemKind::ContinuousAssign:
                for (const auto& a : item.assigns) {
                    check_expr(*a.lhs, scope, sm, m.name, diags);
                    check_expr(*a.rhs, scope, sm, m.name, diags);
                }
                break;
            case ItemKind::Always:
                for (const auto& s : item.sensitivity)
                    check_expr(*s.signal, scope, sm, m.name, diags);
                check_stmt(*item.always_body, scope, sm, m.name, diags);
                break;
            case ItemKind::Instantiation:
                for (const auto& b : item.bindings)
                    if (b.expr)
                        check_expr(*b.expr, scope, sm, m.name, diags);
                for (const auto& b : item.param_overrides)
                    if (b.expr)
                        check_expr(*b.expr, scope, sm, m.name, diags);
                break;
            }
        }
        // non-ANSI ports must eventually get a direction
        if (!m.ansi_ports) {
            std::set<std::string> directed;
            for (const auto& item : m.items)
                if (item.kind == ItemKind::PortDecl)
                    for (const auto& d : item.decls)
                        directed.insert(d.name);
            for (const auto& p : m.ports)
                if (!directed.count(p.name))
                    diags.report(Severity::Error, sm, p.span,
                                 "port '" + p.name + "' of '" + m.name + "' has no direction declaration");
        }
    }
    return diags.error_count() - before;
}

} // namespace keysig
