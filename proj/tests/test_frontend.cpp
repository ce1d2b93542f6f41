#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "keysig/hierarchy.hpp"
#include "keysig/parser.hpp"

using namespace keysig;

namespace {

struct Parsed {
    SourceManager sm;
    DiagnosticEngine diags;
    Ast ast;
};

Parsed parse(const std::string& text) {
    Parsed p;
    auto id = p.sm.add_virtual("<test>", text);
    p.ast = parse_sources(p.sm, {id}, p.diags);
    return p;
}

} // namespace

TEST_CASE("minimal module") {
    auto p = parse("module m(input a, output b); assign b = a; endmodule\n");
    REQUIRE(p.ast.modules.size() == 1);
    const auto& m = p.ast.modules[0];
    CHECK(m.name == "m");
    CHECK(m.ports.size() == 2);
    REQUIRE(m.items.size() == 1);
    CHECK(m.items[0].kind == ItemKind::ContinuousAssign);
    CHECK(!p.diags.has_errors());
}

TEST_CASE("endmodule alone is a syntax error at line 1") {
    SourceManager sm;
    DiagnosticEngine diags;
    auto id = sm.add_virtual("<test>", "endmodule\n");
    try {
        parse_sources(sm, {id}, diags);
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.diagnostic.line == 1);
        CHECK(e.diagnostic.col == 1);
    }
}

TEST_CASE("syntax error carries file, line and column") {
    SourceManager sm;
    DiagnosticEngine diags;
    auto id = sm.add_virtual("bad.v", "module m(input a, output b);\n  assign b = ;\nendmodule\n");
    try {
        parse_sources(sm, {id}, diags);
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.diagnostic.path == "bad.v");
        CHECK(e.diagnostic.line == 2);
        CHECK(e.diagnostic.message.find("expression") != std::string::npos);
    }
}

TEST_CASE("generate blocks are rejected as unsupported, not silently dropped") {
    SourceManager sm;
    DiagnosticEngine diags;
    auto id = sm.add_virtual("<test>", R"(module m(input a, output b);
generate
endgenerate
endmodule
)");
    try {
        parse_sources(sm, {id}, diags);
        FAIL("expected UnsupportedConstruct");
    } catch (const UnsupportedConstruct& e) {
        CHECK(e.diagnostic.line == 2);
    }
}

TEST_CASE("non-ANSI ports resolve directions from declarations") {
    auto p = parse(R"(module m(a, b, c);
  input a;
  output reg b;
  inout c;
  always @(posedge a) b <= c;
endmodule
)");
    CHECK(!p.diags.has_errors());
    const auto& m = p.ast.modules[0];
    CHECK(m.ports.size() == 3);
    CHECK(!m.ansi_ports);
}

TEST_CASE("port without a direction is diagnosed") {
    auto p = parse("module m(a);\nendmodule\n");
    CHECK(p.diags.has_errors());
    CHECK(p.diags.all()[0].message.find("no direction") != std::string::npos);
}

TEST_CASE("unresolved identifiers are reported but the AST survives") {
    auto p = parse("module m(input a, output b); assign b = a & ghost; endmodule\n");
    REQUIRE(p.ast.modules.size() == 1);
    CHECK(p.diags.has_errors());
    CHECK(p.diags.all()[0].message.find("ghost") != std::string::npos);
}

TEST_CASE("expression zoo parses") {
    auto p = parse(R"(module m(input [7:0] a, input [7:0] b, input sel, output [7:0] y);
  wire [7:0] t;
  wire [15:0] wide;
  assign t = sel ? (a + b) : (a - b);
  assign y = {t[7:4], t[3:0]} ^ {2{a[1+:2]}} | b[3-:2];
  assign wide = {a, b} << 2;
endmodule
)");
    CHECK(!p.diags.has_errors());
}

TEST_CASE("always variants parse") {
    auto p = parse(R"(module m(input clk, input rst_n, input d, output reg q1, output reg q2, output reg q3);
  always @(posedge clk or negedge rst_n)
    if (!rst_n) q1 <= 0; else q1 <= d;
  always @* q2 = d;
  always @(d or q1) q3 = d & q1;
endmodule
)");
    CHECK(!p.diags.has_errors());
    const auto& m = p.ast.modules[0];
    REQUIRE(m.items.size() == 3);
    CHECK(is_edge_triggered(m.items[0]));
    CHECK(m.items[1].sens_star);
    CHECK(!is_edge_triggered(m.items[2]));
}

TEST_CASE("escaped identifiers keep the backslash") {
    auto p = parse("module m(input a, output b); wire \\my$sig ; assign \\my$sig = a; assign b = \\my$sig ; endmodule\n");
    CHECK(!p.diags.has_errors());
    bool found = false;
    for (const auto& item : p.ast.modules[0].items)
        if (item.kind == ItemKind::NetDecl && item.decls[0].name == "\\my$sig")
            found = true;
    CHECK(found);
}

TEST_CASE("parsing is deterministic") {
    const std::string text = R"(module m(input clk, input [3:0] d, output reg [3:0] q);
  parameter INIT = 0;
  always @(posedge clk)
    case (d)
      4'h0: q <= INIT;
      4'h1, 4'h2: q <= d;
      default: q <= ~d;
    endcase
endmodule
)";
    auto a = parse(text);
    auto b = parse(text);
    CHECK(dump(a.ast) == dump(b.ast));
}

TEST_CASE("statement spans round-trip to structurally identical statements") {
    const std::string text = R"(module m(input clk, input en, input [3:0] d, output reg [3:0] q);
  integer i;
  always @(posedge clk) begin
    if (en) begin
      q <= d;
    end else begin
      for (i = 0; i < 4; i = i + 1)
        q[i] <= 0;
    end
  end
endmodule
)";
    auto p = parse(text);
    REQUIRE(!p.diags.has_errors());

    std::function<void(const Stmt&)> verify = [&](const Stmt& s) {
        std::string_view sliced = p.sm.slice(s.span);
        SourceManager scratch;
        auto reparsed = parse_statement_text(scratch, std::string(sliced));
        CHECK(dump(*reparsed) == dump(s));
        for (const auto& c : s.stmts)
            verify(*c);
        if (s.then_branch)
            verify(*s.then_branch);
        if (s.else_branch)
            verify(*s.else_branch);
        for (const auto& item : s.items)
            verify(*item.body);
        if (s.body)
            verify(*s.body);
    };
    for (const auto& item : p.ast.modules[0].items)
        if (item.kind == ItemKind::Always)
            verify(*item.always_body);
}

TEST_CASE("item spans round-trip") {
    const std::string text = R"(module m(input clk, input a, input b, output o);
  wire t;
  assign t = a & b, o = t | a;
  reg r;
  always @(posedge clk) r <= t;
endmodule
)";
    auto p = parse(text);
    REQUIRE(!p.diags.has_errors());
    for (const auto& item : p.ast.modules[0].items) {
        SourceManager scratch;
        auto reparsed = parse_item_text(scratch, std::string(p.sm.slice(item.span)));
        CHECK(dump(*reparsed) == dump(item));
    }
}

TEST_CASE("the bundled three-module design parses into three ModuleDecls") {
    namespace fs = std::filesystem;
    fs::path i2c = fs::path(KEYSIG_TEST_DATA_DIR) / "i2c";
    SourceManager sm;
    DiagnosticEngine diags;
    auto ast = parse_files(sm,
                           {(i2c / "i2c_master_top.v").string(),
                            (i2c / "i2c_master_byte_ctrl.v").string(),
                            (i2c / "i2c_master_bit_ctrl.v").string()},
                           diags);
    CHECK(ast.modules.size() == 3);
    CHECK(!diags.has_errors());
}

TEST_CASE("includes nest") {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(KEYSIG_TEST_TMP_DIR) / "inc_nest";
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "top.v");
        f << "module m(input a, output b);\n`include \"mid.vh\"\nendmodule\n";
    }
    {
        std::ofstream f(dir / "mid.vh");
        f << "wire t;\n`include \"leaf.vh\"\nassign b = t;\n";
    }
    {
        std::ofstream f(dir / "leaf.vh");
        f << "assign t = a;\n";
    }
    SourceManager sm;
    DiagnosticEngine diags;
    auto ast = parse_files(sm, {(dir / "top.v").string()}, diags);
    CHECK(!diags.has_errors());
    REQUIRE(ast.modules.size() == 1);
    CHECK(ast.modules[0].items.size() == 3);
}

TEST_CASE("include splices relative to the including file") {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(KEYSIG_TEST_TMP_DIR) / "inc_test";
    fs::create_directories(dir);
    {
        std::ofstream inc(dir / "decls.vh");
        inc << "wire t;\nassign t = a;\n";
    }
    {
        std::ofstream main(dir / "main.v");
        main << "module m(input a, output b);\n`include \"decls.vh\"\nassign b = t;\nendmodule\n";
    }
    SourceManager sm;
    DiagnosticEngine diags;
    auto ast = parse_files(sm, {(dir / "main.v").string()}, diags);
    CHECK(!diags.has_errors());
    REQUIRE(ast.modules.size() == 1);
    CHECK(ast.modules[0].items.size() == 3); // wire decl + 2 assigns
}

TEST_CASE("self-including files hit the nesting guard instead of spinning") {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(KEYSIG_TEST_TMP_DIR) / "inc_cycle";
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "loop.v");
        f << "module m;\n`include \"loop.v\"\nendmodule\n";
    }
    SourceManager sm;
    DiagnosticEngine diags;
    CHECK_THROWS_AS(parse_files(sm, {(dir / "loop.v").string()}, diags), SyntaxError);
}

TEST_CASE("define directive is rejected") {
    SourceManager sm;
    DiagnosticEngine diags;
    auto id = sm.add_virtual("<test>", "`define W 8\nmodule m; endmodule\n");
    CHECK_THROWS_AS(parse_sources(sm, {id}, diags), UnsupportedConstruct);
}

TEST_CASE("latin-1 bytes survive loading") {
    SourceManager sm;
    std::string text = "// caf\xE9\nmodule m; endmodule\n"; // 0xE9 is not valid UTF-8
    auto id = sm.add_virtual("<test>", text);
    DiagnosticEngine diags;
    auto ast = parse_sources(sm, {id}, diags);
    CHECK(ast.modules.size() == 1);
}

TEST_CASE("CRLF line endings parse with correct line numbers") {
    SourceManager sm;
    DiagnosticEngine diags;
    auto id = sm.add_virtual("<crlf>",
                             "module m(input a, output b);\r\n  assign b = ;\r\nendmodule\r\n");
    try {
        parse_sources(sm, {id}, diags);
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.diagnostic.line == 2);
    }
}

TEST_CASE("truncated and mangled inputs fail cleanly, never crash") {
    namespace fs = std::filesystem;
    std::vector<std::string> texts;
    for (const auto& entry : fs::directory_iterator(fs::path(KEYSIG_TEST_DATA_DIR) / "corpus")) {
        if (entry.path().extension() != ".v")
            continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        texts.push_back(ss.str());
    }
    REQUIRE(!texts.empty());

    std::mt19937 rng(1234);
    int parsed = 0, rejected = 0;
    for (const auto& text : texts) {
        for (int i = 0; i < 40; ++i) {
            std::string mangled = text;
            std::size_t cut = std::uniform_int_distribution<std::size_t>(0, text.size())(rng);
            if (i % 2 == 0) {
                mangled = text.substr(0, cut);
            } else if (!mangled.empty()) {
                mangled[std::min(cut, mangled.size() - 1)] =
                    static_cast<char>(std::uniform_int_distribution<int>(32, 126)(rng));
            }
            SourceManager sm;
            DiagnosticEngine diags;
            auto id = sm.add_virtual("<fuzz>", mangled.empty() ? " " : mangled);
            try {
                parse_sources(sm, {id}, diags);
                ++parsed;
            } catch (const ParseError& e) {
                ++rejected;
                CHECK(e.diagnostic.line >= 1);
                CHECK(e.diagnostic.col >= 1);
            }
            // anything else escaping is a crash-grade bug and fails the test
        }
    }
    CHECK(parsed + rejected > 0);
}

// ---- hierarchy -------------------------------------------------------------

TEST_CASE("single module hierarchy") {
    auto p = parse("module top; endmodule\n");
    auto h = resolve_hierarchy(p.ast);
    CHECK(h.top == "top");
    CHECK(h.children.empty());
    CHECK(h.chain_to("top") == "top");
}

TEST_CASE("three-level chain") {
    auto p = parse(R"(module a(input x, output y);
  wire t;
  b u0(.x(x), .y(t));
  assign y = t;
endmodule
module b(input x, output y);
  c u0(.x(x), .y(y));
endmodule
module c(input x, output y);
  assign y = x;
endmodule
)");
    REQUIRE(!p.diags.has_errors());
    auto h = resolve_hierarchy(p.ast);
    CHECK(h.top == "a");
    CHECK(h.chain_to("c") == "a.b.c");
    CHECK(h.chain_to("b") == "a.b");
    auto order = h.preorder_modules();
    REQUIRE(order.size() == 3);
    CHECK(order[0] == "a");
    CHECK(order[1] == "b");
    CHECK(order[2] == "c");
}

TEST_CASE("two disconnected modules make top ambiguous") {
    auto p = parse("module a; endmodule\nmodule b; endmodule\n");
    CHECK_THROWS_AS(resolve_hierarchy(p.ast), AmbiguousTop);
    CHECK(resolve_hierarchy(p.ast, "a").top == "a");
}

TEST_CASE("instantiating an unknown module fails") {
    auto p = parse("module a; ghost u0(); endmodule\n");
    CHECK_THROWS_AS(resolve_hierarchy(p.ast), UnresolvedModule);
}

TEST_CASE("cyclic instantiation is detected") {
    auto p = parse(R"(module a; b u0(); endmodule
module b; a u0(); endmodule
)");
    CHECK_THROWS_AS(resolve_hierarchy(p.ast, "a"), CyclicInstantiation);
}
