#include <doctest.h>

#include <set>

#include "common/oracles.hpp"
#include "keysig/graph_build.hpp"
#include "keysig/graph_io.hpp"
#include "keysig/parser.hpp"

using namespace keysig;

namespace {

struct Built {
    SourceManager sm;
    DiagnosticEngine diags;
    Ast ast;
    Hierarchy hierarchy;
    SemanticGraph graph;
};

Built build(const std::string& text, const std::string& top = {}) {
    Built b;
    auto id = b.sm.add_virtual("<test>", text);
    b.ast = parse_sources(b.sm, {id}, b.diags);
    b.hierarchy = resolve_hierarchy(b.ast, top);
    b.graph = build_graph(b.ast, b.hierarchy, b.sm, b.diags);
    return b;
}

bool has_edge(const SemanticGraph& g, const std::string& src, const std::string& dst, EdgeKind kind) {
    for (const auto& e : g.edges())
        if (e.src == src && e.dst == dst && e.kind == kind)
            return true;
    return false;
}

} // namespace

TEST_CASE("output reg assigned under posedge is an output port, not combinational") {
    auto b = build(R"(module m(input clk, input d, output reg q);
  always @(posedge clk) q <= d;
endmodule
)");
    const auto& q = b.graph.node("m.q");
    CHECK(q.klass == SignalClass::OutputPort);
    CHECK(q.combinational == false);
}

TEST_CASE("signal used only as a branch condition is a control signal") {
    auto b = build(R"(module m(input clk, input en, input d, output reg q);
  always @(posedge clk) if (en) q <= d;
endmodule
)");
    CHECK(b.graph.node("m.en").klass == SignalClass::ControlSignal);
}

TEST_CASE("plain combinational wire is an internal signal") {
    auto b = build(R"(module m(input a, input b, output o);
  wire t;
  assign t = a & b;
  assign o = t;
endmodule
)");
    const auto& t = b.graph.node("m.t");
    CHECK(t.klass == SignalClass::InternalSignal);
    CHECK(t.combinational == true);
}

TEST_CASE("state register beats control signal in priority") {
    auto b = build(R"(module m(input clk, input d, output reg q);
  reg busy;
  always @(posedge clk) begin
    busy <= d;
    if (busy) q <= d;
  end
endmodule
)");
    // busy is both assigned in an always block and used as a condition
    CHECK(b.graph.node("m.busy").klass == SignalClass::StateRegister);
}

TEST_CASE("continuous assign produces data edges from every RHS signal") {
    auto b = build(R"(module m(input a, input b, output y);
  assign y = a | b;
endmodule
)");
    CHECK(has_edge(b.graph, "m.a", "m.y", EdgeKind::Data));
    CHECK(has_edge(b.graph, "m.b", "m.y", EdgeKind::Data));
    CHECK(b.graph.edge_count() == 2);
}

TEST_CASE("edge-triggered assignment gives temporal and control edges, literals give none") {
    auto b = build(R"(module m(input clk, input rst, input d, output reg q);
  always @(posedge clk)
    if (rst) q <= 0;
    else q <= d;
endmodule
)");
    CHECK(has_edge(b.graph, "m.d", "m.q", EdgeKind::Temporal));
    CHECK(has_edge(b.graph, "m.rst", "m.q", EdgeKind::Control));
    CHECK(!has_edge(b.graph, "m.d", "m.q", EdgeKind::Data));
    // exactly the two edges: the literal 0 contributes nothing
    CHECK(b.graph.edge_count() == 2);
}

TEST_CASE("module edges follow port direction") {
    auto b = build(R"(module parent(input clk, input net1, output res);
  wire net2;
  child u0(.sda_in(net1), .sda_out(net2));
  assign res = net2;
endmodule
module child(input sda_in, output sda_out);
  assign sda_out = sda_in;
endmodule
)");
    CHECK(has_edge(b.graph, "parent.net1", "child.sda_in", EdgeKind::Module));
    CHECK(has_edge(b.graph, "child.sda_out", "parent.net2", EdgeKind::Module));
    CHECK(!has_edge(b.graph, "child.sda_in", "parent.net1", EdgeKind::Module));
}

TEST_CASE("inout port binding contributes both module directions") {
    auto b = build(R"(module parent(input a, output y);
  wire pad;
  child u0(.io(pad));
  assign y = pad & a;
endmodule
module child(io);
  inout io;
endmodule
)", "parent");
    CHECK(has_edge(b.graph, "parent.pad", "child.io", EdgeKind::Module));
    CHECK(has_edge(b.graph, "child.io", "parent.pad", EdgeKind::Module));
}

TEST_CASE("control closure covers nested conditions at every depth") {
    auto b = build(R"(module m(input clk, input c1, input c2, input [1:0] sel, input d, output reg q);
  always @(posedge clk)
    if (c1) begin
      if (c2)
        case (sel)
          2'b00: q <= d;
          default: q <= 0;
        endcase
    end
endmodule
)");
    CHECK(has_edge(b.graph, "m.c1", "m.q", EdgeKind::Control));
    CHECK(has_edge(b.graph, "m.c2", "m.q", EdgeKind::Control));
    CHECK(has_edge(b.graph, "m.sel", "m.q", EdgeKind::Control));
    CHECK(has_edge(b.graph, "m.d", "m.q", EdgeKind::Temporal));
}

TEST_CASE("same base name in different modules stays distinct") {
    auto b = build(R"(module a(input x, output y);
  wire state;
  b u0(.x(x), .y(state));
  assign y = state;
endmodule
module b(input x, output y);
  reg state;
  always @(x) state = x;
  assign y = state;
endmodule
)");
    CHECK(b.graph.has_node("a.state"));
    CHECK(b.graph.has_node("b.state"));
    CHECK(b.graph.node("a.state").klass != b.graph.node("b.state").klass);
}

TEST_CASE("duplicate (src, dst, kind) triples are deduplicated") {
    auto b = build(R"(module m(input a, output y1, output y2);
  assign y1 = a & a;
  assign y2 = a;
endmodule
)");
    int count = 0;
    for (const auto& e : b.graph.edges())
        if (e.src == "m.a" && e.dst == "m.y1")
            ++count;
    CHECK(count == 1);
}

TEST_CASE("for loops contribute control edges from the loop condition") {
    auto b = build(R"(module m(input clk, input [3:0] d, output reg [3:0] q);
  integer i;
  parameter N = 4;
  always @(posedge clk)
    for (i = 0; i < N; i = i + 1)
      q[i] <= d[i];
endmodule
)");
    CHECK(has_edge(b.graph, "m.i", "m.q", EdgeKind::Control));
    CHECK(has_edge(b.graph, "m.N", "m.q", EdgeKind::Control));
    CHECK(has_edge(b.graph, "m.d", "m.q", EdgeKind::Temporal));
    // the step i = i + 1 runs under the loop condition
    CHECK(has_edge(b.graph, "m.i", "m.i", EdgeKind::Control));
    CHECK(has_edge(b.graph, "m.i", "m.i", EdgeKind::Temporal));
    CHECK(b.graph.node("m.N").parameter);
}

TEST_CASE("select on the LHS targets the whole signal, index is not a source") {
    auto b = build(R"(module m(input clk, input [1:0] addr, input d, output reg [3:0] q);
  always @(posedge clk) q[addr] <= d;
endmodule
)");
    CHECK(has_edge(b.graph, "m.d", "m.q", EdgeKind::Temporal));
    CHECK(!has_edge(b.graph, "m.addr", "m.q", EdgeKind::Temporal));
    CHECK(!has_edge(b.graph, "m.addr", "m.q", EdgeKind::Data));
}

TEST_CASE("clock used only in sensitivity lists is flagged") {
    auto b = build(R"(module m(input wck, input d, output reg q);
  always @(posedge wck) q <= d;
endmodule
)");
    CHECK(b.graph.node("m.wck").sens_only);
    CHECK(!b.graph.node("m.d").sens_only);
}

TEST_CASE("wire with initializer behaves like a continuous assign") {
    auto b = build(R"(module m(input a, input b, output o);
  wire t = a & b;
  assign o = t;
endmodule
)");
    CHECK(has_edge(b.graph, "m.a", "m.t", EdgeKind::Data));
    CHECK(b.graph.node("m.t").combinational);
}

TEST_CASE("instance-driven signal is not purely combinational") {
    auto b = build(R"(module parent(input clk, input a, output y);
  wire t;
  child u0(.i(a), .o(t));
  assign y = t;
endmodule
module child(input i, output o);
  assign o = i;
endmodule
)");
    CHECK(!b.graph.node("parent.t").combinational);
}

// ---- export / import -------------------------------------------------------

TEST_CASE("empty graph exports an empty node and edge list") {
    SemanticGraph g;
    std::string json = graph_to_json(g);
    CHECK(json.find("\"nodes\": []") != std::string::npos);
    CHECK(json.find("\"edges\": []") != std::string::npos);
    CHECK(graph_from_json(json) == g);
}

TEST_CASE("single node graph round-trips") {
    SemanticGraph g;
    QualifiedSignal q;
    q.module = "m";
    q.base = "a";
    q.name = "m.a";
    q.klass = SignalClass::ControlSignal;
    q.combinational = true;
    g.add_node(q);
    CHECK(graph_from_json(graph_to_json(g)) == g);
}

TEST_CASE("built graph round-trips through JSON") {
    auto b = build(R"(module m(input clk, input rst, input d, output reg q);
  wire t = d & rst;
  always @(posedge clk) if (rst) q <= 0; else q <= t;
endmodule
)");
    auto imported = graph_from_json(graph_to_json(b.graph));
    CHECK(imported == b.graph);
    CHECK(graph_to_json(imported) == graph_to_json(b.graph));
}

TEST_CASE("random graphs round-trip through JSON") {
    std::mt19937 rng(7);
    for (int i = 0; i < 50; ++i) {
        auto g = oracles::random_graph(rng, 12, true);
        CHECK(graph_from_json(graph_to_json(g)) == g);
    }
}

TEST_CASE("dot export colors modules distinctly") {
    auto b = build(R"(module a(input x, output y);
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
    std::string dot = graph_to_dot(b.graph);
    std::set<std::string> colors;
    std::size_t pos = 0;
    while ((pos = dot.find("fillcolor=\"", pos)) != std::string::npos) {
        pos += 11;
        colors.insert(dot.substr(pos, dot.find('"', pos) - pos));
    }
    CHECK(colors.size() == 3);
}
