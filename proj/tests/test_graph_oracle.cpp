#include <doctest.h>

#include "common/oracles.hpp"
#include "keysig/graph_build.hpp"
#include "keysig/parser.hpp"

using namespace keysig;

// Randomized designs, parsed and extracted, must match the independent
// rule-by-rule reference walk on (src, dst, kind) triples exactly. The
// acceptance suite raises the iteration count to 200.
TEST_CASE("edge extraction matches the reference walk on random designs") {
    std::mt19937 rng(20260810);
    for (int i = 0; i < 60; ++i) {
        auto design = oracles::random_design(rng, 5, 40);
        CAPTURE(design.text);

        SourceManager sm;
        DiagnosticEngine diags;
        auto id = sm.add_virtual("<random>", design.text);
        Ast ast = parse_sources(sm, {id}, diags);
        REQUIRE(!diags.has_errors());
        Hierarchy h = resolve_hierarchy(ast, design.top);
        SemanticGraph g = build_graph(ast, h, sm, diags);

        auto expected = oracles::reference_edge_walk(ast);
        auto actual = oracles::graph_triples(g);
        REQUIRE(actual == expected);
    }
}

TEST_CASE("every declared signal of a random design becomes exactly one node") {
    std::mt19937 rng(99);
    for (int i = 0; i < 20; ++i) {
        auto design = oracles::random_design(rng, 4, 30);
        SourceManager sm;
        DiagnosticEngine diags;
        auto id = sm.add_virtual("<random>", design.text);
        Ast ast = parse_sources(sm, {id}, diags);
        auto signals = classify_signals(ast);
        std::set<std::string> names;
        for (const auto& q : signals) {
            CHECK(q.name == q.module + "." + q.base);
            CHECK(names.insert(q.name).second); // unique
        }
    }
}
