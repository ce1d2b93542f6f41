// Acceptance suite: one self-contained check per shipped guarantee, one
// PASS/FAIL line each. Returns nonzero if anything fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "common/oracles.hpp"
#include "keysig/config.hpp"
#include "keysig/graph_build.hpp"
#include "keysig/graph_io.hpp"
#include "keysig/hierarchy.hpp"
#include "keysig/metrics.hpp"
#include "keysig/parser.hpp"
#include "keysig/ranking.hpp"
#include "keysig/slicing.hpp"
#include "keysig/util.hpp"

using namespace keysig;
namespace fs = std::filesystem;

namespace {

const fs::path kData = KEYSIG_TEST_DATA_DIR;
const fs::path kTmp = KEYSIG_TEST_TMP_DIR;

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (detail.tellp() > 0)
                detail << "; ";
            detail << what;
        }
    }
};

struct ParsedDesign {
    SourceManager sm;
    DiagnosticEngine diags;
    Ast ast;
    Hierarchy hierarchy;
    SemanticGraph graph;
};

ParsedDesign parse_and_build(const std::vector<std::string>& paths, const std::string& top = {}) {
    ParsedDesign d;
    d.ast = parse_files(d.sm, paths, d.diags);
    d.hierarchy = resolve_hierarchy(d.ast, top);
    d.graph = build_graph(d.ast, d.hierarchy, d.sm, d.diags);
    return d;
}

std::vector<std::string> corpus_files(const std::string& prefix) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(kData / "corpus"))
        if (entry.path().extension() == ".v" &&
            entry.path().filename().string().rfind(prefix, 0) == 0)
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> i2c_sources() {
    return {(kData / "i2c" / "i2c_master_top.v").string(),
            (kData / "i2c" / "i2c_master_byte_ctrl.v").string(),
            (kData / "i2c" / "i2c_master_bit_ctrl.v").string()};
}

// ---- criterion 1: parser corpus -------------------------------------------

Check criterion_parser_corpus() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();

    auto positives = corpus_files("pos");
    c.expect(positives.size() >= 20, "fewer than 20 positive corpus files");
    for (const auto& path : positives) {
        try {
            SourceManager sm;
            DiagnosticEngine diags;
            parse_files(sm, {path}, diags);
            c.expect(!diags.has_errors(), path + " produced diagnostics");
        } catch (const Error& e) {
            c.expect(false, path + " failed: " + e.what());
        }
    }

    const std::vector<std::pair<std::string, std::uint32_t>> negatives = {
        {"neg01_endmodule_only.v", 1}, {"neg02_missing_semi.v", 4}, {"neg03_unclosed.v", 3},
        {"neg04_generate.v", 2},       {"neg05_define.v", 1},
    };
    for (const auto& [name, line] : negatives) {
        SourceManager sm;
        DiagnosticEngine diags;
        bool threw = false;
        try {
            parse_files(sm, {(kData / "corpus" / name).string()}, diags);
        } catch (const ParseError& e) {
            threw = true;
            c.expect(e.diagnostic.line == line,
                     name + ": expected line " + std::to_string(line) + ", got " +
                         std::to_string(e.diagnostic.line));
        }
        c.expect(threw, name + " parsed without error");
    }

    double elapsed = seconds_since(t0);
    c.expect(elapsed < 5.0, "corpus took " + std::to_string(elapsed) + "s");
    c.detail << positives.size() << " positive + " << negatives.size() << " negative files in "
             << elapsed << "s";
    return c;
}

// ---- criterion 2: graph oracle equivalence ---------------------------------

Check criterion_graph_oracle() {
    Check c;
    std::mt19937 rng(0xA11CE);
    for (int i = 0; i < 200 && c.ok; ++i) {
        auto design = oracles::random_design(rng, 5, 40);
        SourceManager sm;
        DiagnosticEngine diags;
        auto id = sm.add_virtual("<design>", design.text);
        Ast ast = parse_sources(sm, {id}, diags);
        c.expect(!diags.has_errors(), "design " + std::to_string(i) + " did not resolve");
        Hierarchy h = resolve_hierarchy(ast, design.top);
        SemanticGraph g = build_graph(ast, h, sm, diags);
        c.expect(oracles::graph_triples(g) == oracles::reference_edge_walk(ast),
                 "edge mismatch on random design " + std::to_string(i));
    }
    c.detail << "200 random designs, exact (src, dst, kind) set equality";
    return c;
}

// ---- criterion 3: pagerank ---------------------------------------------------

Check criterion_pagerank() {
    Check c;
    std::mt19937 rng(0xBEEF);
    double worst = 0;
    PageRankOptions opts;
    for (int i = 0; i < 100; ++i) {
        auto g = oracles::random_graph(rng, 12);
        auto pr = pagerank(g, opts);
        double res = oracles::pagerank_residual(g, pr.scores, opts.damping);
        worst = std::max(worst, res);
        c.expect(res < 1e-8, "residual " + std::to_string(res) + " on graph " + std::to_string(i));
    }

    SemanticGraph chain;
    for (const char* n : {"a", "b", "c"}) {
        QualifiedSignal q;
        q.module = "m";
        q.base = n;
        q.name = std::string("m.") + n;
        chain.add_node(q);
    }
    chain.add_edge(DepEdge{"m.a", "m.b", EdgeKind::Data, {}});
    chain.add_edge(DepEdge{"m.b", "m.c", EdgeKind::Data, {}});
    auto pr = pagerank(chain);
    c.expect(std::abs(pr.scores.at("m.a") - 0.15) <= 1e-9, "chain node a");
    c.expect(std::abs(pr.scores.at("m.b") - 0.2775) <= 1e-9, "chain node b");
    c.expect(std::abs(pr.scores.at("m.c") - 0.385875) <= 1e-9, "chain node c");

    SemanticGraph cycle;
    for (const char* n : {"a", "b"}) {
        QualifiedSignal q;
        q.module = "m";
        q.base = n;
        q.name = std::string("m.") + n;
        cycle.add_node(q);
    }
    cycle.add_edge(DepEdge{"m.a", "m.b", EdgeKind::Data, {}});
    cycle.add_edge(DepEdge{"m.b", "m.a", EdgeKind::Data, {}});
    auto pc = pagerank(cycle);
    c.expect(std::abs(pc.scores.at("m.a") - 1.0) <= 1e-9, "cycle node a");
    c.expect(std::abs(pc.scores.at("m.b") - 1.0) <= 1e-9, "cycle node b");

    c.detail << "100 random graphs, worst residual " << worst << "; chain and cycle fixtures exact";
    return c;
}

// ---- criterion 4: observability / muxbranch / jaccard ------------------------

Check criterion_feature_oracles() {
    Check c;
    std::size_t graphs = 0;

    auto check_graph = [&](const SemanticGraph& g) {
        ++graphs;
        auto obs = observability(g);
        for (const auto& [name, v] : oracles::obs_oracle(g))
            c.expect(obs.at(name) == v, "obs mismatch at " + name);
        auto mux = mux_branch(g);
        for (const auto& [name, v] : oracles::mux_oracle(g))
            c.expect(mux.at(name) == v, "muxbranch mismatch at " + name);
        ReachCache cache(g);
        for (const auto& [u, nu] : g.nodes())
            for (const auto& [v, nv] : g.nodes()) {
                double got = cache.jaccard(u, v, 0.5);
                double want = oracles::jaccard_oracle(g, u, v, 0.5);
                c.expect(std::abs(got - want) <= 1e-12, "jaccard mismatch " + u + "," + v);
            }
    };

    for (const auto& g : oracles::exhaustive_graphs(2))
        check_graph(g);
    for (const auto& g : oracles::exhaustive_graphs(3))
        check_graph(g);
    std::mt19937 rng(0xCAFE);
    for (int i = 0; i < 100; ++i)
        check_graph(oracles::random_graph(rng, 12));

    c.detail << graphs << " graphs (exhaustive 2- and 3-node families + 100 random), exact match";
    return c;
}

// ---- criterion 5: selection ---------------------------------------------------

Check criterion_selection() {
    Check c;
    RunConfig defaults = parse_config_text("");
    c.expect(defaults.rank.weights.pagerank == 0.45, "weight pagerank default");
    c.expect(defaults.rank.weights.observability == 0.25, "weight observability default");
    c.expect(defaults.rank.weights.output_boost == 0.20, "weight output boost default");
    c.expect(defaults.rank.weights.mux_branch == 0.10, "weight muxbranch default");
    c.expect(defaults.rank.selection.lambda == 0.5, "lambda default");
    c.expect(defaults.rank.selection.theta == 0.4, "theta default");

    std::mt19937 rng(0xD1CE);
    std::uniform_real_distribution<double> sd(0, 1);
    for (int i = 0; i < 100; ++i) {
        auto g = oracles::random_graph(rng, 12, true);
        std::map<std::string, double> hybrid;
        std::map<std::string, FeatureScores> scores;
        for (const auto& [name, node] : g.nodes()) {
            hybrid[name] = sd(rng);
            FeatureScores fs;
            fs.hybrid = hybrid[name];
            scores[name] = fs;
        }
        SelectionConfig cfg;
        cfg.k = 4;
        cfg.theta = defaults.rank.selection.theta;
        cfg.lambda = defaults.rank.selection.lambda;

        auto top = select_top_k(g, scores, cfg);
        auto expected = oracles::greedy_oracle(g, hybrid, cfg.theta, cfg.lambda, cfg.k);
        c.expect(top.size() == expected.size(), "survivor count on graph " + std::to_string(i));
        for (std::size_t n = 0; n < std::min(top.size(), expected.size()); ++n)
            c.expect(top[n].name == expected[n], "selection order on graph " + std::to_string(i));

        ReachCache cache(g);
        auto all = rank_signals(g, scores, cfg);
        for (const auto& a : all)
            for (const auto& b : all)
                if (a.selected && b.selected && a.name != b.name)
                    c.expect(cache.jaccard(a.name, b.name, cfg.lambda) <= cfg.theta,
                             "pairwise similarity above theta on graph " + std::to_string(i));
    }
    c.detail << "100 random scored graphs match the greedy re-simulation; defaults verified";
    return c;
}

// ---- criterion 6: slicing ------------------------------------------------------

Check criterion_slicing() {
    Check c;

    // closure on every corpus design, plus the bundled fixture
    std::vector<std::vector<std::string>> designs;
    for (const auto& path : corpus_files("pos"))
        designs.push_back({path});
    designs.push_back(i2c_sources());

    int sliced = 0;
    for (const auto& paths : designs) {
        SourceManager sm;
        DiagnosticEngine diags;
        Ast ast = parse_files(sm, paths, diags);
        std::string top;
        try {
            top = resolve_hierarchy(ast).top;
        } catch (const HierarchyError&) {
            top = ast.modules.front().name;
        }
        Hierarchy h = resolve_hierarchy(ast, top);
        SemanticGraph g = build_graph(ast, h, sm, diags);
        for (const auto& [name, node] : g.nodes()) {
            auto nodes = backward_slice(g, name);
            auto slice = materialize_slice(ast, h, sm, g, nodes, name);
            ++sliced;
            SourceManager frag_sm;
            DiagnosticEngine frag_diags;
            auto id = frag_sm.add_virtual("<fragment>", slice.combined_text());
            try {
                parse_sources(frag_sm, {id}, frag_diags);
            } catch (const Error& e) {
                c.expect(false, name + " fragment does not re-parse: " + std::string(e.what()));
                continue;
            }
            for (const auto& d : frag_diags.all())
                c.expect(d.message.find("unresolved identifier") == std::string::npos,
                         name + ": dangling reference (" + d.message + ")");
        }
    }

    // depth monotonicity on random designs
    std::mt19937 rng(0x511CE);
    for (int i = 0; i < 20; ++i) {
        auto design = oracles::random_design(rng, 4, 30);
        SourceManager sm;
        DiagnosticEngine diags;
        auto id = sm.add_virtual("<design>", design.text);
        Ast ast = parse_sources(sm, {id}, diags);
        Hierarchy h = resolve_hierarchy(ast, design.top);
        SemanticGraph g = build_graph(ast, h, sm, diags);
        for (const auto& [name, node] : g.nodes()) {
            auto d1 = backward_slice(g, name, 1);
            auto d2 = backward_slice(g, name, 2);
            auto d3 = backward_slice(g, name, 3);
            auto dn = backward_slice(g, name);
            c.expect(std::includes(d2.begin(), d2.end(), d1.begin(), d1.end()), "d1 not in d2");
            c.expect(std::includes(d3.begin(), d3.end(), d2.begin(), d2.end()), "d2 not in d3");
            c.expect(std::includes(dn.begin(), dn.end(), d3.begin(), d3.end()), "d3 not in full");
        }
    }

    c.detail << sliced << " slices closed over declared names; depth chain monotone on 20 designs";
    return c;
}

// ---- criterion 7: end-to-end pipeline with the mock endpoint -------------------

Check criterion_pipeline() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();

    fs::path out1 = kTmp / "accept_run";
    fs::remove_all(out1);
    fs::create_directories(kTmp);

    std::string cli = KEYSIG_CLI_PATH;
    auto run = [&](const fs::path& out, const char* log) {
        std::string cmd = cli + " run";
        for (const auto& src : i2c_sources())
            cmd += " " + src;
        cmd += " --k 3 --mock-dir " + (kData / "mock").string();
        cmd += " --overview " + (kData / "overview.txt").string();
        cmd += " -o " + out.string() + " > " + (kTmp / log).string() + " 2>&1";
        return std::system(cmd.c_str());
    };
    c.expect(run(out1, "run1.log") == 0, "first pipeline run failed");

    // three slice directories
    int slice_dirs = 0;
    if (fs::exists(out1 / "slices"))
        for (const auto& entry : fs::directory_iterator(out1 / "slices"))
            if (entry.is_directory())
                ++slice_dirs;
    c.expect(slice_dirs == 3, "expected 3 slice directories, got " + std::to_string(slice_dirs));

    auto ranking = nlohmann::json::parse(read_file(out1 / "ranking.json"));
    c.expect(ranking["schema"] == "keysig-rank/1", "ranking schema");
    int selected = 0;
    for (const auto& s : ranking["signals"])
        if (s["selected"].get<bool>())
            ++selected;
    c.expect(selected >= 3, "fewer than 3 selected signals");

    // every record: accepted after exactly 3 attempts (fail, fail, pass)
    int records = 0;
    if (fs::exists(out1 / "assertions"))
        for (const auto& entry : fs::directory_iterator(out1 / "assertions")) {
            auto j = nlohmann::json::parse(read_file(entry.path()));
            ++records;
            c.expect(j["attempts"].size() <= 3, "attempt bound exceeded");
            c.expect(j["attempts"].size() == 3, "scripted fail/fail/pass should take 3 attempts");
            c.expect(j["status"] == "accepted", "record not accepted");
            c.expect(!j["accepted"].empty(), "no accepted assertions");
        }
    c.expect(records == 3, "expected 3 assertion records, got " + std::to_string(records));

    // a rerun with the identical config leaves every artifact byte-identical
    std::map<std::string, std::string> before;
    for (const auto& entry : fs::recursive_directory_iterator(out1))
        if (entry.is_regular_file())
            before[fs::relative(entry.path(), out1).string()] = fnv1a_hex(read_file(entry.path()));
    c.expect(!before.empty(), "no artifacts produced");
    c.expect(run(out1, "run2.log") == 0, "second pipeline run failed");
    std::size_t after_count = 0;
    for (const auto& entry : fs::recursive_directory_iterator(out1))
        if (entry.is_regular_file()) {
            ++after_count;
            std::string r = fs::relative(entry.path(), out1).string();
            auto it = before.find(r);
            c.expect(it != before.end(), r + " appeared only on the rerun");
            if (it != before.end())
                c.expect(it->second == fnv1a_hex(read_file(entry.path())),
                         r + " differs across reruns");
        }
    c.expect(after_count == before.size(), "artifact count changed across reruns");

    double elapsed = seconds_since(t0);
    c.expect(elapsed < 10.0, "pipeline took " + std::to_string(elapsed) + "s");
    c.detail << records << " accepted records, " << before.size() << " artifacts byte-identical, "
             << elapsed << "s";
    return c;
}

// ---- criterion 8: normalized metrics -------------------------------------------

Check criterion_metrics() {
    Check c;
    CoverageBatch batch;
    batch.entries = {{"r1", "BFC", 7, 13},  {"r1", "COI", 3, 9},  {"r2", "BFC", 11, 17},
                     {"r2", "COI", 5, 6},   {"r3", "BFC", 2, 11}, {"r3", "COI", 6, 7}};
    auto m = normalized_metrics(batch);
    auto expect_value = [&](const char* run, const char* metric, double want) {
        auto got = m.values.at(run).at(metric);
        c.expect(got.has_value() && std::abs(*got - want) <= 1e-12,
                 std::string(run) + "/" + metric + " off");
    };
    expect_value("r1", "BFC", 7.0 / 17.0);
    expect_value("r2", "BFC", 11.0 / 17.0);
    expect_value("r3", "BFC", 2.0 / 17.0);
    expect_value("r1", "COI", 3.0 / 9.0);
    expect_value("r2", "COI", 5.0 / 9.0);
    expect_value("r3", "COI", 6.0 / 9.0);

    CoverageBatch zero;
    zero.entries = {{"a", "TFC", 0, 0}, {"b", "TFC", 0, 0}};
    auto mz = normalized_metrics(zero);
    c.expect(!mz.values.at("a").at("TFC").has_value(), "zero denominator should be undefined");
    c.expect(metrics_to_table(mz).find("undefined") != std::string::npos,
             "table must spell out 'undefined'");

    c.detail << "3-run batch matches hand arithmetic to 1e-12; zero denominator reported undefined";
    return c;
}

// ---- criterion 9: ranking determinism -------------------------------------------

Check criterion_determinism() {
    Check c;
    std::set<std::string> hashes;
    for (int i = 0; i < 10; ++i) {
        auto d = parse_and_build(i2c_sources());
        RankConfig cfg;
        auto filtered = filter_subgraph(d.graph, cfg.filter);
        auto scores = hybrid_scores(filtered, cfg.weights, cfg.pagerank, cfg.obs);
        auto ranking = rank_signals(filtered, scores, cfg.selection);
        hashes.insert(fnv1a_hex(ranking_to_json(ranking, cfg)));
    }
    c.expect(hashes.size() == 1, std::to_string(hashes.size()) + " distinct hashes");
    c.detail << "10 repeated runs, " << hashes.size() << " unique ranking hash";
    return c;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Check()> run;
    };
    const std::vector<Criterion> criteria = {
        {"parser corpus (>=20 positive, 5 negative with exact lines, <5s)", criterion_parser_corpus},
        {"graph extraction equals the reference walk on 200 random designs", criterion_graph_oracle},
        {"pagerank fixed point (residual <1e-8) and frozen fixtures", criterion_pagerank},
        {"observability/muxbranch/jaccard match brute-force oracles", criterion_feature_oracles},
        {"greedy selection matches re-simulation; published defaults", criterion_selection},
        {"slice closure and depth monotonicity", criterion_slicing},
        {"end-to-end mock pipeline, byte-identical reruns, <10s", criterion_pipeline},
        {"normalized coverage metrics", criterion_metrics},
        {"ranking determinism across 10 runs", criterion_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check result;
        try {
            result = criteria[i].run();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail << "exception: " << e.what();
        }
        std::cout << (result.ok ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1) << ": "
                  << criteria[i].name << " -- " << result.detail.str() << "\n";
        if (!result.ok)
            ++failures;
    }
    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all " << criteria.size() << " criteria passed\n";
    return 0;
}
