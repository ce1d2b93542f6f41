// SPDX-License-Identifier: Apache-2.0
#include "keysig/orchestrator.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "keysig/graph_build.hpp"
#include "keysig/graph_io.hpp"
#include "keysig/parser.hpp"
#include "keysig/util.hpp"

namespace keysig {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << content;
}

std::string read_file_or_empty(const std::string& path) {
    if (path.empty())
        return {};
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
    PipelineResult result;

    try {
        cfg.validate();
        if (cfg.sources.empty())
            throw ConfigError("no source files given");
    } catch (const Error& e) {
        throw StageFailure("config", 1, e.what());
    }

    fs::create_directories(cfg.out_dir);
    write_file(fs::path(cfg.out_dir) / "run.cfg", config_to_text(cfg));

    // parse
    SourceManager sm;
    Ast ast;
    Hierarchy hierarchy;
    try {
        ast = parse_files(sm, cfg.sources, result.diagnostics);
        hierarchy = resolve_hierarchy(ast, cfg.top);
    } catch (const IoError& e) {
        throw StageFailure("parse", 1, e.what()); // unreadable input is a usage problem
    } catch (const Error& e) {
        throw StageFailure("parse", 2, e.what());
    }
    result.modules = ast.modules.size();
    result.top = hierarchy.top;

    // graph
    SemanticGraph graph;
    try {
        graph = build_graph(ast, hierarchy, sm, result.diagnostics);
        write_file(fs::path(cfg.out_dir) / "graph.json", graph_to_json(graph));
        write_file(fs::path(cfg.out_dir) / "graph.dot", graph_to_dot(graph));
    } catch (const Error& e) {
        throw StageFailure("graph", 3, e.what());
    }
    result.graph_nodes = graph.node_count();
    result.graph_edges = graph.edge_count();

    // rank
    std::vector<RankedSignal> ranking;
    try {
        SemanticGraph filtered = filter_subgraph(graph, cfg.rank.filter);
        auto scores = hybrid_scores(filtered, cfg.rank.weights, cfg.rank.pagerank, cfg.rank.obs);
        ranking = rank_signals(filtered, scores, cfg.rank.selection);
        write_file(fs::path(cfg.out_dir) / "ranking.json", ranking_to_json(ranking, cfg.rank));
        write_file(fs::path(cfg.out_dir) / "ranking.txt", ranking_to_table(ranking));
    } catch (const Error& e) {
        throw StageFailure("rank", 3, e.what());
    }
    result.ranked = ranking.size();

    // slice the top-k selected signals over the full graph
    std::vector<RtlSlice> slices;
    try {
        for (const auto& rs : ranking) {
            if (!rs.selected)
                continue;
            if (static_cast<int>(slices.size()) >= cfg.rank.selection.k)
                break;
            RtlSlice slice = slice_signal(ast, hierarchy, sm, graph, rs.name, cfg.slice);
            write_slice_dir(slice, (fs::path(cfg.out_dir) / "slices" / sanitize_filename(rs.name)).string());
            result.selected.push_back(rs.name);
            slices.push_back(std::move(slice));
        }
    } catch (const Error& e) {
        throw StageFailure("slice", 3, e.what());
    }

    // generate
    if (cfg.generate) {
        try {
            GenerationOptions gen = cfg.generation;
            gen.transport_retries = cfg.endpoint.transport_retries;
            if (!cfg.template_path.empty())
                gen.prompt_template = PromptTemplate::load(cfg.template_path);
            std::string overview = read_file_or_empty(cfg.overview_path);
            result.report =
                run_generation(slices, overview, cfg.endpoint, gen, cfg.out_dir, cfg.parallelism);
            result.generated = true;
        } catch (const Error& e) {
            throw StageFailure("generate", 3, e.what());
        }
    }

    return result;
}

} // namespace keysig
