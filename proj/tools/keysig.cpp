// SPDX-License-Identifier: Apache-2.0
// keysig: critical-signal analysis and targeted assertion generation for
// Verilog RTL. Each pipeline stage is exposed as a subcommand; `run`
// chains them all.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "keysig/config.hpp"
#include "keysig/diagnostics.hpp"
#include "keysig/graph_build.hpp"
#include "keysig/graph_io.hpp"
#include "keysig/metrics.hpp"
#include "keysig/orchestrator.hpp"
#include "keysig/parser.hpp"
#include "keysig/pipeline.hpp"
#include "keysig/ranking.hpp"
#include "keysig/slicing.hpp"
#include "keysig/util.hpp"

namespace {

using keysig::RunConfig;

// Every CLI flag mirrors a config key; present flags are replayed through
// the config parser on top of --config file values.
struct OptionBag {
    std::map<std::string, std::string> values;
    std::string config_path;

    void attach(CLI::App* app, const std::string& key, const std::string& flag,
                const std::string& help) {
        app->add_option_function<std::string>(
            flag, [this, key](const std::string& v) { values[key] = v; }, help);
    }

    RunConfig resolve(RunConfig base = {}) const {
        RunConfig cfg = std::move(base);
        if (!config_path.empty())
            cfg = keysig::load_config_file(config_path, std::move(cfg));
        std::string overrides;
        for (const auto& [k, v] : values)
            overrides += k + " = " + v + "\n";
        return keysig::parse_config_text(overrides, std::move(cfg));
    }
};

void attach_rank_options(CLI::App* app, OptionBag& bag) {
    bag.attach(app, "k", "--k", "number of signals to select");
    bag.attach(app, "theta", "--theta", "redundancy threshold for the greedy selection");
    bag.attach(app, "lambda", "--lambda", "forward/backward weight of the similarity");
    bag.attach(app, "damping", "--damping", "PageRank damping factor");
    bag.attach(app, "epsilon", "--epsilon", "PageRank convergence tolerance");
    bag.attach(app, "max_iter", "--max-iter", "PageRank iteration cap");
    bag.attach(app, "weight_pagerank", "--weight-pagerank", "hybrid weight of PageRank");
    bag.attach(app, "weight_observability", "--weight-observability", "hybrid weight of observability");
    bag.attach(app, "weight_outputboost", "--weight-outputboost", "hybrid weight of the output boost");
    bag.attach(app, "weight_muxbranch", "--weight-muxbranch", "hybrid weight of the branch count");
    bag.attach(app, "obs_mode", "--obs-mode",
               "observability counting: predecessor_out_edges or edges_into_root");
    bag.attach(app, "count_temporal_as_data", "--count-temporal-as-data",
               "count temporal edges as data in observability");
    bag.attach(app, "clock_patterns", "--clock-patterns", "comma-separated clock name globs");
    bag.attach(app, "reset_patterns", "--reset-patterns", "comma-separated reset name globs");
    bag.attach(app, "drop_parameters", "--drop-parameters", "filter parameter pseudo-signals");
    bag.attach(app, "drop_self_loops", "--drop-self-loops", "filter self-loop edges");
    bag.attach(app, "drop_sensitivity_only", "--drop-sensitivity-only",
               "filter signals used only in sensitivity lists");
}

void attach_slice_options(CLI::App* app, OptionBag& bag) {
    bag.attach(app, "depth_limit", "--depth-limit", "backward slice depth (0 = unlimited)");
    bag.attach(app, "node_cap", "--node-cap", "slice node cap, truncating farthest-first");
}

void attach_gen_options(CLI::App* app, OptionBag& bag) {
    bag.attach(app, "endpoint_url", "--endpoint-url", "chat-completions base URL");
    bag.attach(app, "endpoint_path", "--endpoint-path", "endpoint path");
    bag.attach(app, "model", "--model", "model name");
    bag.attach(app, "api_key_env", "--api-key-env", "environment variable holding the credential");
    bag.attach(app, "mock_dir", "--mock-dir", "scripted response directory (offline mode)");
    bag.attach(app, "token_budget", "--token-budget", "run-level input token budget (0 = unlimited)");
    bag.attach(app, "transport_retries", "--transport-retries", "transport retry budget");
    bag.attach(app, "max_attempts", "--max-attempts", "generation attempts per signal");
    bag.attach(app, "attempt_feedback", "--attempt-feedback", "feed lint failures into retries");
    bag.attach(app, "prompt_token_budget", "--prompt-token-budget",
               "per-prompt token budget (0 = unlimited)");
    bag.attach(app, "external_verifier", "--external-verifier",
               "verifier command template with a {file} placeholder");
    bag.attach(app, "template", "--template", "prompt template file");
    bag.attach(app, "overview", "--overview", "design overview text file");
    bag.attach(app, "parallelism", "--parallelism", "concurrent generation tasks");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw keysig::IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw keysig::IoError("cannot write '" + path + "'");
    out << content;
}

struct ParsedDesign {
    keysig::SourceManager sm;
    keysig::DiagnosticEngine diags;
    keysig::Ast ast;
    keysig::Hierarchy hierarchy;
};

ParsedDesign parse_design(const RunConfig& cfg) {
    if (cfg.sources.empty())
        throw keysig::ConfigError("no source files given");
    ParsedDesign d;
    d.ast = keysig::parse_files(d.sm, cfg.sources, d.diags);
    d.hierarchy = keysig::resolve_hierarchy(d.ast, cfg.top);
    return d;
}

int finish_diagnostics(const keysig::DiagnosticEngine& diags) {
    diags.print(std::cerr);
    return diags.has_errors() ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"keysig: critical-signal analysis and targeted SVA generation for Verilog RTL"};
    app.require_subcommand(1);

    std::vector<std::string> sources;
    std::string out_path;
    std::string top;
    std::string graph_in;
    std::string ranking_in;
    std::vector<std::string> signal_names;
    std::string slices_dir;
    std::string batch_path;
    std::string format = "json";
    bool no_generate = false;

    OptionBag bag;

    auto add_sources = [&](CLI::App* cmd) {
        cmd->add_option("sources", sources, "Verilog source files")->check(CLI::ExistingFile);
        cmd->add_option("--top", top, "top module (default: auto-detect)");
    };
    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", bag.config_path, "key=value configuration file")
            ->check(CLI::ExistingFile);
    };

    auto* cmd_parse = app.add_subcommand("parse", "parse sources and report diagnostics");
    add_sources(cmd_parse);

    auto* cmd_graph = app.add_subcommand("graph", "extract the semantic dependency graph");
    add_sources(cmd_graph);
    cmd_graph->add_option("-o,--out", out_path, "output file (default: stdout)");
    cmd_graph->add_option("--format", format, "json or dot")
        ->check(CLI::IsMember({"json", "dot"}));

    auto* cmd_rank = app.add_subcommand("rank", "score and rank signals");
    add_sources(cmd_rank);
    add_config(cmd_rank);
    cmd_rank->add_option("--graph", graph_in, "rank a previously exported graph JSON instead")
        ->check(CLI::ExistingFile);
    cmd_rank->add_option("-o,--out", out_path, "ranking JSON output file");
    attach_rank_options(cmd_rank, bag);

    auto* cmd_slice = app.add_subcommand("slice", "materialize backward slices");
    add_sources(cmd_slice);
    add_config(cmd_slice);
    cmd_slice->add_option("--ranking", ranking_in, "ranking JSON; slices the selected top-k")
        ->check(CLI::ExistingFile);
    cmd_slice->add_option("--signal", signal_names, "explicit slice roots (qualified names)");
    cmd_slice->add_option("-o,--out", out_path, "output directory (default: keysig-slices)");
    attach_rank_options(cmd_slice, bag);
    attach_slice_options(cmd_slice, bag);

    auto* cmd_gen = app.add_subcommand("gen", "generate assertions for existing slice directories");
    add_config(cmd_gen);
    cmd_gen->add_option("--slices", slices_dir, "directory of slice subdirectories")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd_gen->add_option("-o,--out", out_path, "output directory (default: keysig-out)");
    attach_gen_options(cmd_gen, bag);

    auto* cmd_template = app.add_subcommand(
        "template", "print the builtin prompt template (redirect to a file to customize)");

    auto* cmd_report = app.add_subcommand("report", "normalize coverage counts across a batch");
    cmd_report->add_option("--batch", batch_path, "coverage counts (CSV or JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_report->add_option("-o,--out", out_path, "metrics JSON output file");

    auto* cmd_run = app.add_subcommand("run", "full pipeline: parse, graph, rank, slice, generate");
    add_sources(cmd_run);
    add_config(cmd_run);
    cmd_run->add_option("-o,--out", out_path, "output directory (default: keysig-out)");
    cmd_run->add_flag("--no-generate", no_generate, "stop after slicing");
    attach_rank_options(cmd_run, bag);
    attach_slice_options(cmd_run, bag);
    attach_gen_options(cmd_run, bag);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_parse->parsed()) {
            if (sources.empty())
                throw keysig::ConfigError("no source files given");
            keysig::SourceManager sm;
            keysig::DiagnosticEngine diags;
            keysig::Ast ast = keysig::parse_files(sm, sources, diags);
            std::string top_name;
            try {
                top_name = keysig::resolve_hierarchy(ast, top).top;
            } catch (const keysig::HierarchyError& e) {
                top_name = std::string("(not determined: ") + e.what() + ")";
            }
            std::cout << "parsed " << ast.modules.size() << " module(s); top: " << top_name << "\n";
            for (const auto& m : ast.modules)
                std::cout << "  " << m.name << ": " << m.ports.size() << " port(s), "
                          << m.items.size() << " item(s)\n";
            return finish_diagnostics(diags);
        }

        if (cmd_graph->parsed()) {
            RunConfig cfg;
            cfg.sources = sources;
            cfg.top = top;
            ParsedDesign d = parse_design(cfg);
            auto g = keysig::build_graph(d.ast, d.hierarchy, d.sm, d.diags);
            std::string text = format == "dot" ? keysig::graph_to_dot(g) : keysig::graph_to_json(g);
            if (out_path.empty())
                std::cout << text;
            else
                write_file(out_path, text);
            return finish_diagnostics(d.diags);
        }

        if (cmd_rank->parsed()) {
            RunConfig cfg = bag.resolve();
            if (!sources.empty())
                cfg.sources = sources;
            if (!top.empty())
                cfg.top = top;
            cfg.validate();

            keysig::SemanticGraph graph;
            keysig::DiagnosticEngine diags;
            if (!graph_in.empty()) {
                graph = keysig::graph_from_json(read_file(graph_in));
            } else {
                ParsedDesign d = parse_design(cfg);
                graph = keysig::build_graph(d.ast, d.hierarchy, d.sm, d.diags);
                d.diags.print(std::cerr);
                if (d.diags.has_errors())
                    return 2;
            }
            auto filtered = keysig::filter_subgraph(graph, cfg.rank.filter);
            auto scores =
                keysig::hybrid_scores(filtered, cfg.rank.weights, cfg.rank.pagerank, cfg.rank.obs);
            auto ranking = keysig::rank_signals(filtered, scores, cfg.rank.selection);
            std::cout << keysig::ranking_to_table(ranking);
            if (!out_path.empty())
                write_file(out_path, keysig::ranking_to_json(ranking, cfg.rank));
            return 0;
        }

        if (cmd_slice->parsed()) {
            RunConfig cfg = bag.resolve();
            if (!sources.empty())
                cfg.sources = sources;
            if (!top.empty())
                cfg.top = top;
            cfg.validate();
            ParsedDesign d = parse_design(cfg);
            auto graph = keysig::build_graph(d.ast, d.hierarchy, d.sm, d.diags);
            d.diags.print(std::cerr);
            if (d.diags.has_errors())
                return 2;

            std::vector<std::string> roots = signal_names;
            if (roots.empty()) {
                if (ranking_in.empty())
                    throw keysig::ConfigError("pass --ranking or at least one --signal");
                auto filtered = keysig::filter_subgraph(graph, cfg.rank.filter);
                // take selected signals from the ranking artifact
                auto j = nlohmann::json::parse(read_file(ranking_in));
                for (const auto& s : j.at("signals")) {
                    if (!s.at("selected").get<bool>())
                        continue;
                    roots.push_back(s.at("qualified_name").get<std::string>());
                    if (static_cast<int>(roots.size()) >= cfg.rank.selection.k)
                        break;
                }
            }
            std::string dir = out_path.empty() ? "keysig-slices" : out_path;
            for (const auto& root : roots) {
                auto slice = keysig::slice_signal(d.ast, d.hierarchy, d.sm, graph, root, cfg.slice);
                keysig::write_slice_dir(slice,
                                        (std::filesystem::path(dir) / keysig::sanitize_filename(root))
                                            .string());
                std::cout << root << ": " << slice.stats.node_count << " node(s), "
                          << slice.stats.token_estimate << " token(s), chain " << slice.chain << "\n";
            }
            return 0;
        }

        if (cmd_gen->parsed()) {
            RunConfig cfg = bag.resolve();
            cfg.validate();
            std::vector<keysig::RtlSlice> slices;
            std::vector<std::filesystem::path> dirs;
            for (const auto& entry : std::filesystem::directory_iterator(slices_dir))
                if (entry.is_directory() && std::filesystem::exists(entry.path() / "meta.json"))
                    dirs.push_back(entry.path());
            std::sort(dirs.begin(), dirs.end());
            for (const auto& p : dirs)
                slices.push_back(keysig::read_slice_dir(p.string()));
            if (slices.empty())
                throw keysig::ConfigError("no slice directories found under '" + slices_dir + "'");

            keysig::GenerationOptions gen = cfg.generation;
            gen.transport_retries = cfg.endpoint.transport_retries;
            if (!cfg.template_path.empty())
                gen.prompt_template = keysig::PromptTemplate::load(cfg.template_path);
            std::string overview =
                cfg.overview_path.empty() ? std::string{} : read_file(cfg.overview_path);
            std::string dir = out_path.empty() ? cfg.out_dir : out_path;
            auto report =
                keysig::run_generation(slices, overview, cfg.endpoint, gen, dir, cfg.parallelism);
            std::cout << "signals: " << report.signals << ", accepted: " << report.accepted
                      << ", skipped: " << report.skipped << ", input tokens: " << report.input_tokens
                      << ", output tokens: " << report.output_tokens << "\n";
            return 0;
        }

        if (cmd_template->parsed()) {
            std::cout << keysig::PromptTemplate::builtin().text;
            return 0;
        }

        if (cmd_report->parsed()) {
            auto batch = keysig::load_coverage_batch(batch_path);
            auto metrics = keysig::normalized_metrics(batch);
            std::cout << keysig::metrics_to_table(metrics);
            if (!out_path.empty())
                write_file(out_path, keysig::metrics_to_json(metrics, batch));
            return 0;
        }

        if (cmd_run->parsed()) {
            RunConfig cfg = bag.resolve();
            if (!sources.empty())
                cfg.sources = sources;
            if (!top.empty())
                cfg.top = top;
            if (!out_path.empty())
                cfg.out_dir = out_path;
            if (no_generate)
                cfg.generate = false;
            auto result = keysig::run_pipeline(cfg);
            result.diagnostics.print(std::cerr);
            std::cout << "modules: " << result.modules << ", top: " << result.top << "\n";
            std::cout << "graph: " << result.graph_nodes << " node(s), " << result.graph_edges
                      << " edge(s)\n";
            std::cout << "selected:";
            for (const auto& s : result.selected)
                std::cout << ' ' << s;
            std::cout << "\n";
            if (result.generated)
                std::cout << "assertions: " << result.report.accepted << " accepted, "
                          << result.report.skipped << " skipped\n";
            std::cout << "artifacts: " << cfg.out_dir << "\n";
            return 0;
        }
    } catch (const keysig::StageFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code;
    } catch (const keysig::ParseError& e) {
        std::cerr << e.diagnostic.str() << "\n";
        return 2;
    } catch (const keysig::HierarchyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const keysig::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const keysig::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const keysig::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
