// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "keysig/graph.hpp"

namespace keysig {

/// Noise filter: drops clock/reset-like nodes (by name pattern),
/// parameter pseudo-signals, signals that only ever appear in sensitivity
/// lists, and self-loop edges.
struct FilterConfig {
    std::vector<std::string> clock_patterns = {"clk*", "clock*"};
    std::vector<std::string> reset_patterns = {"rst*", "reset*", "*rst_n", "*reset_n"};
    bool drop_parameters = true;
    bool drop_self_loops = true;
    bool drop_sensitivity_only = true;
};

SemanticGraph filter_subgraph(const SemanticGraph& g, const FilterConfig& cfg);

/// Non-normalized PageRank:
///   PR(v) = (1 - d) + d * sum over predecessors u of PR(u) / outdeg(u)
/// iterated from PR = 1 until the largest per-node delta drops below
/// epsilon. Predecessors and out-degrees are taken over distinct node
/// pairs; dangling nodes contribute nothing.
struct PageRankResult {
    std::map<std::string, double> scores;
    bool converged = true;
    int iterations = 0;
};

struct PageRankOptions {
    double damping = 0.85;
    double epsilon = 1e-9;
    int max_iter = 200;
};

PageRankResult pagerank(const SemanticGraph& g, const PageRankOptions& opts = {});

/// Eq-2 style observability. The default counts, for every node p that
/// can reach v, all of p's outgoing control/data edges; the Literal mode
/// counts only p's qualifying edges that point directly at v.
enum class ObsMode { PredecessorOutEdges, EdgesIntoRoot };

struct ObsOptions {
    ObsMode mode = ObsMode::PredecessorOutEdges;
    bool count_temporal_as_data = false;
};

std::map<std::string, double> observability(const SemanticGraph& g, const ObsOptions& opts = {});

/// Number of distinct successors reached through at least one control
/// edge.
std::map<std::string, double> mux_branch(const SemanticGraph& g);

struct Weights {
    double pagerank = 0.45;
    double observability = 0.25;
    double output_boost = 0.20;
    double mux_branch = 0.10;
};

struct FeatureScores {
    double pr = 0, obs = 0, outboost = 0, muxbranch = 0;         // raw
    double pr_n = 0, obs_n = 0, outboost_n = 0, muxbranch_n = 0; // min-max normalized
    double hybrid = 0;
    bool pagerank_converged = true;
};

/// (x - min) / (max - min) element-wise; a constant vector maps to all
/// zeros (a feature without variation carries no ranking information).
std::vector<double> min_max_normalize(const std::vector<double>& values);

/// Computes all four features, min-max normalizes each over the nodes of
/// g (a constant feature normalizes to all zeros), and combines them with
/// the given weights. OutputBoost equals the observability value for
/// output-class nodes and 0 otherwise.
std::map<std::string, FeatureScores> hybrid_scores(const SemanticGraph& g, const Weights& w = {},
                                                   const PageRankOptions& pr_opts = {},
                                                   const ObsOptions& obs_opts = {});

/// Forward/backward reachability, excluding the node itself.
struct ReachSets {
    std::set<std::string> forward;
    std::set<std::string> backward;
};

ReachSets reachable_sets(const SemanticGraph& g, const std::string& name);

/// Precomputed reach sets for every node, for repeated similarity queries.
class ReachCache {
public:
    explicit ReachCache(const SemanticGraph& g);
    const ReachSets& of(const std::string& name) const;
    /// lambda * forward Jaccard + (1 - lambda) * backward Jaccard.
    /// A component whose two sets are both empty contributes 0; the
    /// similarity of a node with itself is 1 whenever it reaches or is
    /// reached by anything at all.
    double jaccard(const std::string& u, const std::string& v, double lambda = 0.5) const;

private:
    std::map<std::string, ReachSets> sets_;
};

double bidirectional_jaccard(const SemanticGraph& g, const std::string& u, const std::string& v,
                             double lambda = 0.5);

struct SelectionConfig {
    int k = 5;
    double theta = 0.4;
    double lambda = 0.5;
};

struct RankedSignal {
    std::string name;
    std::string module;
    SignalClass klass = SignalClass::InternalSignal;
    FeatureScores scores;
    int rank = 0;       // dense, 1-based, hybrid descending
    bool selected = false;
    bool class_excluded = false; // purely combinational internal signal
};

/// Ranks every node of g (hybrid descending, ties broken by qualified
/// name) and runs the greedy redundancy scan over the whole list: purely
/// combinational internal signals are excluded up front, and a candidate
/// is kept only if its bidirectional Jaccard similarity with every
/// already-kept signal stays at or below theta.
std::vector<RankedSignal> rank_signals(const SemanticGraph& g,
                                       const std::map<std::string, FeatureScores>& scores,
                                       const SelectionConfig& cfg);

/// First k kept signals of rank_signals (all of them if fewer survive).
std::vector<RankedSignal> select_top_k(const SemanticGraph& g,
                                       const std::map<std::string, FeatureScores>& scores,
                                       const SelectionConfig& cfg);

/// Full ranking config for the CLI / pipeline.
struct RankConfig {
    FilterConfig filter;
    Weights weights;
    PageRankOptions pagerank;
    ObsOptions obs;
    SelectionConfig selection;
};

/// "keysig-rank/1" JSON artifact (all ranked signals with flags).
std::string ranking_to_json(const std::vector<RankedSignal>& ranking, const RankConfig& cfg);
/// Human-readable table.
std::string ranking_to_table(const std::vector<RankedSignal>& ranking);

} // namespace keysig
