// SPDX-License-Identifier: Apache-2.0
#include "keysig/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>

#include <json.hpp>

#include "keysig/diagnostics.hpp"
#include "keysig/util.hpp"

namespace keysig {

namespace {

// Dense-index adjacency snapshot used by the iterative algorithms.
struct Adjacency {
    std::vector<std::string> names;
    std::map<std::string, int> index;
    std::vector<std::vector<int>> succ;       // distinct successors
    std::vector<std::vector<int>> pred;       // distinct predecessors
    std::vector<int> outdeg;                  // distinct successor count

    explicit Adjacency(const SemanticGraph& g) {
        for (const auto& [name, node] : g.nodes()) {
            index[name] = static_cast<int>(names.size());
            names.push_back(name);
        }
        succ.resize(names.size());
        pred.resize(names.size());
        for (const auto& e : g.edges()) {
            int s = index.at(e.src);
            int d = index.at(e.dst);
            if (std::find(succ[s].begin(), succ[s].end(), d) == succ[s].end())
                succ[s].push_back(d);
            if (std::find(pred[d].begin(), pred[d].end(), s) == pred[d].end())
                pred[d].push_back(s);
        }
        outdeg.resize(names.size());
        for (std::size_t i = 0; i < names.size(); ++i)
            outdeg[i] = static_cast<int>(succ[i].size());
    }
};

bool matches_any(const std::vector<std::string>& patterns, const std::string& name) {
    for (const auto& p : patterns)
        if (glob_match(p, name))
            return true;
    return false;
}

} // namespace

SemanticGraph filter_subgraph(const SemanticGraph& g, const FilterConfig& cfg) {
    SemanticGraph out;
    for (const auto& [name, node] : g.nodes()) {
        if (matches_any(cfg.clock_patterns, node.base) || matches_any(cfg.reset_patterns, node.base))
            continue;
        if (cfg.drop_parameters && node.parameter)
            continue;
        if (cfg.drop_sensitivity_only && node.sens_only)
            continue;
        out.add_node(node);
    }
    for (const auto& e : g.edges()) {
        if (cfg.drop_self_loops && e.src == e.dst)
            continue;
        if (out.has_node(e.src) && out.has_node(e.dst))
            out.add_edge(e);
    }
    return out;
}

PageRankResult pagerank(const SemanticGraph& g, const PageRankOptions& opts) {
    if (g.node_count() == 0)
        throw EmptyGraph("pagerank requires a non-empty graph");
    Adjacency adj(g);
    const std::size_t n = adj.names.size();
    std::vector<double> cur(n, 1.0), next(n, 0.0);
    const double d = opts.damping;

    int it = 0;
    bool converged = false;
    for (; it < opts.max_iter; ++it) {
        double max_delta = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            double sum = 0.0;
            for (int u : adj.pred[v])
                sum += cur[u] / adj.outdeg[u];
            next[v] = (1.0 - d) + d * sum;
            max_delta = std::max(max_delta, std::abs(next[v] - cur[v]));
        }
        cur.swap(next);
        if (max_delta < opts.epsilon) {
            converged = true;
            ++it;
            break;
        }
    }

    PageRankResult res;
    res.converged = converged;
    res.iterations = it;
    for (std::size_t v = 0; v < n; ++v)
        res.scores[adj.names[v]] = cur[v];
    return res;
}

namespace {

// Nodes that can reach v, traversing every edge kind. The node itself is
// never a member of its own closure.
std::vector<char> backward_closure(const Adjacency& adj, int v) {
    std::vector<char> visited(adj.names.size(), 0);
    std::deque<int> work{v};
    visited[v] = 1;
    while (!work.empty()) {
        int cur = work.front();
        work.pop_front();
        for (int p : adj.pred[cur]) {
            if (!visited[p]) {
                visited[p] = 1;
                work.push_back(p);
            }
        }
    }
    visited[v] = 0;
    return visited;
}

} // namespace

std::map<std::string, double> observability(const SemanticGraph& g, const ObsOptions& opts) {
    Adjacency adj(g);
    const std::size_t n = adj.names.size();

    auto qualifying = [&](EdgeKind k) {
        if (k == EdgeKind::Control || k == EdgeKind::Data)
            return true;
        return opts.count_temporal_as_data && k == EdgeKind::Temporal;
    };

    // per node: count of qualifying out-edges (multigraph edges, kinds
    // counted separately) and, for the literal mode, per-target counts
    std::vector<double> out_count(n, 0.0);
    std::map<std::pair<int, int>, double> into; // (src, dst) -> qualifying edge count
    for (const auto& e : g.edges()) {
        if (!qualifying(e.kind))
            continue;
        int s = adj.index.at(e.src);
        int d = adj.index.at(e.dst);
        out_count[s] += 1.0;
        into[{s, d}] += 1.0;
    }

    std::map<std::string, double> res;
    for (std::size_t v = 0; v < n; ++v) {
        auto bw = backward_closure(adj, static_cast<int>(v));
        double total = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            if (!bw[p])
                continue;
            if (opts.mode == ObsMode::PredecessorOutEdges) {
                total += out_count[p];
            } else {
                auto it = into.find({static_cast<int>(p), static_cast<int>(v)});
                if (it != into.end())
                    total += it->second;
            }
        }
        res[adj.names[v]] = total;
    }
    return res;
}

std::map<std::string, double> mux_branch(const SemanticGraph& g) {
    std::map<std::string, std::set<std::string>> controlled;
    for (const auto& e : g.edges())
        if (e.kind == EdgeKind::Control)
            controlled[e.src].insert(e.dst);
    std::map<std::string, double> res;
    for (const auto& [name, node] : g.nodes()) {
        auto it = controlled.find(name);
        res[name] = it == controlled.end() ? 0.0 : static_cast<double>(it->second.size());
    }
    return res;
}

std::vector<double> min_max_normalize(const std::vector<double>& values) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty())
        return out;
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi > lo)
        for (std::size_t i = 0; i < values.size(); ++i)
            out[i] = (values[i] - lo) / (hi - lo);
    return out;
}

namespace {

void normalize(std::map<std::string, FeatureScores>& scores, double FeatureScores::*raw,
               double FeatureScores::*norm) {
    std::vector<double> values;
    values.reserve(scores.size());
    for (const auto& [name, fs] : scores)
        values.push_back(fs.*raw);
    std::vector<double> normed = min_max_normalize(values);
    std::size_t i = 0;
    for (auto& [name, fs] : scores)
        fs.*norm = normed[i++];
}

} // namespace

std::map<std::string, FeatureScores> hybrid_scores(const SemanticGraph& g, const Weights& w,
                                                   const PageRankOptions& pr_opts,
                                                   const ObsOptions& obs_opts) {
    if (g.node_count() == 0)
        throw EmptyGraph("hybrid_scores requires a non-empty graph");
    auto pr = pagerank(g, pr_opts);
    auto obs = observability(g, obs_opts);
    auto mux = mux_branch(g);

    std::map<std::string, FeatureScores> scores;
    for (const auto& [name, node] : g.nodes()) {
        FeatureScores fs;
        fs.pr = pr.scores.at(name);
        fs.obs = obs.at(name);
        fs.outboost = node.klass == SignalClass::OutputPort ? fs.obs : 0.0;
        fs.muxbranch = mux.at(name);
        fs.pagerank_converged = pr.converged;
        scores[name] = fs;
    }
    normalize(scores, &FeatureScores::pr, &FeatureScores::pr_n);
    normalize(scores, &FeatureScores::obs, &FeatureScores::obs_n);
    normalize(scores, &FeatureScores::outboost, &FeatureScores::outboost_n);
    normalize(scores, &FeatureScores::muxbranch, &FeatureScores::muxbranch_n);
    for (auto& [name, fs] : scores)
        fs.hybrid = w.pagerank * fs.pr_n + w.observability * fs.obs_n +
                    w.output_boost * fs.outboost_n + w.mux_branch * fs.muxbranch_n;
    return scores;
}

ReachSets reachable_sets(const SemanticGraph& g, const std::string& name) {
    if (!g.has_node(name))
        throw UnknownSignal("signal '" + name + "' is not in the graph");
    Adjacency adj(g);
    int v = adj.index.at(name);

    auto bfs = [&](const std::vector<std::vector<int>>& next) {
        std::set<std::string> out;
        std::vector<char> visited(adj.names.size(), 0);
        std::deque<int> work{v};
        visited[v] = 1;
        while (!work.empty()) {
            int cur = work.front();
            work.pop_front();
            for (int w : next[cur]) {
                if (!visited[w]) {
                    visited[w] = 1;
                    out.insert(adj.names[w]);
                    work.push_back(w);
                }
            }
        }
        return out;
    };

    ReachSets rs;
    rs.forward = bfs(adj.succ);
    rs.backward = bfs(adj.pred);
    return rs;
}

ReachCache::ReachCache(const SemanticGraph& g) {
    for (const auto& [name, node] : g.nodes())
        sets_[name] = reachable_sets(g, name);
}

const ReachSets& ReachCache::of(const std::string& name) const {
    auto it = sets_.find(name);
    if (it == sets_.end())
        throw UnknownSignal("signal '" + name + "' is not in the graph");
    return it->second;
}

namespace {

double jaccard_component(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty())
        return 0.0;
    std::size_t inter = 0;
    for (const auto& x : a)
        if (b.count(x))
            ++inter;
    std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

double ReachCache::jaccard(const std::string& u, const std::string& v, double lambda) const {
    const ReachSets& ru = of(u);
    const ReachSets& rv = of(v);
    if (u == v && (!ru.forward.empty() || !ru.backward.empty()))
        return 1.0;
    double jf = jaccard_component(ru.forward, rv.forward);
    double jb = jaccard_component(ru.backward, rv.backward);
    return lambda * jf + (1.0 - lambda) * jb;
}

double bidirectional_jaccard(const SemanticGraph& g, const std::string& u, const std::string& v,
                             double lambda) {
    ReachSets ru = reachable_sets(g, u);
    ReachSets rv = reachable_sets(g, v);
    if (u == v && (!ru.forward.empty() || !ru.backward.empty()))
        return 1.0;
    double jf = jaccard_component(ru.forward, rv.forward);
    double jb = jaccard_component(ru.backward, rv.backward);
    return lambda * jf + (1.0 - lambda) * jb;
}

std::vector<RankedSignal> rank_signals(const SemanticGraph& g,
                                       const std::map<std::string, FeatureScores>& scores,
                                       const SelectionConfig& cfg) {
    if (g.node_count() == 0)
        throw EmptyGraph("selection requires a non-empty graph");

    std::vector<RankedSignal> ranking;
    ranking.reserve(g.node_count());
    for (const auto& [name, node] : g.nodes()) {
        auto it = scores.find(name);
        if (it == scores.end())
            throw UnknownSignal("no score computed for '" + name + "'");
        RankedSignal rs;
        rs.name = name;
        rs.module = node.module;
        rs.klass = node.klass;
        rs.scores = it->second;
        rs.class_excluded = node.klass == SignalClass::InternalSignal && node.combinational;
        ranking.push_back(std::move(rs));
    }
    std::stable_sort(ranking.begin(), ranking.end(), [](const RankedSignal& a, const RankedSignal& b) {
        if (a.scores.hybrid != b.scores.hybrid)
            return a.scores.hybrid > b.scores.hybrid;
        return a.name < b.name;
    });
    for (std::size_t i = 0; i < ranking.size(); ++i)
        ranking[i].rank = static_cast<int>(i + 1);

    ReachCache reach(g);
    std::vector<const RankedSignal*> kept;
    for (auto& rs : ranking) {
        if (rs.class_excluded)
            continue;
        bool ok = true;
        for (const auto* s : kept) {
            if (reach.jaccard(rs.name, s->name, cfg.lambda) > cfg.theta) {
                ok = false;
                break;
            }
        }
        if (ok) {
            rs.selected = true;
            kept.push_back(&rs);
        }
    }
    return ranking;
}

std::vector<RankedSignal> select_top_k(const SemanticGraph& g,
                                       const std::map<std::string, FeatureScores>& scores,
                                       const SelectionConfig& cfg) {
    auto ranking = rank_signals(g, scores, cfg);
    std::vector<RankedSignal> out;
    for (const auto& rs : ranking) {
        if (rs.selected) {
            out.push_back(rs);
            if (static_cast<int>(out.size()) >= cfg.k)
                break;
        }
    }
    return out;
}

std::string ranking_to_json(const std::vector<RankedSignal>& ranking, const RankConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema"] = "keysig-rank/1";
    j["params"] = {{"k", cfg.selection.k},
                   {"theta", cfg.selection.theta},
                   {"lambda", cfg.selection.lambda},
                   {"damping", cfg.pagerank.damping},
                   {"weights",
                    {{"pagerank", cfg.weights.pagerank},
                     {"observability", cfg.weights.observability},
                     {"output_boost", cfg.weights.output_boost},
                     {"mux_branch", cfg.weights.mux_branch}}}};
    j["signals"] = nlohmann::ordered_json::array();
    for (const auto& rs : ranking) {
        nlohmann::ordered_json s;
        s["rank"] = rs.rank;
        s["qualified_name"] = rs.name;
        s["module"] = rs.module;
        s["class"] = to_string(rs.klass);
        s["pr"] = rs.scores.pr;
        s["obs"] = rs.scores.obs;
        s["outboost"] = rs.scores.outboost;
        s["muxbranch"] = rs.scores.muxbranch;
        s["hybrid"] = rs.scores.hybrid;
        s["selected"] = rs.selected;
        j["signals"].push_back(std::move(s));
    }
    return j.dump(2) + "\n";
}

std::string ranking_to_table(const std::vector<RankedSignal>& ranking) {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof(line), "%4s  %-40s %-16s %10s %10s %10s %10s %10s  %s\n", "rank",
                  "signal", "class", "pr", "obs", "outboost", "muxbranch", "hybrid", "sel");
    os << line;
    for (const auto& rs : ranking) {
        std::snprintf(line, sizeof(line), "%4d  %-40s %-16s %10.6f %10.1f %10.1f %10.1f %10.6f  %s\n",
                      rs.rank, rs.name.c_str(), to_string(rs.klass), rs.scores.pr, rs.scores.obs,
                      rs.scores.outboost, rs.scores.muxbranch, rs.scores.hybrid,
                      rs.selected ? "*" : (rs.class_excluded ? "-" : ""));
        os << line;
    }
    return os.str();
}

} // namespace keysig
