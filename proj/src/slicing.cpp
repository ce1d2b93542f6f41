// SPDX-License-Identifier: Apache-2.0
#include "keysig/slicing.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "keysig/diagnostics.hpp"
#include "keysig/util.hpp"

namespace keysig {

std::set<std::string> backward_slice(const SemanticGraph& g, const std::string& root,
                                     std::optional<int> depth_limit) {
    if (!g.has_node(root))
        throw UnknownSignal("slice root '" + root + "' is not in the graph");

    std::map<std::string, std::vector<std::string>> preds;
    for (const auto& e : g.edges())
        preds[e.dst].push_back(e.src);

    std::set<std::string> out{root};
    std::deque<std::pair<std::string, int>> work{{root, 0}};
    while (!work.empty()) {
        auto [cur, depth] = work.front();
        work.pop_front();
        if (depth_limit && depth >= *depth_limit)
            continue;
        auto it = preds.find(cur);
        if (it == preds.end())
            continue;
        for (const auto& p : it->second) {
            if (out.insert(p).second)
                work.push_back({p, depth + 1});
        }
    }
    return out;
}

namespace {

// BFS depth of every slice node from the root (for farthest-first
// truncation under a node cap).
std::map<std::string, int> slice_depths(const SemanticGraph& g, const std::string& root) {
    std::map<std::string, std::vector<std::string>> preds;
    for (const auto& e : g.edges())
        preds[e.dst].push_back(e.src);
    std::map<std::string, int> depth{{root, 0}};
    std::deque<std::string> work{root};
    while (!work.empty()) {
        auto cur = work.front();
        work.pop_front();
        auto it = preds.find(cur);
        if (it == preds.end())
            continue;
        for (const auto& p : it->second) {
            if (!depth.count(p)) {
                depth[p] = depth[cur] + 1;
                work.push_back(p);
            }
        }
    }
    return depth;
}

struct ItemFacts {
    std::set<std::string> assigned;   // lvalue target bases (incl. output bindings)
    std::set<std::string> conditions; // ids of if/case/for condition expressions
    std::set<std::string> referenced; // every id appearing anywhere in the item
    std::set<std::string> bound;      // child-port qualified names (instantiations)
};

void collect_stmt_facts(const Stmt& s, ItemFacts& f) {
    auto add_all = [&](const Expr& e, std::set<std::string>& dst) {
        for (const auto& id : expr_identifiers(e))
            dst.insert(id);
    };
    switch (s.kind) {
    case StmtKind::Block:
        for (const auto& c : s.stmts)
            collect_stmt_facts(*c, f);
        break;
    case StmtKind::Blocking:
    case StmtKind::Nonblocking:
        for (const auto& t : lvalue_targets(*s.lhs))
            f.assigned.insert(t);
        add_all(*s.lhs, f.referenced);
        add_all(*s.rhs, f.referenced);
        break;
    case StmtKind::If:
        add_all(*s.cond, f.conditions);
        add_all(*s.cond, f.referenced);
        collect_stmt_facts(*s.then_branch, f);
        if (s.else_branch)
            collect_stmt_facts(*s.else_branch, f);
        break;
    case StmtKind::Case:
        add_all(*s.cond, f.conditions);
        add_all(*s.cond, f.referenced);
        for (const auto& item : s.items) {
            for (const auto& l : item.labels) {
                add_all(*l, f.conditions);
                add_all(*l, f.referenced);
            }
            collect_stmt_facts(*item.body, f);
        }
        break;
    case StmtKind::For:
        collect_stmt_facts(*s.init, f);
        add_all(*s.cond, f.conditions);
        add_all(*s.cond, f.referenced);
        collect_stmt_facts(*s.step, f);
        collect_stmt_facts(*s.body, f);
        break;
    case StmtKind::Null:
        break;
    }
}

ItemFacts collect_item_facts(const Item& item, const Ast& ast) {
    ItemFacts f;
    auto add_expr = [&](const Expr& e, std::set<std::string>& dst) {
        for (const auto& id : expr_identifiers(e))
            dst.insert(id);
    };
    auto add_range = [&](const std::optional<Range>& r) {
        if (r) {
            add_expr(*r->msb, f.referenced);
            add_expr(*r->lsb, f.referenced);
        }
    };
    add_range(item.range);
    switch (item.kind) {
    case ItemKind::NetDecl:
        for (const auto& d : item.decls)
            if (d.init) {
                f.assigned.insert(d.name);
                add_expr(*d.init, f.referenced);
            }
        break;
    case ItemKind::ParamDecl:
        for (const auto& d : item.decls)
            if (d.init)
                add_expr(*d.init, f.referenced);
        break;
    case ItemKind::PortDecl:
        break;
    case ItemKind::ContinuousAssign:
        for (const auto& a : item.assigns) {
            for (const auto& t : lvalue_targets(*a.lhs))
                f.assigned.insert(t);
            add_expr(*a.lhs, f.referenced);
            add_expr(*a.rhs, f.referenced);
        }
        break;
    case ItemKind::Always:
        for (const auto& s : item.sensitivity)
            add_expr(*s.signal, f.referenced);
        collect_stmt_facts(*item.always_body, f);
        break;
    case ItemKind::Instantiation: {
        const ModuleDecl* child = ast.find_module(item.target_module);
        std::size_t pos = 0;
        for (const auto& b : item.bindings) {
            std::string port = b.port;
            if (port.empty() && child && pos < child->ports.size())
                port = child->ports[pos].name;
            ++pos;
            if (!port.empty())
                f.bound.insert(item.target_module + "." + port);
            if (b.expr) {
                add_expr(*b.expr, f.referenced);
                // an output binding writes its parent-side expression
                for (const auto& t : lvalue_targets(*b.expr))
                    f.assigned.insert(t);
            }
        }
        for (const auto& b : item.param_overrides)
            if (b.expr)
                add_expr(*b.expr, f.referenced);
        break;
    }
    }
    return f;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
    for (const auto& x : a)
        if (b.count(x))
            return true;
    return false;
}

} // namespace

std::string RtlSlice::combined_text() const {
    std::string out;
    bool first = true;
    for (const auto& [mod, text] : fragments) {
        if (!first)
            out += "\n";
        out += text;
        first = false;
    }
    return out;
}

RtlSlice materialize_slice(const Ast& ast, const Hierarchy& hierarchy, const SourceManager& sm,
                           const SemanticGraph& g, const std::set<std::string>& nodes,
                           const std::string& root) {
    if (!nodes.count(root))
        throw SpanMismatch("slice root '" + root + "' is not part of the node set");
    if (!g.has_node(root))
        throw UnknownSignal("slice root '" + root + "' is not in the graph");

    RtlSlice slice;
    slice.root = g.node(root);
    slice.nodes.assign(nodes.begin(), nodes.end());

    // group slice bases per module
    std::map<std::string, std::set<std::string>> per_module;
    for (const auto& n : nodes) {
        if (!g.has_node(n))
            throw SpanMismatch("slice node '" + n + "' is not in the graph");
        const auto& q = g.node(n);
        per_module[q.module].insert(q.base);
    }
    for (const auto& [mod, bases] : per_module)
        if (!ast.find_module(mod))
            throw SpanMismatch("module '" + mod + "' of the slice is not in the parsed design");

    // fragment modules in chain order: hierarchy pre-order, leftovers sorted
    std::vector<std::string> order;
    for (const auto& mod : hierarchy.preorder_modules())
        if (per_module.count(mod))
            order.push_back(mod);
    for (const auto& [mod, bases] : per_module)
        if (std::find(order.begin(), order.end(), mod) == order.end())
            order.push_back(mod);

    for (const auto& mod_name : order) {
        const ModuleDecl* m = ast.find_module(mod_name);
        const auto& slice_bases = per_module.at(mod_name);

        // per-item facts, then the inclusion rule
        std::vector<ItemFacts> facts;
        facts.reserve(m->items.size());
        for (const auto& item : m->items)
            facts.push_back(collect_item_facts(item, ast));

        std::vector<bool> included(m->items.size(), false);
        std::set<std::string> needed = slice_bases;
        for (std::size_t i = 0; i < m->items.size(); ++i) {
            const Item& item = m->items[i];
            const ItemFacts& f = facts[i];
            if (item.in_header)
                continue; // the header span already carries this declaration
            bool take = false;
            switch (item.kind) {
            case ItemKind::PortDecl:
                take = true; // directions complete the header's port list
                break;
            case ItemKind::NetDecl:
            case ItemKind::ParamDecl:
                break; // handled by the declaration fixpoint below
            case ItemKind::Instantiation: {
                bool touches = intersects(f.referenced, slice_bases) || intersects(f.assigned, slice_bases);
                if (!touches)
                    for (const auto& b : f.bound)
                        if (nodes.count(b))
                            touches = true;
                take = touches;
                break;
            }
            default:
                take = intersects(f.assigned, slice_bases) || intersects(f.conditions, slice_bases);
                break;
            }
            if (take) {
                included[i] = true;
                needed.insert(f.referenced.begin(), f.referenced.end());
            }
        }

        // declaration fixpoint: pull in declarations of every needed name,
        // then names referenced by those declarations (ranges, inits)
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < m->items.size(); ++i) {
                if (included[i] || m->items[i].in_header)
                    continue;
                const Item& item = m->items[i];
                if (item.kind != ItemKind::NetDecl && item.kind != ItemKind::ParamDecl)
                    continue;
                bool declares_needed = false;
                for (const auto& d : item.decls)
                    if (needed.count(d.name))
                        declares_needed = true;
                if (!declares_needed)
                    continue;
                included[i] = true;
                changed = true;
                for (const auto& r : facts[i].referenced)
                    if (needed.insert(r).second)
                        changed = true;
            }
        }

        // assemble the fragment in original source order
        std::string text(sm.slice(m->header_span));
        std::vector<std::size_t> sel;
        for (std::size_t i = 0; i < m->items.size(); ++i)
            if (included[i])
                sel.push_back(i);
        std::sort(sel.begin(), sel.end(), [&](std::size_t a, std::size_t b) {
            return m->items[a].span.begin < m->items[b].span.begin;
        });
        for (auto i : sel) {
            text += "\n  ";
            text += std::string(sm.slice(m->items[i].span));
        }
        text += "\nendmodule\n";
        slice.fragments.emplace_back(mod_name, std::move(text));

        // names declared inside this fragment (ports, header params,
        // included declaration items)
        for (const auto& p : m->ports)
            slice.declared_names.insert(p.name);
        for (const auto& item : m->items)
            if (item.in_header)
                for (const auto& d : item.decls)
                    slice.declared_names.insert(d.name);
        for (auto i : sel) {
            const Item& item = m->items[i];
            if (item.kind == ItemKind::NetDecl || item.kind == ItemKind::ParamDecl ||
                item.kind == ItemKind::PortDecl)
                for (const auto& d : item.decls)
                    slice.declared_names.insert(d.name);
        }
    }

    slice.chain = hierarchy.chain_to(slice.root.module);
    slice.stats.node_count = static_cast<int>(nodes.size());
    std::string all = slice.combined_text();
    slice.stats.fragment_lines = static_cast<int>(std::count(all.begin(), all.end(), '\n'));
    slice.stats.token_estimate = static_cast<int>(count_tokens(all));
    return slice;
}

RtlSlice slice_signal(const Ast& ast, const Hierarchy& hierarchy, const SourceManager& sm,
                      const SemanticGraph& g, const std::string& root, const SliceOptions& opts) {
    auto nodes = backward_slice(g, root, opts.depth_limit);

    bool truncated = false;
    int dropped = 0;
    if (opts.node_cap > 0 && static_cast<int>(nodes.size()) > opts.node_cap) {
        auto depth = slice_depths(g, root);
        std::vector<std::string> ordered(nodes.begin(), nodes.end());
        // nearest first, lexicographic inside a depth layer
        std::sort(ordered.begin(), ordered.end(), [&](const std::string& a, const std::string& b) {
            int da = depth.count(a) ? depth.at(a) : 1 << 20;
            int db = depth.count(b) ? depth.at(b) : 1 << 20;
            if (da != db)
                return da < db;
            return a < b;
        });
        dropped = static_cast<int>(ordered.size()) - opts.node_cap;
        ordered.resize(opts.node_cap);
        nodes = std::set<std::string>(ordered.begin(), ordered.end());
        nodes.insert(root);
        truncated = true;
    }

    RtlSlice slice = materialize_slice(ast, hierarchy, sm, g, nodes, root);
    slice.stats.truncated = truncated;
    slice.stats.dropped_nodes = dropped;
    return slice;
}

void write_slice_dir(const RtlSlice& slice, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "slice.v", std::ios::binary);
        out << slice.combined_text();
    }
    {
        std::ofstream out(fs::path(dir) / "chain.txt", std::ios::binary);
        out << slice.chain << "\n";
    }
    nlohmann::ordered_json j;
    j["schema"] = "keysig-slice-meta/1";
    j["root"] = {{"qualified_name", slice.root.name},
                 {"module", slice.root.module},
                 {"class", to_string(slice.root.klass)},
                 {"combinational", slice.root.combinational}};
    j["chain"] = slice.chain;
    j["nodes"] = slice.nodes;
    j["declared"] = std::vector<std::string>(slice.declared_names.begin(), slice.declared_names.end());
    j["fragments"] = nlohmann::ordered_json::array();
    for (const auto& [mod, text] : slice.fragments)
        j["fragments"].push_back(mod);
    j["stats"] = {{"node_count", slice.stats.node_count},
                  {"fragment_lines", slice.stats.fragment_lines},
                  {"token_estimate", slice.stats.token_estimate},
                  {"truncated", slice.stats.truncated},
                  {"dropped_nodes", slice.stats.dropped_nodes}};
    std::ofstream out(fs::path(dir) / "meta.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

RtlSlice read_slice_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    auto read_file = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in)
            throw IoError("cannot open '" + p.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    RtlSlice slice;
    std::string text = read_file(fs::path(dir) / "slice.v");
    nlohmann::json j = nlohmann::json::parse(read_file(fs::path(dir) / "meta.json"));
    if (!j.contains("schema") || j["schema"] != "keysig-slice-meta/1")
        throw Error("slice meta.json has missing or unsupported schema field");
    slice.root.name = j["root"]["qualified_name"].get<std::string>();
    slice.root.module = j["root"]["module"].get<std::string>();
    slice.root.base = slice.root.name.size() > slice.root.module.size() + 1
                          ? slice.root.name.substr(slice.root.module.size() + 1)
                          : slice.root.name;
    slice.root.klass = signal_class_from_string(j["root"]["class"].get<std::string>());
    slice.root.combinational = j["root"]["combinational"].get<bool>();
    slice.chain = j["chain"].get<std::string>();
    slice.nodes = j["nodes"].get<std::vector<std::string>>();
    for (const auto& d : j["declared"])
        slice.declared_names.insert(d.get<std::string>());
    slice.fragments.emplace_back(slice.root.module, text);
    slice.stats.node_count = j["stats"]["node_count"].get<int>();
    slice.stats.fragment_lines = j["stats"]["fragment_lines"].get<int>();
    slice.stats.token_estimate = j["stats"]["token_estimate"].get<int>();
    slice.stats.truncated = j["stats"]["truncated"].get<bool>();
    slice.stats.dropped_nodes = j["stats"]["dropped_nodes"].get<int>();
    return slice;
}

} // namespace keysig
