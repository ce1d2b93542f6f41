// SPDX-License-Identifier: Apache-2.0
#include "keysig/graph_build.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>

namespace keysig {

namespace {

enum class DefContext { Continuous, CombAlways, EdgeAlways, Instance };

struct SignalState {
    bool assigned_in_always = false;
    bool in_condition = false;
    std::vector<DefContext> def_contexts;
    std::vector<SourceSpan> def_spans;
    int sens_uses = 0;
    int other_uses = 0;
};

struct ModuleIndex {
    const ModuleDecl* decl = nullptr;
    // declaration order preserved for deterministic node layout
    std::vector<std::string> order;
    std::map<std::string, std::optional<PortDir>> dir;
    std::set<std::string> params;

    bool declared(const std::string& n) const { return dir.count(n) > 0; }
};

ModuleIndex index_module(const ModuleDecl& m) {
    ModuleIndex idx;
    idx.decl = &m;
    auto add = [&](const std::string& n) {
        if (!idx.dir.count(n)) {
            idx.dir[n] = std::nullopt;
            idx.order.push_back(n);
        }
    };
    for (const auto& p : m.ports) {
        add(p.name);
        if (p.dir)
            idx.dir[p.name] = p.dir;
    }
    for (const auto& item : m.items) {
        if (item.kind == ItemKind::NetDecl) {
            for (const auto& d : item.decls)
                add(d.name);
        } else if (item.kind == ItemKind::ParamDecl) {
            for (const auto& d : item.decls) {
                add(d.name);
                idx.params.insert(d.name);
            }
        } else if (item.kind == ItemKind::PortDecl) {
            for (const auto& d : item.decls) {
                add(d.name);
                idx.dir[d.name] = item.dir;
            }
        }
    }
    return idx;
}

// Shared traversal that feeds both classification and edge extraction.
// Callbacks receive base names local to the module being walked.
struct WalkHooks {
    // assignment inside the module: targets, rhs sources, context, span
    std::function<void(const std::vector<std::string>&, const std::vector<std::string>&, DefContext,
                       SourceSpan)>
        on_assign;
    // ids of a condition expression governing a region (per control layer)
    std::function<void(const std::vector<std::string>&)> on_condition_enter;
    std::function<void()> on_condition_exit;
    // any identifier use outside sensitivity lists
    std::function<void(const std::string&, SourceSpan)> on_use;
    // identifier use inside a sensitivity list
    std::function<void(const std::string&, SourceSpan)> on_sens_use;
    // instantiation encountered
    std::function<void(const Item&)> on_instance;
};

void walk_uses(const Expr& e, const WalkHooks& h) {
    if (h.on_use)
        for_each_identifier(e, [&](const Expr& id) { h.on_use(id.text, id.span); });
}

void walk_stmt(const Stmt& s, bool edge_ctx, const WalkHooks& h);

void walk_assignment(const Stmt& s, bool edge_ctx, const WalkHooks& h) {
    walk_uses(*s.lhs, h);
    walk_uses(*s.rhs, h);
    if (h.on_assign)
        h.on_assign(lvalue_targets(*s.lhs), expr_identifiers(*s.rhs),
                    edge_ctx ? DefContext::EdgeAlways : DefContext::CombAlways, s.span);
}

void walk_stmt(const Stmt& s, bool edge_ctx, const WalkHooks& h) {
    switch (s.kind) {
    case StmtKind::Block:
        for (const auto& c : s.stmts)
            walk_stmt(*c, edge_ctx, h);
        break;
    case StmtKind::Blocking:
    case StmtKind::Nonblocking:
        walk_assignment(s, edge_ctx, h);
        break;
    case StmtKind::If: {
        walk_uses(*s.cond, h);
        auto ids = expr_identifiers(*s.cond);
        if (h.on_condition_enter)
            h.on_condition_enter(ids);
        walk_stmt(*s.then_branch, edge_ctx, h);
        if (s.else_branch)
            walk_stmt(*s.else_branch, edge_ctx, h);
        if (h.on_condition_exit)
            h.on_condition_exit();
        break;
    }
    case StmtKind::Case: {
        walk_uses(*s.cond, h);
        auto subject = expr_identifiers(*s.cond);
        if (h.on_condition_enter)
            h.on_condition_enter(subject);
        for (const auto& item : s.items) {
            std::vector<std::string> label_ids;
            std::set<std::string> seen;
            for (const auto& l : item.labels) {
                walk_uses(*l, h);
                for (const auto& id : expr_identifiers(*l))
                    if (seen.insert(id).second)
                        label_ids.push_back(id);
            }
            if (h.on_condition_enter)
                h.on_condition_enter(label_ids);
            walk_stmt(*item.body, edge_ctx, h);
            if (h.on_condition_exit)
                h.on_condition_exit();
        }
        if (h.on_condition_exit)
            h.on_condition_exit();
        break;
    }
    case StmtKind::For: {
        // the init assignment runs unconditionally; step and body are
        // guarded by the loop condition
        walk_stmt(*s.init, edge_ctx, h);
        walk_uses(*s.cond, h);
        auto ids = expr_identifiers(*s.cond);
        if (h.on_condition_enter)
            h.on_condition_enter(ids);
        walk_stmt(*s.step, edge_ctx, h);
        walk_stmt(*s.body, edge_ctx, h);
        if (h.on_condition_exit)
            h.on_condition_exit();
        break;
    }
    case StmtKind::Null:
        break;
    }
}

void walk_module(const ModuleDecl& m, const WalkHooks& h) {
    auto use_range = [&](const std::optional<Range>& r) {
        if (r) {
            walk_uses(*r->msb, h);
            walk_uses(*r->lsb, h);
        }
    };
    for (const auto& p : m.ports)
        use_range(p.range);
    for (const auto& item : m.items) {
        use_range(item.range);
        switch (item.kind) {
        case ItemKind::NetDecl:
            for (const auto& d : item.decls) {
                if (d.init) {
                    walk_uses(*d.init, h);
                    if (h.on_assign)
                        h.on_assign({d.name}, expr_identifiers(*d.init), DefContext::Continuous,
                                    item.span);
                }
            }
            break;
        case ItemKind::ParamDecl:
            for (const auto& d : item.decls)
                if (d.init)
                    walk_uses(*d.init, h);
            break;
        case ItemKind::PortDecl:
            break;
        case ItemKind::ContinuousAssign:
            for (const auto& a : item.assigns) {
                walk_uses(*a.lhs, h);
                walk_uses(*a.rhs, h);
                if (h.on_assign)
                    h.on_assign(lvalue_targets(*a.lhs), expr_identifiers(*a.rhs),
                                DefContext::Continuous, item.span);
            }
            break;
        case ItemKind::Always: {
            if (h.on_sens_use)
                for (const auto& s : item.sensitivity)
                    for_each_identifier(*s.signal,
                                        [&](const Expr& id) { h.on_sens_use(id.text, id.span); });
            walk_stmt(*item.always_body, is_edge_triggered(item), h);
            break;
        }
        case ItemKind::Instantiation:
            for (const auto& b : item.bindings)
                if (b.expr)
                    walk_uses(*b.expr, h);
            for (const auto& b : item.param_overrides)
                if (b.expr)
                    walk_uses(*b.expr, h);
            if (h.on_instance)
                h.on_instance(item);
            break;
        }
    }
}

// Resolves a child module's port list in binding order. Returns pairs of
// (port name, direction); positional bindings map by declaration order.
std::optional<PortDir> port_direction(const ModuleIndex& child, const std::string& port) {
    auto it = child.dir.find(port);
    if (it == child.dir.end())
        return std::nullopt;
    return it->second;
}

} // namespace

std::vector<QualifiedSignal> classify_signals(const Ast& ast) {
    std::vector<QualifiedSignal> out;
    std::map<std::string, ModuleIndex> indices;
    for (const auto& m : ast.modules)
        indices.emplace(m.name, index_module(m));

    for (const auto& m : ast.modules) {
        const ModuleIndex& idx = indices.at(m.name);
        std::map<std::string, SignalState> state;

        WalkHooks h;
        h.on_assign = [&](const std::vector<std::string>& targets, const std::vector<std::string>&,
                          DefContext ctx, SourceSpan span) {
            for (const auto& t : targets) {
                if (!idx.declared(t))
                    continue;
                auto& st = state[t];
                st.def_contexts.push_back(ctx);
                st.def_spans.push_back(span);
                if (ctx == DefContext::CombAlways || ctx == DefContext::EdgeAlways)
                    st.assigned_in_always = true;
            }
        };
        h.on_condition_enter = [&](const std::vector<std::string>& ids) {
            for (const auto& id : ids)
                if (idx.declared(id))
                    state[id].in_condition = true;
        };
        h.on_use = [&](const std::string& id, SourceSpan) {
            if (idx.declared(id))
                ++state[id].other_uses;
        };
        h.on_sens_use = [&](const std::string& id, SourceSpan) {
            if (idx.declared(id))
                ++state[id].sens_uses;
        };
        h.on_instance = [&](const Item& inst) {
            auto child_it = indices.find(inst.target_module);
            if (child_it == indices.end())
                return;
            const ModuleIndex& child = child_it->second;
            std::size_t pos = 0;
            for (const auto& b : inst.bindings) {
                std::string port = b.port;
                if (port.empty()) {
                    if (pos < child.decl->ports.size())
                        port = child.decl->ports[pos].name;
                    ++pos;
                }
                if (port.empty() || !b.expr)
                    continue;
                auto dir = port_direction(child, port);
                if (dir && (*dir == PortDir::Output || *dir == PortDir::Inout)) {
                    for (const auto& t : lvalue_targets(*b.expr)) {
                        if (!idx.declared(t))
                            continue;
                        auto& st = state[t];
                        st.def_contexts.push_back(DefContext::Instance);
                        st.def_spans.push_back(inst.span);
                    }
                }
            }
        };
        walk_module(m, h);

        for (const auto& name : idx.order) {
            const SignalState& st = state[name]; // default state for untouched signals
            QualifiedSignal q;
            q.module = m.name;
            q.base = name;
            q.name = m.name + "." + name;
            auto dir = idx.dir.at(name);
            if (dir && (*dir == PortDir::Output || *dir == PortDir::Inout))
                q.klass = SignalClass::OutputPort;
            else if (st.assigned_in_always)
                q.klass = SignalClass::StateRegister;
            else if (st.in_condition)
                q.klass = SignalClass::ControlSignal;
            else
                q.klass = SignalClass::InternalSignal;
            q.combinational = true;
            for (auto ctx : st.def_contexts)
                if (ctx != DefContext::Continuous && ctx != DefContext::CombAlways)
                    q.combinational = false;
            q.parameter = idx.params.count(name) > 0;
            q.sens_only = st.sens_uses > 0 && st.other_uses == 0;
            q.defining_spans = st.def_spans;
            out.push_back(std::move(q));
        }
    }
    return out;
}

SemanticGraph extract_edges(const Ast& ast, const std::vector<QualifiedSignal>& signals,
                            const Hierarchy& hierarchy, const SourceManager& sm,
                            DiagnosticEngine& diags) {
    (void)hierarchy; // binding directions come from the child declarations
    SemanticGraph g;
    for (const auto& q : signals)
        g.add_node(q);

    std::map<std::string, ModuleIndex> indices;
    for (const auto& m : ast.modules)
        indices.emplace(m.name, index_module(m));

    for (const auto& m : ast.modules) {
        const ModuleIndex& idx = indices.at(m.name);
        std::vector<std::vector<std::string>> control_stack;

        auto qualify = [&](const std::string& base) { return m.name + "." + base; };
        auto resolved = [&](const std::string& base, SourceSpan span) {
            if (idx.declared(base))
                return true;
            diags.report(Severity::Error, sm, span,
                         "unresolved identifier '" + base + "' in module '" + m.name + "'");
            return false;
        };

        WalkHooks h;
        h.on_assign = [&](const std::vector<std::string>& targets,
                          const std::vector<std::string>& sources, DefContext ctx, SourceSpan span) {
            EdgeKind kind = ctx == DefContext::EdgeAlways ? EdgeKind::Temporal : EdgeKind::Data;
            for (const auto& t : targets) {
                if (!resolved(t, span))
                    continue;
                for (const auto& s : sources) {
                    if (!resolved(s, span))
                        continue;
                    g.add_edge(DepEdge{qualify(s), qualify(t), kind, span});
                }
                for (const auto& layer : control_stack)
                    for (const auto& c : layer)
                        g.add_edge(DepEdge{qualify(c), qualify(t), EdgeKind::Control, span});
            }
        };
        h.on_condition_enter = [&](const std::vector<std::string>& ids) {
            std::vector<std::string> layer;
            for (const auto& id : ids)
                if (idx.declared(id))
                    layer.push_back(id);
            control_stack.push_back(std::move(layer));
        };
        h.on_condition_exit = [&]() { control_stack.pop_back(); };
        h.on_use = [&](const std::string& id, SourceSpan span) { resolved(id, span); };
        h.on_instance = [&](const Item& inst) {
            auto child_it = indices.find(inst.target_module);
            if (child_it == indices.end()) {
                diags.report(Severity::Error, sm, inst.span,
                             "module '" + inst.target_module + "' instantiated by '" + m.name +
                                 "' is not defined");
                return;
            }
            const ModuleIndex& child = child_it->second;
            std::size_t pos = 0;
            for (const auto& b : inst.bindings) {
                std::string port = b.port;
                if (port.empty()) {
                    if (pos >= child.decl->ports.size()) {
                        diags.report(Severity::Error, sm, b.span,
                                     "too many positional connections for module '" +
                                         inst.target_module + "'");
                        ++pos;
                        continue;
                    }
                    port = child.decl->ports[pos].name;
                    ++pos;
                }
                if (!b.expr)
                    continue;
                auto dir = port_direction(child, port);
                if (!dir) {
                    diags.report(Severity::Error, sm, b.span,
                                 "module '" + inst.target_module + "' has no port '" + port + "'");
                    continue;
                }
                std::string child_q = inst.target_module + "." + port;
                if (*dir == PortDir::Input || *dir == PortDir::Inout) {
                    for (const auto& u : expr_identifiers(*b.expr))
                        if (resolved(u, b.span))
                            g.add_edge(DepEdge{qualify(u), child_q, EdgeKind::Module, b.span});
                }
                if (*dir == PortDir::Output || *dir == PortDir::Inout) {
                    for (const auto& v : lvalue_targets(*b.expr))
                        if (resolved(v, b.span))
                            g.add_edge(DepEdge{child_q, qualify(v), EdgeKind::Module, b.span});
                }
            }
        };
        walk_module(m, h);
    }
    return g;
}

SemanticGraph build_graph(const Ast& ast, const Hierarchy& hierarchy, const SourceManager& sm,
                          DiagnosticEngine& diags) {
    auto signals = classify_signals(ast);
    return extract_edges(ast, signals, hierarchy, sm, diags);
}

} // namespace keysig
