// SPDX-License-Identifier: Apache-2.0
#include "keysig/ast.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace keysig {

ExprPtr Expr::make(ExprKind kind, SourceSpan span, std::string text) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->span = span;
    e->text = std::move(text);
    return e;
}

StmtPtr Stmt::make(StmtKind kind, SourceSpan span) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->span = span;
    return s;
}

const ModuleDecl* Ast::find_module(std::string_view name) const {
    for (const auto& m : modules)
        if (m.name == name)
            return &m;
    return nullptr;
}

// ---- dump ---------------------------------------------------------------

namespace {

void dump_expr(const Expr& e, std::ostream& os) {
    switch (e.kind) {
    case ExprKind::Identifier:
        os << "(id " << e.text << ')';
        break;
    case ExprKind::Number:
        os << "(num " << e.text << ')';
        break;
    case ExprKind::String:
        os << "(str " << e.text << ')';
        break;
    case ExprKind::Unary:
        os << "(u" << e.text << ' ';
        dump_expr(*e.operands[0], os);
        os << ')';
        break;
    case ExprKind::Binary:
        os << '(' << e.text << ' ';
        dump_expr(*e.operands[0], os);
        os << ' ';
        dump_expr(*e.operands[1], os);
        os << ')';
        break;
    case ExprKind::Ternary:
        os << "(?: ";
        dump_expr(*e.operands[0], os);
        os << ' ';
        dump_expr(*e.operands[1], os);
        os << ' ';
        dump_expr(*e.operands[2], os);
        os << ')';
        break;
    case ExprKind::Select:
        os << "(sel ";
        dump_expr(*e.operands[0], os);
        os << ' ';
        dump_expr(*e.operands[1], os);
        os << ')';
        break;
    case ExprKind::PartSelect: {
        const char* k = e.part_kind == PartSelectKind::Range        ? "ps"
                        : e.part_kind == PartSelectKind::IndexedUp ? "ps+"
                                                                    : "ps-";
        os << '(' << k << ' ';
        dump_expr(*e.operands[0], os);
        os << ' ';
        dump_expr(*e.operands[1], os);
        os << ' ';
        dump_expr(*e.operands[2], os);
        os << ')';
        break;
    }
    case ExprKind::Concat:
        os << "(cat";
        for (const auto& op : e.operands) {
            os << ' ';
            dump_expr(*op, os);
        }
        os << ')';
        break;
    case ExprKind::Repeat:
        os << "(rep ";
        dump_expr(*e.operands[0], os);
        os << ' ';
        dump_expr(*e.operands[1], os);
        os << ')';
        break;
    }
}

void dump_stmt(const Stmt& s, std::ostream& os) {
    switch (s.kind) {
    case StmtKind::Block:
        os << "(block";
        for (const auto& c : s.stmts) {
            os << ' ';
            dump_stmt(*c, os);
        }
        os << ')';
        break;
    case StmtKind::Blocking:
    case StmtKind::Nonblocking:
        os << (s.kind == StmtKind::Blocking ? "(= " : "(<= ");
        dump_expr(*s.lhs, os);
        os << ' ';
        dump_expr(*s.rhs, os);
        os << ')';
        break;
    case StmtKind::If:
        os << "(if ";
        dump_expr(*s.cond, os);
        os << ' ';
        dump_stmt(*s.then_branch, os);
        if (s.else_branch) {
            os << ' ';
            dump_stmt(*s.else_branch, os);
        }
        os << ')';
        break;
    case StmtKind::Case: {
        const char* k = s.case_kind == CaseKind::Case ? "case" : s.case_kind == CaseKind::Casex ? "casex" : "casez";
        os << '(' << k << ' ';
        dump_expr(*s.cond, os);
        for (const auto& item : s.items) {
            os << " (item";
            if (item.labels.empty()) {
                os << " default";
            } else {
                for (const auto& l : item.labels) {
                    os << ' ';
                    dump_expr(*l, os);
                }
            }
            os << ' ';
            dump_stmt(*item.body, os);
            os << ')';
        }
        os << ')';
        break;
    }
    case StmtKind::For:
        os << "(for ";
        dump_stmt(*s.init, os);
        os << ' ';
        dump_expr(*s.cond, os);
        os << ' ';
        dump_stmt(*s.step, os);
        os << ' ';
        dump_stmt(*s.body, os);
        os << ')';
        break;
    case StmtKind::Null:
        os << "(null)";
        break;
    }
}

void dump_range(const std::optional<Range>& r, std::ostream& os) {
    if (!r)
        return;
    os << " [";
    dump_expr(*r->msb, os);
    os << ':';
    dump_expr(*r->lsb, os);
    os << ']';
}

void dump_item(const Item& it, std::ostream& os) {
    switch (it.kind) {
    case ItemKind::NetDecl: {
        const char* k = it.net_kind == NetKind::Wire ? "wire" : it.net_kind == NetKind::Reg ? "reg" : "integer";
        os << "(decl " << k;
        if (it.is_signed)
            os << " signed";
        dump_range(it.range, os);
        for (const auto& d : it.decls) {
            os << ' ' << d.name;
            if (d.init) {
                os << '=';
                dump_expr(*d.init, os);
            }
        }
        os << ')';
        break;
    }
    case ItemKind::ParamDecl:
        os << (it.localparam ? "(localparam" : "(parameter");
        dump_range(it.range, os);
        for (const auto& d : it.decls) {
            os << ' ' << d.name << '=';
            dump_expr(*d.init, os);
        }
        os << ')';
        break;
    case ItemKind::PortDecl: {
        const char* d = it.dir == PortDir::Input ? "input" : it.dir == PortDir::Output ? "output" : "inout";
        os << "(portdecl " << d;
        if (it.port_reg)
            os << " reg";
        if (it.is_signed)
            os << " signed";
        dump_range(it.range, os);
        for (const auto& dd : it.decls)
            os << ' ' << dd.name;
        os << ')';
        break;
    }
    case ItemKind::ContinuousAssign:
        os << "(assign";
        for (const auto& a : it.assigns) {
            os << " (";
            dump_expr(*a.lhs, os);
            os << ' ';
            dump_expr(*a.rhs, os);
            os << ')';
        }
        os << ')';
        break;
    case ItemKind::Always:
        os << "(always";
        if (it.sens_star) {
            os << " *";
        } else {
            for (const auto& s : it.sensitivity) {
                os << ' ';
                if (s.sense == EdgeSense::Posedge)
                    os << "pos:";
                else if (s.sense == EdgeSense::Negedge)
                    os << "neg:";
                dump_expr(*s.signal, os);
            }
        }
        os << ' ';
        dump_stmt(*it.always_body, os);
        os << ')';
        break;
    case ItemKind::Instantiation:
        os << "(inst " << it.target_module << ' ' << it.instance_name;
        for (const auto& p : it.param_overrides) {
            os << " #" << (p.port.empty() ? "?" : p.port) << '=';
            if (p.expr)
                dump_expr(*p.expr, os);
        }
        for (const auto& b : it.bindings) {
            os << " ." << (b.port.empty() ? "?" : b.port) << '(';
            if (b.expr)
                dump_expr(*b.expr, os);
            os << ')';
        }
        os << ')';
        break;
    }
}

} // namespace

std::string dump(const Expr& e) {
    std::ostringstream os;
    dump_expr(e, os);
    return os.str();
}
std::string dump(const Stmt& s) {
    std::ostringstream os;
    dump_stmt(s, os);
    return os.str();
}
std::string dump(const Item& it) {
    std::ostringstream os;
    dump_item(it, os);
    return os.str();
}
std::string dump(const ModuleDecl& m) {
    std::ostringstream os;
    os << "(module " << m.name << " (ports";
    for (const auto& p : m.ports) {
        os << " (" << p.name;
        if (p.dir)
            os << ' ' << (*p.dir == PortDir::Input ? "in" : *p.dir == PortDir::Output ? "out" : "inout");
        if (p.is_reg)
            os << " reg";
        if (p.is_signed)
            os << " signed";
        dump_range(p.range, os);
        os << ')';
    }
    os << ')';
    for (const auto& it : m.items) {
        os << ' ';
        dump_item(it, os);
    }
    os << ')';
    return os.str();
}
std::string dump(const Ast& ast) {
    std::ostringstream os;
    for (const auto& m : ast.modules)
        os << dump(m) << '\n';
    return os.str();
}

// ---- identifier walks ----------------------------------------------------

void for_each_identifier(const Expr& e, const std::function<void(const Expr&)>& fn) {
    if (e.kind == ExprKind::Identifier)
        fn(e);
    for (const auto& op : e.operands)
        if (op)
            for_each_identifier(*op, fn);
}

std::vector<std::string> expr_identifiers(const Expr& e) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for_each_identifier(e, [&](const Expr& id) {
        if (seen.insert(id.text).second)
            out.push_back(id.text);
    });
    return out;
}

std::vector<std::string> lvalue_targets(const Expr& e) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    std::function<void(const Expr&)> walk = [&](const Expr& x) {
        switch (x.kind) {
        case ExprKind::Identifier:
            if (seen.insert(x.text).second)
                out.push_back(x.text);
            break;
        case ExprKind::Select:
        case ExprKind::PartSelect:
            walk(*x.operands[0]);
            break;
        case ExprKind::Concat:
            for (const auto& op : x.operands)
                walk(*op);
            break;
        default:
            break; // anything else is not a writable target
        }
    };
    walk(e);
    return out;
}

bool is_edge_triggered(const Item& always) {
    for (const auto& s : always.sensitivity)
        if (s.sense == EdgeSense::Posedge || s.sense == EdgeSense::Negedge)
            return true;
    return false;
}

} // namespace keysig
