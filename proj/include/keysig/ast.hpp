// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "keysig/source.hpp"

namespace keysig {

// ---- expressions -----------------------------------------------------

enum class ExprKind {
    Identifier,
    Number,
    String,
    Unary,
    Binary,
    Ternary,
    Select,    // base[index] or nested base[i][j]
    PartSelect, // base[msb:lsb], base[e+:w], base[e-:w]
    Concat,    // {a, b, c}
    Repeat,    // {n{...}}
};

enum class PartSelectKind { Range, IndexedUp, IndexedDown };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    ExprKind kind;
    SourceSpan span;

    std::string text;   // identifier name, number text, operator, string body
    std::vector<ExprPtr> operands;
    PartSelectKind part_kind = PartSelectKind::Range;

    static ExprPtr make(ExprKind kind, SourceSpan span, std::string text = {});
};

// ---- statements ------------------------------------------------------

enum class StmtKind {
    Block,       // begin ... end
    Blocking,    // a = b;
    Nonblocking, // a <= b;
    If,
    Case,
    For,
    Null, // lone ';'
};

enum class CaseKind { Case, Casex, Casez };

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct CaseItem {
    std::vector<ExprPtr> labels; // empty means `default`
    StmtPtr body;
    SourceSpan span;
};

struct Stmt {
    StmtKind kind;
    SourceSpan span;

    // Block
    std::vector<StmtPtr> stmts;
    std::string label;
    // Blocking / Nonblocking
    ExprPtr lhs;
    ExprPtr rhs;
    // If / Case / For
    ExprPtr cond;
    StmtPtr then_branch;
    StmtPtr else_branch;
    CaseKind case_kind = CaseKind::Case;
    std::vector<CaseItem> items;
    StmtPtr init; // For
    StmtPtr step; // For
    StmtPtr body; // For

    static StmtPtr make(StmtKind kind, SourceSpan span);
};

// ---- declarations and module items ------------------------------------

enum class PortDir { Input, Output, Inout };
enum class NetKind { Wire, Reg, Integer };

struct Range {
    ExprPtr msb;
    ExprPtr lsb;
};

struct Declarator {
    std::string name;
    ExprPtr init; // wire w = expr; parameter P = expr;
    SourceSpan span;
};

enum class ItemKind {
    NetDecl,
    ParamDecl,
    PortDecl, // non-ANSI direction declaration
    ContinuousAssign,
    Always,
    Instantiation,
};

enum class EdgeSense { Level, Posedge, Negedge };

struct SensItem {
    EdgeSense sense = EdgeSense::Level;
    ExprPtr signal;
};

struct AssignPair {
    ExprPtr lhs;
    ExprPtr rhs;
    SourceSpan span;
};

struct PortBinding {
    std::string port; // empty for positional
    ExprPtr expr;     // null for unconnected .p()
    SourceSpan span;
};

struct Item {
    ItemKind kind;
    SourceSpan span;

    // NetDecl
    NetKind net_kind = NetKind::Wire;
    bool is_signed = false;
    std::optional<Range> range;
    std::vector<Declarator> decls;
    // ParamDecl
    bool localparam = false;
    bool in_header = false; // declared inside `module m #(...)`; the header span covers it
    // PortDecl
    PortDir dir = PortDir::Input;
    bool port_reg = false; // `output reg q;`
    // ContinuousAssign
    std::vector<AssignPair> assigns;
    // Always
    bool sens_star = false;
    std::vector<SensItem> sensitivity;
    StmtPtr always_body;
    // Instantiation
    std::string target_module;
    std::string instance_name;
    std::vector<PortBinding> bindings;
    std::vector<PortBinding> param_overrides;
};

struct Port {
    std::string name;
    std::optional<PortDir> dir; // unset for non-ANSI until the direction decl is seen
    bool is_reg = false;
    bool is_signed = false;
    std::optional<Range> range;
    SourceSpan span;
};

struct ModuleDecl {
    std::string name;
    bool ansi_ports = false;
    std::vector<Port> ports;
    std::vector<Item> items;
    SourceSpan span;        // full module ... endmodule
    SourceSpan header_span; // module ... ) ;
};

struct Ast {
    std::vector<ModuleDecl> modules;

    const ModuleDecl* find_module(std::string_view name) const;
};

// ---- helpers -----------------------------------------------------------

/// S-expression dump without spans; structural equality compares dumps.
std::string dump(const Expr& e);
std::string dump(const Stmt& s);
std::string dump(const Item& it);
std::string dump(const ModuleDecl& m);
std::string dump(const Ast& ast);

/// Calls fn for every identifier in the expression tree (read positions,
/// index positions, everything).
void for_each_identifier(const Expr& e, const std::function<void(const Expr&)>& fn);

/// Identifier names used by an expression, deduplicated, in first-seen order.
std::vector<std::string> expr_identifiers(const Expr& e);

/// Base names written by an assignment target: identifiers, the base of
/// bit/part selects, and all elements of a concatenation. Index
/// expressions are reads and are not included.
std::vector<std::string> lvalue_targets(const Expr& e);

/// True when the sensitivity list contains posedge or negedge.
bool is_edge_triggered(const Item& always);

} // namespace keysig
