// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "keysig/ast.hpp"
#include "keysig/diagnostics.hpp"
#include "keysig/graph.hpp"
#include "keysig/hierarchy.hpp"

namespace keysig {

/// Assigns every declared signal and port of every module exactly one
/// functional class and computes the combinational / parameter /
/// sensitivity-only properties.
///
/// Classification rules, applied by priority:
///   output_port     output or inout port
///   state_register  assigned anywhere inside an always block
///   control_signal  appears in an if / case / for condition expression
///                   (case subjects and item labels included)
///   internal_signal everything else
std::vector<QualifiedSignal> classify_signals(const Ast& ast);

/// Builds the semantic dependency graph:
///   data      RHS identifier -> each assignment target
///   temporal  same, when the assignment sits in a posedge/negedge always
///   control   condition identifiers -> every signal assigned in the
///             guarded region, at every nesting depth
///   module    across instantiation port bindings, oriented by port
///             direction (inout contributes both directions)
/// Constants never form nodes; (src, dst, kind) triples are deduplicated.
/// Unresolved references are reported as diagnostics and skipped; the
/// graph for the resolved portion is still returned.
SemanticGraph extract_edges(const Ast& ast, const std::vector<QualifiedSignal>& signals,
                            const Hierarchy& hierarchy, const SourceManager& sm,
                            DiagnosticEngine& diags);

/// classify_signals + extract_edges in one step.
SemanticGraph build_graph(const Ast& ast, const Hierarchy& hierarchy, const SourceManager& sm,
                          DiagnosticEngine& diags);

} // namespace keysig
