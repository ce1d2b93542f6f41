// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "keysig/ast.hpp"
#include "keysig/graph.hpp"
#include "keysig/hierarchy.hpp"

namespace keysig {

/// Backward closure over reversed edges of every kind, up to depth_limit
/// levels (unlimited when unset). The root is always included.
std::set<std::string> backward_slice(const SemanticGraph& g, const std::string& root,
                                     std::optional<int> depth_limit = std::nullopt);

struct SliceStats {
    int node_count = 0;
    int fragment_lines = 0;
    int token_estimate = 0;
    bool truncated = false;
    int dropped_nodes = 0;
};

/// Source materialization of one backward slice: per-module fragments
/// (module header, port direction declarations, declarations of every
/// referenced signal, and each statement that assigns a slice signal or
/// whose condition mentions one), the instantiation chain, and size
/// stats.
struct RtlSlice {
    QualifiedSignal root;
    std::vector<std::string> nodes; // sorted qualified names
    std::vector<std::pair<std::string, std::string>> fragments; // (module, text), chain order
    std::string chain;
    std::set<std::string> declared_names; // base names declared across fragments
    SliceStats stats;

    std::string combined_text() const;
};

RtlSlice materialize_slice(const Ast& ast, const Hierarchy& hierarchy, const SourceManager& sm,
                           const SemanticGraph& g, const std::set<std::string>& nodes,
                           const std::string& root);

struct SliceOptions {
    std::optional<int> depth_limit; // unset = unlimited
    int node_cap = 500;             // farthest-first truncation above this
};

/// backward_slice + node-cap truncation + materialize in one step.
RtlSlice slice_signal(const Ast& ast, const Hierarchy& hierarchy, const SourceManager& sm,
                      const SemanticGraph& g, const std::string& root, const SliceOptions& opts = {});

/// Writes slice.v, chain.txt and meta.json into dir (created if needed).
void write_slice_dir(const RtlSlice& slice, const std::string& dir);

/// Rebuilds an RtlSlice from a directory written by write_slice_dir.
RtlSlice read_slice_dir(const std::string& dir);

} // namespace keysig
