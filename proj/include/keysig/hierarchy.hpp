// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "keysig/ast.hpp"
#include "keysig/diagnostics.hpp"

namespace keysig {

/// Instantiation tree of a design. Edges are stored per parent module
/// declaration in source order.
struct Hierarchy {
    struct Edge {
        std::string instance;
        std::string child_module;
    };

    std::string top;
    std::map<std::string, std::vector<Edge>> children;

    /// Dotted module-name path from the top to `module`, following the
    /// first pre-order path ("top.mid.leaf"). A module outside the tree
    /// yields just its own name.
    std::string chain_to(const std::string& module) const;

    /// Modules reachable from the top (top first, pre-order, no repeats).
    std::vector<std::string> preorder_modules() const;
};

/// Builds the instantiation tree rooted at `top`. Pass an empty string to
/// auto-detect the unique module never instantiated by another. Throws
/// AmbiguousTop, CyclicInstantiation or UnresolvedModule.
Hierarchy resolve_hierarchy(const Ast& ast, const std::string& top = {});

} // namespace keysig
