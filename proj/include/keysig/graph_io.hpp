// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "keysig/graph.hpp"

namespace keysig {

/// Serializes the graph under the "keysig-graph/1" schema. Deterministic:
/// nodes sorted by id, edges by (src, dst, kind).
std::string graph_to_json(const SemanticGraph& g);

/// Inverse of graph_to_json. Throws Error on schema mismatch.
SemanticGraph graph_from_json(const std::string& json_text);

/// Graphviz export; nodes of the same module share a fill color.
std::string graph_to_dot(const SemanticGraph& g);

} // namespace keysig
