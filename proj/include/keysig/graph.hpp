// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "keysig/source.hpp"

namespace keysig {

/// Functional signal classes. A signal matching several rules receives a
/// single label by priority OutputPort > StateRegister > ControlSignal >
/// InternalSignal.
enum class SignalClass { StateRegister, ControlSignal, OutputPort, InternalSignal };

enum class EdgeKind { Data, Temporal, Control, Module };

const char* to_string(SignalClass c);
const char* to_string(EdgeKind k);
SignalClass signal_class_from_string(const std::string& s);
EdgeKind edge_kind_from_string(const std::string& s);

/// Graph node: one declared signal, qualified as "Module.signal" so that
/// identical identifiers in different modules stay distinct.
struct QualifiedSignal {
    std::string name;   // "Module.signal"
    std::string module;
    std::string base;
    SignalClass klass = SignalClass::InternalSignal;
    bool combinational = false;
    bool parameter = false; // parameter/localparam pseudo-signal
    bool sens_only = false; // appears only in sensitivity lists
    std::vector<SourceSpan> defining_spans;

    /// Structural identity; spans are build artifacts and do not
    /// participate.
    bool same_as(const QualifiedSignal& o) const {
        return name == o.name && module == o.module && base == o.base && klass == o.klass &&
               combinational == o.combinational && parameter == o.parameter && sens_only == o.sens_only;
    }
};

struct DepEdge {
    std::string src;
    std::string dst;
    EdgeKind kind = EdgeKind::Data;
    SourceSpan span; // inducing statement; not part of edge identity

    friend bool operator<(const DepEdge& a, const DepEdge& b) {
        if (a.src != b.src)
            return a.src < b.src;
        if (a.dst != b.dst)
            return a.dst < b.dst;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    }
};

/// Directed multigraph over QualifiedSignals with (src, dst, kind)
/// deduplication. Node and edge iteration order is deterministic
/// (sorted by qualified name, then kind).
class SemanticGraph {
public:
    void add_node(QualifiedSignal node);
    /// Ignores exact duplicates; keeps the first span seen for a triple.
    void add_edge(DepEdge edge);

    bool has_node(const std::string& name) const { return nodes_.count(name) > 0; }
    const QualifiedSignal& node(const std::string& name) const;
    const std::map<std::string, QualifiedSignal>& nodes() const { return nodes_; }
    const std::set<DepEdge>& edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::vector<const DepEdge*> out_edges(const std::string& name) const;
    std::vector<const DepEdge*> in_edges(const std::string& name) const;
    /// Distinct successor/predecessor node names.
    std::vector<std::string> successors(const std::string& name) const;
    std::vector<std::string> predecessors(const std::string& name) const;

    std::vector<std::string> module_names() const;

    /// Structural equality over nodes and (src, dst, kind) triples.
    bool operator==(const SemanticGraph& o) const;

private:
    std::map<std::string, QualifiedSignal> nodes_;
    std::set<DepEdge> edges_;
};

} // namespace keysig
