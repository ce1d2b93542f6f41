// SPDX-License-Identifier: Apache-2.0
#include "keysig/graph.hpp"

#include <algorithm>

#include "keysig/diagnostics.hpp"

namespace keysig {

const char* to_string(SignalClass c) {
    switch (c) {
    case SignalClass::StateRegister:
        return "state_register";
    case SignalClass::ControlSignal:
        return "control_signal";
    case SignalClass::OutputPort:
        return "output_port";
    case SignalClass::InternalSignal:
        return "internal_signal";
    }
    return "internal_signal";
}

const char* to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::Data:
        return "data";
    case EdgeKind::Temporal:
        return "temporal";
    case EdgeKind::Control:
        return "control";
    case EdgeKind::Module:
        return "module";
    }
    return "data";
}

SignalClass signal_class_from_string(const std::string& s) {
    if (s == "state_register")
        return SignalClass::StateRegister;
    if (s == "control_signal")
        return SignalClass::ControlSignal;
    if (s == "output_port")
        return SignalClass::OutputPort;
    if (s == "internal_signal")
        return SignalClass::InternalSignal;
    throw Error("unknown signal class '" + s + "'");
}

EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "data")
        return EdgeKind::Data;
    if (s == "temporal")
        return EdgeKind::Temporal;
    if (s == "control")
        return EdgeKind::Control;
    if (s == "module")
        return EdgeKind::Module;
    throw Error("unknown edge kind '" + s + "'");
}

void SemanticGraph::add_node(QualifiedSignal node) {
    nodes_.emplace(node.name, std::move(node));
}

void SemanticGraph::add_edge(DepEdge edge) {
    edges_.insert(std::move(edge));
}

const QualifiedSignal& SemanticGraph::node(const std::string& name) const {
    auto it = nodes_.find(name);
    if (it == nodes_.end())
        throw UnknownSignal("signal '" + name + "' is not in the graph");
    return it->second;
}

std::vector<const DepEdge*> SemanticGraph::out_edges(const std::string& name) const {
    std::vector<const DepEdge*> out;
    for (const auto& e : edges_)
        if (e.src == name)
            out.push_back(&e);
    return out;
}

std::vector<const DepEdge*> SemanticGraph::in_edges(const std::string& name) const {
    std::vector<const DepEdge*> out;
    for (const auto& e : edges_)
        if (e.dst == name)
            out.push_back(&e);
    return out;
}

std::vector<std::string> SemanticGraph::successors(const std::string& name) const {
    std::vector<std::string> out;
    for (const auto& e : edges_)
        if (e.src == name && (out.empty() || out.back() != e.dst))
            if (std::find(out.begin(), out.end(), e.dst) == out.end())
                out.push_back(e.dst);
    return out;
}

std::vector<std::string> SemanticGraph::predecessors(const std::string& name) const {
    std::vector<std::string> out;
    for (const auto& e : edges_)
        if (e.dst == name)
            if (std::find(out.begin(), out.end(), e.src) == out.end())
                out.push_back(e.src);
    return out;
}

std::vector<std::string> SemanticGraph::module_names() const {
    std::vector<std::string> out;
    for (const auto& [name, node] : nodes_)
        if (std::find(out.begin(), out.end(), node.module) == out.end())
            out.push_back(node.module);
    std::sort(out.begin(), out.end());
    return out;
}

bool SemanticGraph::operator==(const SemanticGraph& o) const {
    if (nodes_.size() != o.nodes_.size() || edges_.size() != o.edges_.size())
        return false;
    auto it = nodes_.begin();
    auto jt = o.nodes_.begin();
    for (; it != nodes_.end(); ++it, ++jt)
        if (!it->second.same_as(jt->second))
            return false;
    auto ei = edges_.begin();
    auto ej = o.edges_.begin();
    for (; ei != edges_.end(); ++ei, ++ej) {
        if (ei->src != ej->src || ei->dst != ej->dst || ei->kind != ej->kind)
            return false;
    }
    return true;
}

} // namespace keysig
