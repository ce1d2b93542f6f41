// SPDX-License-Identifier: Apache-2.0
#include "keysig/graph_io.hpp"

#include <map>
#include <sstream>

#include <json.hpp>

#include "keysig/diagnostics.hpp"

namespace keysig {

using ordered_json = nlohmann::ordered_json;

std::string graph_to_json(const SemanticGraph& g) {
    ordered_json j;
    j["schema"] = "keysig-graph/1";
    j["nodes"] = ordered_json::array();
    for (const auto& [name, node] : g.nodes()) {
        ordered_json n;
        n["id"] = node.name;
        n["module"] = node.module;
        n["class"] = to_string(node.klass);
        n["combinational"] = node.combinational;
        n["parameter"] = node.parameter;
        n["sens_only"] = node.sens_only;
        j["nodes"].push_back(std::move(n));
    }
    j["edges"] = ordered_json::array();
    for (const auto& e : g.edges()) {
        ordered_json je;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["kind"] = to_string(e.kind);
        j["edges"].push_back(std::move(je));
    }
    return j.dump(2) + "\n";
}

SemanticGraph graph_from_json(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw Error(std::string("invalid graph JSON: ") + e.what());
    }
    if (!j.contains("schema") || j["schema"] != "keysig-graph/1")
        throw Error("graph JSON has missing or unsupported schema field");
    SemanticGraph g;
    for (const auto& n : j.at("nodes")) {
        QualifiedSignal q;
        q.name = n.at("id").get<std::string>();
        q.module = n.at("module").get<std::string>();
        if (q.name.size() > q.module.size() + 1 && q.name.compare(0, q.module.size(), q.module) == 0 &&
            q.name[q.module.size()] == '.')
            q.base = q.name.substr(q.module.size() + 1);
        else
            q.base = q.name;
        q.klass = signal_class_from_string(n.at("class").get<std::string>());
        q.combinational = n.at("combinational").get<bool>();
        q.parameter = n.value("parameter", false);
        q.sens_only = n.value("sens_only", false);
        g.add_node(std::move(q));
    }
    for (const auto& e : j.at("edges")) {
        DepEdge d;
        d.src = e.at("src").get<std::string>();
        d.dst = e.at("dst").get<std::string>();
        d.kind = edge_kind_from_string(e.at("kind").get<std::string>());
        if (!g.has_node(d.src) || !g.has_node(d.dst))
            throw Error("graph JSON edge references unknown node '" +
                        (g.has_node(d.src) ? d.dst : d.src) + "'");
        g.add_edge(std::move(d));
    }
    return g;
}

namespace {

// Fixed palette cycled over modules in sorted order.
const char* kPalette[] = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
                          "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f"};

const char* edge_color(EdgeKind k) {
    switch (k) {
    case EdgeKind::Data:
        return "black";
    case EdgeKind::Temporal:
        return "blue";
    case EdgeKind::Control:
        return "red";
    case EdgeKind::Module:
        return "darkgreen";
    }
    return "black";
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

} // namespace

std::string graph_to_dot(const SemanticGraph& g) {
    std::map<std::string, const char*> color;
    std::size_t i = 0;
    for (const auto& mod : g.module_names())
        color[mod] = kPalette[i++ % (sizeof(kPalette) / sizeof(kPalette[0]))];

    std::ostringstream os;
    os << "digraph semantic_graph {\n";
    os << "  rankdir=LR;\n";
    os << "  node [shape=ellipse, style=filled];\n";
    for (const auto& [name, node] : g.nodes()) {
        os << "  \"" << dot_escape(name) << "\" [fillcolor=\"" << color[node.module]
           << "\", label=\"" << dot_escape(node.base) << "\\n" << to_string(node.klass) << "\"];\n";
    }
    for (const auto& e : g.edges()) {
        os << "  \"" << dot_escape(e.src) << "\" -> \"" << dot_escape(e.dst) << "\" [color="
           << edge_color(e.kind) << ", label=\"" << to_string(e.kind) << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace keysig
