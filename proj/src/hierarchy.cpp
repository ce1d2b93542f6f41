// SPDX-License-Identifier: Apache-2.0
#include "keysig/hierarchy.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace keysig {

std::string Hierarchy::chain_to(const std::string& module) const {
    std::vector<std::string> path;
    std::set<std::string> on_path;
    bool found = false;
    std::function<void(const std::string&)> dfs = [&](const std::string& cur) {
        if (found)
            return;
        path.push_back(cur);
        on_path.insert(cur);
        if (cur == module) {
            found = true;
            return;
        }
        auto it = children.find(cur);
        if (it != children.end()) {
            for (const auto& e : it->second) {
                if (on_path.count(e.child_module))
                    continue;
                dfs(e.child_module);
                if (found)
                    return;
            }
        }
        on_path.erase(cur);
        path.pop_back();
    };
    dfs(top);
    if (!found)
        return module;
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i)
            out += '.';
        out += path[i];
    }
    return out;
}

std::vector<std::string> Hierarchy::preorder_modules() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::function<void(const std::string&)> dfs = [&](const std::string& cur) {
        if (!seen.insert(cur).second)
            return;
        out.push_back(cur);
        auto it = children.find(cur);
        if (it != children.end())
            for (const auto& e : it->second)
                dfs(e.child_module);
    };
    dfs(top);
    return out;
}

Hierarchy resolve_hierarchy(const Ast& ast, const std::string& top) {
    if (ast.modules.empty())
        throw UnresolvedModule("no modules parsed");

    std::set<std::string> defined;
    for (const auto& m : ast.modules)
        defined.insert(m.name);

    std::set<std::string> instantiated;
    std::map<std::string, std::vector<Hierarchy::Edge>> children;
    for (const auto& m : ast.modules) {
        for (const auto& item : m.items) {
            if (item.kind != ItemKind::Instantiation)
                continue;
            if (!defined.count(item.target_module))
                throw UnresolvedModule("module '" + item.target_module + "' instantiated by '" + m.name +
                                       "' (instance '" + item.instance_name + "') is not defined");
            instantiated.insert(item.target_module);
            children[m.name].push_back({item.instance_name, item.target_module});
        }
    }

    std::string root = top;
    if (root.empty()) {
        std::vector<std::string> candidates;
        for (const auto& m : ast.modules)
            if (!instantiated.count(m.name))
                candidates.push_back(m.name);
        if (candidates.empty())
            throw AmbiguousTop("no un-instantiated module exists; every module is instantiated");
        if (candidates.size() > 1) {
            std::string list;
            for (const auto& c : candidates)
                list += (list.empty() ? "" : ", ") + c;
            throw AmbiguousTop("multiple candidate top modules: " + list);
        }
        root = candidates.front();
    } else if (!defined.count(root)) {
        throw UnresolvedModule("top module '" + root + "' is not defined");
    }

    // cycle check over the module-level instantiation graph reachable from root
    std::set<std::string> visiting, done;
    std::function<void(const std::string&)> dfs = [&](const std::string& cur) {
        if (done.count(cur))
            return;
        if (!visiting.insert(cur).second)
            throw CyclicInstantiation("module '" + cur + "' instantiates itself through a cycle");
        auto it = children.find(cur);
        if (it != children.end())
            for (const auto& e : it->second)
                dfs(e.child_module);
        visiting.erase(cur);
        done.insert(cur);
    };
    dfs(root);

    Hierarchy h;
    h.top = root;
    h.children = std::move(children);
    return h;
}

} // namespace keysig
