#include "wdevolve/graph.hpp"

#include <algorithm>
#include <queue>

namespace wde {

const std::vector<std::string>& CommitGraph::parents_of(const std::string& id) const {
    auto it = parent_edges.find(id);
    if (it == parent_edges.end()) throw Error("unknown commit: " + id);
    return it->second;
}

std::string CommitGraph::first_parent(const std::string& id) const {
    const auto& ps = parents_of(id);
    return ps.empty() ? std::string() : ps.front();
}

CommitGraph build_graph(const RepositoryLog& log) {
    auto names = log.projects();
    if (names.size() != 1) {
        throw Error("log holds " + std::to_string(names.size()) +
                    " projects; pass the project name to build_graph");
    }
    return build_graph(log, names.front());
}

CommitGraph build_graph(const RepositoryLog& log, const std::string& project) {
    CommitGraph g;
    for (const auto& c : log.commits) {
        if (log.project_of(c.id) != project) continue;
        g.nodes.insert(c.id);
        g.parent_edges[c.id] = c.parents;
        g.timestamps[c.id] = c.timestamp;
    }
    g.main_head = log.main_head(project);
    for (const auto& h : log.heads) {
        if (h.project == project && !h.main) g.extra_heads.insert(h.commit_id);
    }

    // Kahn's count doubles as the cycle check; self-parents never drain.
    std::map<std::string, int> outstanding;  // unvisited parents per node
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& id : g.nodes) {
        outstanding[id] = static_cast<int>(g.parents_of(id).size());
        for (const auto& p : g.parents_of(id)) children[p].push_back(id);
    }
    std::queue<std::string> ready;
    for (const auto& [id, n] : outstanding) {
        if (n == 0) ready.push(id);
    }
    std::size_t emitted = 0;
    while (!ready.empty()) {
        std::string id = ready.front();
        ready.pop();
        ++emitted;
        for (const auto& child : children[id]) {
            if (--outstanding[child] == 0) ready.push(child);
        }
    }
    if (emitted != g.nodes.size()) throw Error("commit graph contains a cycle");
    return g;
}

namespace {

/// `start` plus all ancestors of `start`.
std::set<std::string> ancestors_inclusive(const CommitGraph& g, const std::string& start) {
    std::set<std::string> seen;
    std::vector<std::string> stack{start};
    while (!stack.empty()) {
        std::string id = stack.back();
        stack.pop_back();
        if (!seen.insert(id).second) continue;
        for (const auto& p : g.parents_of(id)) stack.push_back(p);
    }
    return seen;
}

}  // namespace

CommitGraph select_relevant(const CommitGraph& graph) {
    if (!graph.contains(graph.main_head)) {
        throw Error("main head " + graph.main_head + " is not in the commit graph");
    }

    auto main_ancestry = ancestors_inclusive(graph, graph.main_head);

    std::set<std::string> kept_orphans;
    for (const auto& id : graph.nodes) {
        if (graph.parents_of(id).empty() && main_ancestry.count(id)) kept_orphans.insert(id);
    }
    if (kept_orphans.empty()) {
        throw Error("main head " + graph.main_head + " is unreachable from any orphan commit");
    }

    std::set<std::string> kept = main_ancestry;
    std::set<std::string> kept_heads;
    for (const auto& tip : graph.extra_heads) {
        if (!graph.contains(tip)) continue;
        auto ancestry = ancestors_inclusive(graph, tip);
        bool rooted = std::any_of(kept_orphans.begin(), kept_orphans.end(),
                                  [&](const std::string& o) { return ancestry.count(o) != 0; });
        if (rooted) {
            kept_heads.insert(tip);
            kept.insert(ancestry.begin(), ancestry.end());
        }
    }

    CommitGraph out;
    out.nodes = std::move(kept);
    out.main_head = graph.main_head;
    out.extra_heads = std::move(kept_heads);
    for (const auto& id : out.nodes) {
        out.parent_edges[id] = graph.parents_of(id);
        out.timestamps[id] = graph.timestamps.at(id);
    }
    return out;
}

TraversalPlan traversal_order(const CommitGraph& graph) {
    using Key = std::pair<std::int64_t, std::string>;
    std::priority_queue<Key, std::vector<Key>, std::greater<Key>> ready;

    std::map<std::string, int> outstanding;
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& id : graph.nodes) {
        outstanding[id] = static_cast<int>(graph.parents_of(id).size());
        for (const auto& p : graph.parents_of(id)) children[p].push_back(id);
    }
    for (const auto& [id, n] : outstanding) {
        if (n == 0) ready.emplace(graph.timestamps.at(id), id);
    }

    TraversalPlan plan;
    plan.order.reserve(graph.nodes.size());
    while (!ready.empty()) {
        auto [ts, id] = ready.top();
        ready.pop();
        plan.position[id] = plan.order.size();
        plan.order.push_back(id);
        for (const auto& child : children[id]) {
            if (--outstanding[child] == 0) ready.emplace(graph.timestamps.at(child), child);
        }
    }
    if (plan.order.size() != graph.nodes.size()) {
        throw Error("commit graph contains a cycle");
    }
    return plan;
}

}  // namespace wde
