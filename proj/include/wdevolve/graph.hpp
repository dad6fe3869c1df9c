#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wdevolve/model.hpp"

namespace wde {

/// Commit DAG of one project. Edges point child -> parents, first parent
/// first. `extra_heads` are the non-main branch tips from the log.
struct CommitGraph {
    std::set<std::string> nodes;
    std::map<std::string, std::vector<std::string>> parent_edges;
    std::map<std::string, std::int64_t> timestamps;
    std::string main_head;
    std::set<std::string> extra_heads;

    bool contains(const std::string& id) const { return nodes.count(id) != 0; }
    const std::vector<std::string>& parents_of(const std::string& id) const;  // throws on unknown
    std::string first_parent(const std::string& id) const;  // "" for orphans
};

/// Deterministic analysis order over a selected graph.
struct TraversalPlan {
    std::vector<std::string> order;
    std::map<std::string, std::size_t> position;

    bool selected(const std::string& id) const { return position.count(id) != 0; }
};

/// Builds the full DAG for `project` (the log's sole project by default).
/// Throws on cycles.
CommitGraph build_graph(const RepositoryLog& log);
CommitGraph build_graph(const RepositoryLog& log, const std::string& project);

/// Keeps the lineages that matter for analysis: orphan roots with a path to
/// the main head, everything that is an ancestor of the main head, and every
/// extra branch tip (plus ancestors) that grew out of a kept root. Detached
/// lineages such as documentation-only roots disappear.
CommitGraph select_relevant(const CommitGraph& graph);

/// Topological order in which, among commits whose parents have all been
/// emitted, the oldest timestamp goes first (ties broken by commit id).
TraversalPlan traversal_order(const CommitGraph& graph);

}  // namespace wde
