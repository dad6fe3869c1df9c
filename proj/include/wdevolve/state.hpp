#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wdevolve/graph.hpp"
#include "wdevolve/lint.hpp"
#include "wdevolve/model.hpp"

namespace wde {

/// Per-commit production file tree with analysis summaries and running
/// totals. Children share FileSummary objects with their parents; copying a
/// snapshot copies pointers, not analyses.
struct SystemSnapshot {
    std::string commit_id;
    std::map<std::string, std::shared_ptr<const FileSummary>> files;
    std::int64_t total_lloc = 0;
    std::map<std::string, std::int64_t> total_rule_counts;

    std::int64_t total_warnings(const RuleSet& rules) const;
    /// Recomputes the totals from `files` and throws if they drifted.
    void check_totals() const;
};

/// Content-addressed analysis results. Blob digests are the cache key, so a
/// file version is analyzed once no matter how many commits carry it.
class SummaryCache {
  public:
    explicit SummaryCache(const AnalysisEngine& engine) : engine_(&engine) {}

    std::shared_ptr<const FileSummary> summary_for(const std::string& ref, const BlobStore& blobs);

    /// Analyzes the given refs up front on `threads` workers (1 = inline).
    void prewarm(const std::vector<std::string>& refs, const BlobStore& blobs, int threads);

    std::size_t size() const { return by_digest_.size(); }

  private:
    const AnalysisEngine* engine_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const FileSummary>> by_digest_;
};

/// Snapshots for every commit of a traversal plan. A commit's tree is its
/// first parent's tree with the commit's own change records applied; merge
/// commits therefore follow mainline history. Only production paths enter.
class SnapshotIndex {
  public:
    SnapshotIndex(const TraversalPlan& plan, const CommitGraph& graph, const RepositoryLog& log,
                  SummaryCache& cache, const PathFilter& filter);

    const SystemSnapshot& at(const std::string& commit_id) const;
    /// First-parent snapshot, or nullptr for orphan commits.
    const SystemSnapshot* before(const std::string& commit_id) const;

  private:
    const CommitGraph* graph_;
    std::map<std::string, SystemSnapshot> by_commit_;
};

/// Builds the snapshot of one commit (convenience wrapper over SnapshotIndex
/// for callers that need a single tree).
SystemSnapshot snapshot_for(const std::string& commit_id, const TraversalPlan& plan,
                            const CommitGraph& graph, const RepositoryLog& log,
                            const AnalysisEngine& engine, const PathFilter& filter);

/// Warning density over the snapshot under `rules`, optionally leaving one
/// path out ("the rest of the system"). 0 when no code is left.
double system_density(const SystemSnapshot& snapshot, const RuleSet& rules,
                      const std::optional<std::string>& exclude_path = std::nullopt);

}  // namespace wde
