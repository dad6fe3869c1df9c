#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wdevolve/state.hpp"
#include "wdevolve/trace.hpp"

namespace wde {

/// All warning-density numbers of one production file change under one rule
/// set. "before" values describe the first-parent state; they are absent for
/// added files rather than pretending a clean past. "after" values are absent
/// for deletions, which also end the file's lineage.
struct FileChangeMetrics {
    std::string commit_id;
    std::string path;
    std::string ruleset;
    int change_index = 1;  // t: production changes on this lineage, this one included
    std::optional<double> wd_file_before;
    std::optional<double> wd_file_after;
    double wd_system_before = 0;
    double wd_system_after = 0;
    std::optional<double> fd_before;
    std::optional<double> fd_after;
    std::optional<double> dfd;
    bool inducing = false;
    int prior_changes = 0;  // t - 1

    // Bookkeeping, not part of the exported record shape.
    std::string project;
    std::string lineage_id;  // "<commit>:<path>" of the lineage's first change
};

/// warnings per logical line; 0 when there is no code to measure.
double warning_density(std::int64_t warnings, std::int64_t lloc);

/// Signed density difference, negative when the file is cleaner than the
/// system it lives in.
double fd(double file_wd, double system_wd);

/// Decayed cumulative sum of the per-change deltas 1..t: the most recent
/// counts in full, older ones divided by their age in changes.
double dfd(const std::vector<double>& deltas);

/// One record per (production file change, rule set) over the whole plan.
/// System densities leave the changed file itself out unless `exclude_self`
/// is off. Output is sorted by (path, change_index, ruleset, commit).
std::vector<FileChangeMetrics> compute_all(const TraversalPlan& plan, const CommitGraph& graph,
                                           const RepositoryLog& log, const SnapshotIndex& snapshots,
                                           SummaryCache& cache, const PathFilter& filter,
                                           const std::vector<RuleSet>& rulesets,
                                           const std::vector<InducingLabel>& labels,
                                           bool exclude_self = true,
                                           const std::string& project = kDefaultProject);

/// Records of one rule set grouped by lineage, ordered by change index.
struct MetricSeries {
    std::string ruleset;
    std::map<std::string, std::vector<FileChangeMetrics>> by_lineage;
};

MetricSeries series_for(const std::vector<FileChangeMetrics>& records, const std::string& ruleset);

}  // namespace wde
