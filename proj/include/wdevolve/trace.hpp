#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wdevolve/graph.hpp"
#include "wdevolve/model.hpp"

namespace wde {

/// Result of tracing one fix line back to the change that introduced it.
struct LineTrace {
    std::string fix_commit;
    std::string path;
    int old_line = 1;
    std::string origin_commit;
    std::string origin_path;
    int hops = 0;  // changes mapped through, the origin change excluded
};

/// One bug-inducing (commit, file) with every issue and fix that points at it.
struct InducingLabel {
    std::string commit_id;
    std::string path;
    std::set<std::string> issue_ids;
    std::set<std::string> fix_commits;

    bool operator==(const InducingLabel&) const = default;
};

/// Maps a line of the change's after-version into the before-version.
/// nullopt means the line lies inside a hunk's new range: introduced (or last
/// modified) by this very change. Add records introduce every line.
std::optional<int> map_line_backwards(const FileChangeRecord& change, int line);
/// Same, but validates the line against the after-version length first.
std::optional<int> map_line_backwards(const FileChangeRecord& change, int line,
                                      int after_line_count);

/// Walks first-parent file history from the version the fix edited (old_line
/// is 1-based in the pre-fix content of path at fix_commit), following
/// renames, and stops at the change whose hunks cover the line. Throws when
/// the annotation is inconsistent with the log.
LineTrace trace_origin(const std::string& fix_commit, const std::string& path, int old_line,
                       const CommitGraph& graph, const RepositoryLog& log);

struct LabelingOutcome {
    std::vector<InducingLabel> labels;   // sorted by (commit, path)
    std::vector<std::string> notices;    // non-production origins, dropped
    std::vector<std::string> errors;     // per-annotation trace failures
};

/// Traces every annotation and aggregates by (origin commit, origin path).
/// Failures are reported per annotation and never abort the batch.
LabelingOutcome label_inducing(const std::vector<BugFixAnnotation>& annotations,
                               const CommitGraph& graph, const RepositoryLog& log,
                               const PathFilter& filter);

}  // namespace wde
