#include "wdevolve/trace.hpp"

#include <algorithm>
#include <map>

namespace wde {

std::optional<int> map_line_backwards(const FileChangeRecord& change, int line) {
    if (line < 1) throw Error("line numbers are 1-based, got " + std::to_string(line));
    if (change.kind == ChangeKind::Delete) {
        throw Error("change at " + change.commit_id + " removes " + change.path +
                    "; it has no after-version");
    }
    if (change.kind == ChangeKind::Add) return std::nullopt;

    int shift = 0;
    for (const Hunk& h : change.hunks) {
        if (line < h.new_start) break;
        if (line < h.new_start + h.new_len) return std::nullopt;
        shift += h.new_len - h.old_len;
    }
    return line - shift;
}

std::optional<int> map_line_backwards(const FileChangeRecord& change, int line,
                                      int after_line_count) {
    if (line > after_line_count) {
        throw Error("line " + std::to_string(line) + " exceeds the after-version length (" +
                    std::to_string(after_line_count) + ") of " + change.path + " at " +
                    change.commit_id);
    }
    return map_line_backwards(change, line);
}

namespace {

struct ChangeLookup {
    // (commit, path-after-change) -> record, in log order per commit
    std::map<std::pair<std::string, std::string>, const FileChangeRecord*> by_commit_path;

    explicit ChangeLookup(const RepositoryLog& log) {
        for (const auto& ch : log.changes) {
            by_commit_path.emplace(std::make_pair(ch.commit_id, ch.path), &ch);
        }
    }

    const FileChangeRecord* find(const std::string& commit, const std::string& path) const {
        auto it = by_commit_path.find({commit, path});
        return it == by_commit_path.end() ? nullptr : it->second;
    }
};

LineTrace trace_origin_impl(const std::string& fix_commit, const std::string& path, int old_line,
                            const CommitGraph& graph, const RepositoryLog& log,
                            const ChangeLookup& lookup) {
    if (old_line < 1) throw Error("annotation line numbers are 1-based");
    if (!graph.contains(fix_commit)) {
        throw Error("fix commit " + fix_commit + " is not in the selected graph");
    }
    const FileChangeRecord* fix = lookup.find(fix_commit, path);
    if (fix == nullptr) {
        throw Error("commit " + fix_commit + " has no change record for " + path);
    }
    if (fix->kind == ChangeKind::Add) {
        throw Error("fix at " + fix_commit + " adds " + path + "; there is no pre-change version");
    }
    const std::string& before = log.blobs.get(*fix->before_blob);
    int before_lines = physical_line_count(before);
    if (old_line > before_lines) {
        throw Error("annotation line " + std::to_string(old_line) + " exceeds the pre-fix length (" +
                    std::to_string(before_lines) + ") of " + path + " at " + fix_commit);
    }

    LineTrace trace;
    trace.fix_commit = fix_commit;
    trace.path = path;
    trace.old_line = old_line;

    // The fix edited its parent's version: start there, under the pre-fix path.
    std::string cur_path = fix->old_path ? *fix->old_path : path;
    std::string cur_commit = graph.first_parent(fix_commit);
    int line = old_line;

    while (!cur_commit.empty()) {
        const FileChangeRecord* ch = lookup.find(cur_commit, cur_path);
        if (ch == nullptr) {
            cur_commit = graph.first_parent(cur_commit);
            continue;
        }
        if (ch->kind == ChangeKind::Delete) {
            throw Error("history of " + path + " is inconsistent: deleted at " + cur_commit +
                        " yet present at " + fix_commit);
        }
        if (ch->kind == ChangeKind::Add) {
            trace.origin_commit = cur_commit;
            trace.origin_path = ch->path;
            return trace;
        }
        int after_lines = physical_line_count(log.blobs.get(*ch->after_blob));
        auto mapped = map_line_backwards(*ch, line, after_lines);
        if (!mapped) {
            trace.origin_commit = cur_commit;
            trace.origin_path = ch->path;
            return trace;
        }
        line = *mapped;
        if (ch->old_path) cur_path = *ch->old_path;
        cur_commit = graph.first_parent(cur_commit);
        ++trace.hops;
    }
    throw Error("no change in first-parent history introduces " + path + " before " + fix_commit);
}

}  // namespace

LineTrace trace_origin(const std::string& fix_commit, const std::string& path, int old_line,
                       const CommitGraph& graph, const RepositoryLog& log) {
    ChangeLookup lookup(log);
    return trace_origin_impl(fix_commit, path, old_line, graph, log, lookup);
}

LabelingOutcome label_inducing(const std::vector<BugFixAnnotation>& annotations,
                               const CommitGraph& graph, const RepositoryLog& log,
                               const PathFilter& filter) {
    ChangeLookup lookup(log);
    LabelingOutcome out;
    std::map<std::pair<std::string, std::string>, InducingLabel> grouped;

    for (const auto& ann : annotations) {
        std::string context = ann.issue_id + " (" + ann.fix_commit + " " + ann.path + ":" +
                              std::to_string(ann.old_line) + ")";
        LineTrace trace;
        try {
            trace = trace_origin_impl(ann.fix_commit, ann.path, ann.old_line, graph, log, lookup);
        } catch (const Error& e) {
            out.errors.push_back(context + ": " + e.what());
            continue;
        }
        if (!is_production_file(trace.origin_path, filter)) {
            out.notices.push_back(context + ": origin " + trace.origin_commit + " " +
                                  trace.origin_path + " is not production code, dropped");
            continue;
        }
        auto& label = grouped[{trace.origin_commit, trace.origin_path}];
        label.commit_id = trace.origin_commit;
        label.path = trace.origin_path;
        label.issue_ids.insert(ann.issue_id);
        label.fix_commits.insert(ann.fix_commit);
    }

    out.labels.reserve(grouped.size());
    for (auto& [_, label] : grouped) out.labels.push_back(std::move(label));
    std::sort(out.errors.begin(), out.errors.end());
    std::sort(out.notices.begin(), out.notices.end());
    return out;
}

}  // namespace wde
