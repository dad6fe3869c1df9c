#include "wdevolve/state.hpp"

#include <atomic>
#include <thread>

namespace wde {

std::int64_t SystemSnapshot::total_warnings(const RuleSet& rules) const {
    std::int64_t total = 0;
    for (const auto& [rule, n] : total_rule_counts) {
        if (rules.contains(rule)) total += n;
    }
    return total;
}

void SystemSnapshot::check_totals() const {
    std::int64_t lloc = 0;
    std::map<std::string, std::int64_t> counts;
    for (const auto& [path, summary] : files) {
        lloc += summary->lloc;
        for (const auto& [rule, n] : summary->rule_counts) counts[rule] += n;
    }
    std::erase_if(counts, [](const auto& kv) { return kv.second == 0; });
    if (lloc != total_lloc || counts != total_rule_counts) {
        throw Error("snapshot totals drifted at commit " + commit_id);
    }
}

std::shared_ptr<const FileSummary> SummaryCache::summary_for(const std::string& ref,
                                                             const BlobStore& blobs) {
    {
        std::lock_guard lock(mutex_);
        auto it = by_digest_.find(ref);
        if (it != by_digest_.end()) return it->second;
    }
    auto summary = std::make_shared<FileSummary>(engine_->summarize_content(blobs.get(ref)));
    std::lock_guard lock(mutex_);
    return by_digest_.emplace(ref, std::move(summary)).first->second;
}

void SummaryCache::prewarm(const std::vector<std::string>& refs, const BlobStore& blobs,
                           int threads) {
    if (threads < 1) threads = 1;
    threads = std::min<int>(threads, static_cast<int>(refs.size()));
    if (threads <= 1) {
        for (const auto& ref : refs) summary_for(ref, blobs);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < refs.size(); i = next++) {
                summary_for(refs[i], blobs);
            }
        });
    }
    for (auto& t : workers) t.join();
}

namespace {

void subtract_summary(SystemSnapshot& snap, const FileSummary& s) {
    snap.total_lloc -= s.lloc;
    for (const auto& [rule, n] : s.rule_counts) {
        auto it = snap.total_rule_counts.find(rule);
        it->second -= n;
        if (it->second == 0) snap.total_rule_counts.erase(it);
    }
}

void add_summary(SystemSnapshot& snap, const FileSummary& s) {
    snap.total_lloc += s.lloc;
    for (const auto& [rule, n] : s.rule_counts) snap.total_rule_counts[rule] += n;
}

void remove_file(SystemSnapshot& snap, const std::string& path) {
    auto it = snap.files.find(path);
    if (it == snap.files.end()) return;
    subtract_summary(snap, *it->second);
    snap.files.erase(it);
}

void put_file(SystemSnapshot& snap, const std::string& path,
              std::shared_ptr<const FileSummary> summary) {
    remove_file(snap, path);
    add_summary(snap, *summary);
    snap.files.emplace(path, std::move(summary));
}

}  // namespace

SnapshotIndex::SnapshotIndex(const TraversalPlan& plan, const CommitGraph& graph,
                             const RepositoryLog& log, SummaryCache& cache,
                             const PathFilter& filter)
    : graph_(&graph) {
    std::map<std::string, std::vector<const FileChangeRecord*>> changes_by_commit;
    for (const auto& ch : log.changes) {
        if (plan.selected(ch.commit_id)) changes_by_commit[ch.commit_id].push_back(&ch);
    }

    for (const auto& id : plan.order) {
        SystemSnapshot snap;
        std::string parent = graph.first_parent(id);
        if (!parent.empty()) snap = by_commit_.at(parent);  // shares summaries
        snap.commit_id = id;

        auto it = changes_by_commit.find(id);
        if (it != changes_by_commit.end()) {
            for (const FileChangeRecord* ch : it->second) {
                switch (ch->kind) {
                    case ChangeKind::Add:
                    case ChangeKind::Modify:
                        if (is_production_file(ch->path, filter)) {
                            put_file(snap, ch->path, cache.summary_for(*ch->after_blob, log.blobs));
                        }
                        break;
                    case ChangeKind::Delete:
                        remove_file(snap, ch->path);
                        break;
                    case ChangeKind::Rename:
                        remove_file(snap, *ch->old_path);
                        if (is_production_file(ch->path, filter)) {
                            put_file(snap, ch->path, cache.summary_for(*ch->after_blob, log.blobs));
                        }
                        break;
                }
            }
        }
        by_commit_.emplace(id, std::move(snap));
    }
}

const SystemSnapshot& SnapshotIndex::at(const std::string& commit_id) const {
    auto it = by_commit_.find(commit_id);
    if (it == by_commit_.end()) throw Error("no snapshot for commit " + commit_id);
    return it->second;
}

const SystemSnapshot* SnapshotIndex::before(const std::string& commit_id) const {
    std::string parent = graph_->first_parent(commit_id);
    if (parent.empty()) return nullptr;
    return &at(parent);
}

SystemSnapshot snapshot_for(const std::string& commit_id, const TraversalPlan& plan,
                            const CommitGraph& graph, const RepositoryLog& log,
                            const AnalysisEngine& engine, const PathFilter& filter) {
    SummaryCache cache(engine);
    SnapshotIndex index(plan, graph, log, cache, filter);
    return index.at(commit_id);
}

double system_density(const SystemSnapshot& snapshot, const RuleSet& rules,
                      const std::optional<std::string>& exclude_path) {
    std::int64_t warnings = snapshot.total_warnings(rules);
    std::int64_t lloc = snapshot.total_lloc;
    if (exclude_path) {
        auto it = snapshot.files.find(*exclude_path);
        if (it != snapshot.files.end()) {
            warnings -= it->second->warnings_for(rules);
            lloc -= it->second->lloc;
        }
    }
    if (lloc <= 0) return 0.0;
    return static_cast<double>(warnings) / static_cast<double>(lloc);
}

}  // namespace wde
