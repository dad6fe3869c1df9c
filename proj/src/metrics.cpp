#include "wdevolve/metrics.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <tuple>

namespace wde {

double warning_density(std::int64_t warnings, std::int64_t lloc) {
    if (lloc <= 0) return 0.0;
    return static_cast<double>(warnings) / static_cast<double>(lloc);
}

double fd(double file_wd, double system_wd) { return file_wd - system_wd; }

double dfd(const std::vector<double>& deltas) {
    if (deltas.empty()) throw Error("dfd needs at least one delta");
    double sum = 0;
    const std::size_t t = deltas.size();
    for (std::size_t i = 0; i < t; ++i) {
        sum += deltas[i] / static_cast<double>(t - i);
    }
    return sum;
}

namespace {

// One production change on a file lineage. Nodes chain backwards so that
// sibling branches extend the same history without copying it.
struct LineageNode {
    int t = 1;
    std::vector<double> fd_after;  // per rule set, same order as `rulesets`
    std::string lineage_id;
    std::shared_ptr<const LineageNode> prev;
};

using LineageState = std::map<std::string, std::shared_ptr<const LineageNode>>;

double density_of(const FileSummary& summary, const RuleSet& rules) {
    return warning_density(summary.warnings_for(rules), summary.lloc);
}

}  // namespace

std::vector<FileChangeMetrics> compute_all(const TraversalPlan& plan, const CommitGraph& graph,
                                           const RepositoryLog& log, const SnapshotIndex& snapshots,
                                           SummaryCache& cache, const PathFilter& filter,
                                           const std::vector<RuleSet>& rulesets,
                                           const std::vector<InducingLabel>& labels,
                                           bool exclude_self, const std::string& project) {
    if (rulesets.empty()) throw Error("compute_all needs at least one rule set");

    std::map<std::string, std::vector<const FileChangeRecord*>> changes_by_commit;
    for (const auto& ch : log.changes) {
        if (plan.selected(ch.commit_id)) changes_by_commit[ch.commit_id].push_back(&ch);
    }
    std::set<std::pair<std::string, std::string>> inducing;
    for (const auto& label : labels) inducing.insert({label.commit_id, label.path});

    static const SystemSnapshot kEmptySnapshot;
    std::map<std::string, LineageState> lineage_by_commit;
    std::vector<FileChangeMetrics> out;

    for (const auto& commit : plan.order) {
        std::string parent = graph.first_parent(commit);
        LineageState state =
            parent.empty() ? LineageState{} : lineage_by_commit.at(parent);  // shares nodes
        const SystemSnapshot* before_snap = snapshots.before(commit);
        if (before_snap == nullptr) before_snap = &kEmptySnapshot;
        const SystemSnapshot& after_snap = snapshots.at(commit);

        auto it = changes_by_commit.find(commit);
        const std::vector<const FileChangeRecord*> none;
        for (const FileChangeRecord* ch : it == changes_by_commit.end() ? none : it->second) {
            bool path_prod = is_production_file(ch->path, filter);
            if (ch->kind == ChangeKind::Rename && !path_prod) {
                // Left the production tree; the lineage stops silently.
                state.erase(*ch->old_path);
                continue;
            }
            if (!path_prod) continue;

            const std::string& before_path =
                ch->kind == ChangeKind::Rename ? *ch->old_path : ch->path;
            std::shared_ptr<const LineageNode> prior;
            if (auto ls = state.find(before_path); ls != state.end()) {
                prior = ls->second;
                state.erase(ls);
            }
            int t = prior ? prior->t + 1 : 1;
            std::string lineage_id = prior ? prior->lineage_id : commit + ":" + ch->path;

            std::shared_ptr<const FileSummary> before_sum, after_sum;
            if (ch->kind != ChangeKind::Add) before_sum = cache.summary_for(*ch->before_blob, log.blobs);
            if (ch->kind != ChangeKind::Delete) after_sum = cache.summary_for(*ch->after_blob, log.blobs);

            auto node = std::make_shared<LineageNode>();
            node->t = t;
            node->lineage_id = lineage_id;
            node->prev = prior;

            for (std::size_t k = 0; k < rulesets.size(); ++k) {
                const RuleSet& rules = rulesets[k];
                FileChangeMetrics rec;
                rec.commit_id = commit;
                rec.path = ch->path;
                rec.ruleset = rules.name;
                rec.change_index = t;
                rec.prior_changes = t - 1;
                rec.project = project;
                rec.lineage_id = lineage_id;
                rec.inducing = inducing.count({commit, ch->path}) != 0;

                std::optional<std::string> excl_before, excl_after;
                if (exclude_self) {
                    excl_before = before_path;
                    excl_after = ch->path;
                }
                rec.wd_system_before = system_density(*before_snap, rules, excl_before);
                rec.wd_system_after = system_density(after_snap, rules, excl_after);
                if (before_sum) {
                    rec.wd_file_before = density_of(*before_sum, rules);
                    rec.fd_before = fd(*rec.wd_file_before, rec.wd_system_before);
                }
                if (after_sum) {
                    rec.wd_file_after = density_of(*after_sum, rules);
                    rec.fd_after = fd(*rec.wd_file_after, rec.wd_system_after);
                    double acc = *rec.fd_after;
                    for (auto n = prior.get(); n != nullptr; n = n->prev.get()) {
                        acc += n->fd_after[k] / static_cast<double>(t - n->t + 1);
                    }
                    rec.dfd = acc;
                    node->fd_after.push_back(*rec.fd_after);
                }
                out.push_back(std::move(rec));
            }

            if (ch->kind != ChangeKind::Delete) state[ch->path] = node;
        }
        lineage_by_commit.emplace(commit, std::move(state));
    }

    std::sort(out.begin(), out.end(), [](const FileChangeMetrics& a, const FileChangeMetrics& b) {
        return std::tie(a.path, a.change_index, a.ruleset, a.commit_id) <
               std::tie(b.path, b.change_index, b.ruleset, b.commit_id);
    });
    return out;
}

MetricSeries series_for(const std::vector<FileChangeMetrics>& records,
                        const std::string& ruleset) {
    MetricSeries series;
    series.ruleset = ruleset;
    for (const auto& rec : records) {
        if (rec.ruleset == ruleset) series.by_lineage[rec.lineage_id].push_back(rec);
    }
    for (auto& [_, list] : series.by_lineage) {
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
            return a.change_index < b.change_index;
        });
    }
    return series;
}

}  // namespace wde
