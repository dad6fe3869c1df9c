#include "wdevolve/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "wdevolve/csv.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace wde {

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_absolute()) return path.string();
    return (base / path).lexically_normal().string();
}

[[noreturn]] void fail(const std::string& stage, const std::string& msg) {
    throw Error("[" + stage + "] " + msg);
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        std::string what = e.what();
        if (what.rfind("[", 0) == 0) throw;  // already attributed
        fail(name, what);
    }
}

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string opt_field(const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string();
}

json opt_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

int thread_budget() {
    if (const char* env = std::getenv("WD_EVOLVE_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end != nullptr && *end == '\0' && n >= 1) return static_cast<int>(std::min(n, 64L));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

json box_json(const BoxSummary& box) {
    return json{{"median", box.median},   {"q1", box.q1},
                {"q3", box.q3},           {"whisker_low", box.whisker_low},
                {"whisker_high", box.whisker_high}, {"n", box.n}};
}

json box_or_null(const std::vector<double>& sample) {
    if (sample.empty()) return nullptr;
    return box_json(box_summary(sample));
}

struct MetricSpec {
    const char* name;
    const char* ruleset;
    std::optional<double> FileChangeMetrics::*field;
};

constexpr MetricSpec kStudyMetrics[] = {
    {"fd", "all", &FileChangeMetrics::fd_after},
    {"fd_default", "default", &FileChangeMetrics::fd_after},
    {"dfd", "all", &FileChangeMetrics::dfd},
    {"dfd_default", "default", &FileChangeMetrics::dfd},
};

constexpr MetricSpec kBeforeMetrics[] = {
    {"fd_before", "all", &FileChangeMetrics::fd_before},
    {"fd_default_before", "default", &FileChangeMetrics::fd_before},
};

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw Error("cannot open config: " + config_path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw Error("malformed config " + config_path + ": " + e.what());
    }

    fs::path base = fs::path(config_path).parent_path();
    PipelineConfig out;
    try {
        out.log_path = resolve(base, cfg.at("log_path").get<std::string>());
        out.output_dir = resolve(base, cfg.at("output_dir").get<std::string>());
        for (const auto& p : cfg.at("ruleset_paths")) {
            out.ruleset_paths.push_back(resolve(base, p.get<std::string>()));
        }
        if (cfg.contains("blob_dir")) out.blob_dir = resolve(base, cfg["blob_dir"].get<std::string>());
        if (cfg.contains("production_filter_path")) {
            out.production_filter_path = resolve(base, cfg["production_filter_path"].get<std::string>());
        }
        if (cfg.contains("external_report_path")) {
            out.external_report_path = resolve(base, cfg["external_report_path"].get<std::string>());
        }
        out.consensus_threshold = cfg.value("consensus_threshold", 3);
        out.exclude_self = cfg.value("exclude_self", true);
        out.alpha = cfg.value("alpha", 0.05);
        out.normality_tests = cfg.value("normality_tests", 8);
        out.mwu_tests = cfg.value("mwu_tests", 4);
    } catch (const json::exception& e) {
        throw Error("config " + config_path + ": " + e.what());
    }
    if (out.ruleset_paths.empty()) throw Error("config lists no rule sets");
    if (!(out.alpha > 0 && out.alpha < 1)) throw Error("alpha must lie in (0, 1)");
    return out;
}

RunReport run_pipeline(const PipelineConfig& config) {
    BlobStore blobs;
    if (config.blob_dir) {
        stage("blob store", [&] {
            if (!fs::is_directory(*config.blob_dir)) {
                throw Error("blob directory does not exist: " + *config.blob_dir);
            }
            blobs.load_directory(*config.blob_dir);
            return 0;
        });
    }

    RepositoryLog log = stage("history log", [&] {
        std::ifstream in(config.log_path);
        if (!in) throw Error("cannot open history log: " + config.log_path);
        return parse_repository_log(in, std::move(blobs));
    });

    std::vector<RuleSet> rulesets = stage("rule sets", [&] {
        std::vector<RuleSet> sets;
        for (const auto& path : config.ruleset_paths) sets.push_back(RuleSet::load(path));
        std::set<std::string> names;
        for (const auto& rs : sets) {
            if (!names.insert(rs.name).second) throw Error("duplicate rule set name: " + rs.name);
        }
        for (const char* required : {"all", "default"}) {
            if (names.count(required) == 0) {
                throw Error(std::string("rule set \"") + required + "\" must be configured");
            }
        }
        const RuleSet* all = nullptr;
        const RuleSet* def = nullptr;
        for (const auto& rs : sets) {
            if (rs.name == "all") all = &rs;
            if (rs.name == "default") def = &rs;
        }
        if (!all->is_all()) {
            for (const auto& rule : def->members) {
                if (!all->contains(rule)) {
                    throw Error("default rule " + rule + " is missing from the \"all\" set");
                }
            }
        }
        return sets;
    });

    PathFilter filter = stage("production filter", [&] {
        return config.production_filter_path ? PathFilter::load(*config.production_filter_path)
                                             : PathFilter::defaults();
    });

    std::unique_ptr<AnalysisEngine> engine = stage("analysis engine", [&] {
        std::unique_ptr<AnalysisEngine> e;
        if (config.external_report_path) {
            std::ifstream in(*config.external_report_path);
            if (!in) throw Error("cannot open external report: " + *config.external_report_path);
            e = std::make_unique<ExternalReportEngine>(ingest_external_report(in));
        } else {
            e = std::make_unique<BuiltinEngine>();
        }
        return e;
    });

    SummaryCache cache(*engine);
    std::vector<FileChangeMetrics> records;
    std::vector<InducingLabel> all_labels;
    std::vector<std::string> label_notices, label_errors;
    std::vector<std::vector<std::string>> totals_rows;

    for (const std::string& project : log.projects()) {
        CommitGraph graph = stage("commit graph", [&] {
            return select_relevant(build_graph(log, project));
        });
        TraversalPlan plan = traversal_order(graph);

        SnapshotIndex snapshots = stage("snapshots", [&] {
            std::set<std::string> refs;
            for (const auto& ch : log.changes) {
                if (!plan.selected(ch.commit_id)) continue;
                if (ch.before_blob) refs.insert(*ch.before_blob);
                if (ch.after_blob) refs.insert(*ch.after_blob);
            }
            cache.prewarm(std::vector<std::string>(refs.begin(), refs.end()), log.blobs,
                          thread_budget());
            return SnapshotIndex(plan, graph, log, cache, filter);
        });

        std::vector<InducingLabel> labels = stage("labeling", [&] {
            std::vector<BugFixAnnotation> anns;
            for (const auto& ann : log.annotations) {
                if (log.project_of(ann.fix_commit) == project && plan.selected(ann.fix_commit)) {
                    anns.push_back(ann);
                }
            }
            anns = filter_consensus(anns, config.consensus_threshold);
            LabelingOutcome outcome = label_inducing(anns, graph, log, filter);
            for (const auto& n : outcome.notices) label_notices.push_back(project + ": " + n);
            for (const auto& e : outcome.errors) label_errors.push_back(project + ": " + e);
            return std::move(outcome.labels);
        });

        std::vector<FileChangeMetrics> project_records = stage("metrics", [&] {
            return compute_all(plan, graph, log, snapshots, cache, filter, rulesets, labels,
                               config.exclude_self, project);
        });

        for (const auto& commit : plan.order) {
            const SystemSnapshot& snap = snapshots.at(commit);
            for (const auto& rs : rulesets) {
                totals_rows.push_back({commit, rs.name, std::to_string(snap.total_warnings(rs)),
                                       std::to_string(snap.total_lloc)});
            }
        }
        for (auto& label : labels) all_labels.push_back(std::move(label));
        for (auto& rec : project_records) records.push_back(std::move(rec));
    }

    std::sort(records.begin(), records.end(),
              [](const FileChangeMetrics& a, const FileChangeMetrics& b) {
                  return std::tie(a.project, a.path, a.change_index, a.ruleset, a.commit_id) <
                         std::tie(b.project, b.path, b.change_index, b.ruleset, b.commit_id);
              });
    std::sort(all_labels.begin(), all_labels.end(),
              [](const InducingLabel& a, const InducingLabel& b) {
                  return std::tie(a.commit_id, a.path) < std::tie(b.commit_id, b.path);
              });

    double alpha_corrected = stage("statistics", [&] {
        return bonferroni(config.alpha, config.normality_tests + config.mwu_tests);
    });

    RunReport report;
    json normality = json::array();
    for (const MetricSpec& spec : kStudyMetrics) {
        std::vector<double> other, inducing;
        for (const auto& rec : records) {
            if (rec.ruleset != spec.ruleset) continue;
            const auto& value = rec.*(spec.field);
            if (!value) continue;
            (rec.inducing ? inducing : other).push_back(*value);
        }

        for (const auto& [group, sample] :
             {std::pair<const char*, const std::vector<double>&>{"other", other},
              {"inducing", inducing}}) {
            json entry{{"metric", spec.name}, {"group", group}, {"n", sample.size()}};
            try {
                NormalityResult nr = normality_test(sample);
                entry["statistic"] = nr.statistic;
                entry["p"] = nr.p;
            } catch (const Error& e) {
                entry["skipped_reason"] = e.what();
            }
            normality.push_back(std::move(entry));
        }

        StudyRow row;
        row.metric = spec.name;
        if (other.empty() || inducing.empty()) {
            row.skipped_reason = std::string("empty sample: no ") +
                                 (inducing.empty() ? "bug-inducing" : "other") + " changes";
        } else {
            row.test = compare_samples(spec.name, other, inducing, alpha_corrected);
        }
        report.rows.push_back(std::move(row));
    }

    stage("report", [&] {
        fs::create_directories(config.output_dir);
        fs::path out_dir(config.output_dir);
        auto filtered_out = [&](const std::string& ruleset) {
            return config.ruleset_filter && ruleset != *config.ruleset_filter;
        };

        {
            std::ofstream out(out_dir / "records.csv");
            write_csv_row(out, {"commit_id", "path", "ruleset", "change_index", "wd_file_before",
                                "wd_file_after", "wd_system_before", "wd_system_after", "fd_before",
                                "fd_after", "dfd", "inducing", "prior_changes"});
            for (const auto& r : records) {
                if (filtered_out(r.ruleset)) continue;
                write_csv_row(out, {r.commit_id, r.path, r.ruleset,
                                    std::to_string(r.change_index), opt_field(r.wd_file_before),
                                    opt_field(r.wd_file_after), fmt_double(r.wd_system_before),
                                    fmt_double(r.wd_system_after), opt_field(r.fd_before),
                                    opt_field(r.fd_after), opt_field(r.dfd),
                                    r.inducing ? "true" : "false",
                                    std::to_string(r.prior_changes)});
            }
        }
        {
            std::ofstream out(out_dir / "records.jsonl");
            for (const auto& r : records) {
                if (filtered_out(r.ruleset)) continue;
                json line{{"commit_id", r.commit_id},
                          {"path", r.path},
                          {"ruleset", r.ruleset},
                          {"change_index", r.change_index},
                          {"wd_file_before", opt_json(r.wd_file_before)},
                          {"wd_file_after", opt_json(r.wd_file_after)},
                          {"wd_system_before", r.wd_system_before},
                          {"wd_system_after", r.wd_system_after},
                          {"fd_before", opt_json(r.fd_before)},
                          {"fd_after", opt_json(r.fd_after)},
                          {"dfd", opt_json(r.dfd)},
                          {"inducing", r.inducing},
                          {"prior_changes", r.prior_changes}};
                out << line.dump() << '\n';
            }
        }
        {
            std::ofstream out(out_dir / "labels.csv");
            write_csv_row(out, {"commit", "path", "issue_ids", "fix_commits"});
            auto join = [](const std::set<std::string>& items) {
                std::string s;
                for (const auto& item : items) {
                    if (!s.empty()) s += ';';
                    s += item;
                }
                return s;
            };
            for (const auto& label : all_labels) {
                write_csv_row(out, {label.commit_id, label.path, join(label.issue_ids),
                                    join(label.fix_commits)});
            }
        }
        {
            std::ofstream out(out_dir / "totals.csv");
            write_csv_row(out, {"commit", "ruleset", "warnings", "lloc"});
            for (const auto& row : totals_rows) {
                if (filtered_out(row[1])) continue;
                write_csv_row(out, row);
            }
        }
        {
            json summary;
            summary["alpha"] = config.alpha;
            summary["normality_tests"] = config.normality_tests;
            summary["mwu_tests"] = config.mwu_tests;
            summary["alpha_corrected"] = alpha_corrected;
            summary["normality"] = normality;
            json rows = json::array();
            for (const auto& row : report.rows) {
                json r{{"metric", row.metric}};
                if (row.test) {
                    const TestResult& t = *row.test;
                    r["n_other"] = t.n_other;
                    r["n_inducing"] = t.n_inducing;
                    r["median_other"] = t.median_other;
                    r["median_inducing"] = t.median_inducing;
                    r["u"] = t.u_statistic;
                    r["p_value"] = t.p_value;
                    r["significant"] = t.significant;
                    r["delta"] = opt_json(t.delta);
                    r["magnitude"] =
                        t.magnitude ? json(std::string(to_string(*t.magnitude))) : json(nullptr);
                } else {
                    r["skipped_reason"] = row.skipped_reason;
                }
                rows.push_back(std::move(r));
            }
            summary["rows"] = std::move(rows);
            summary["labeling"] = json{{"labels", all_labels.size()},
                                       {"notices", label_notices},
                                       {"errors", label_errors}};
            std::ofstream out(out_dir / "summary.json");
            out << summary.dump(2) << '\n';
        }
        {
            json boxes;
            auto emit_metric = [&](const MetricSpec& spec) {
                std::map<std::string, std::vector<double>> other_pp, inducing_pp;
                std::vector<double> other, inducing;
                for (const auto& rec : records) {
                    if (rec.ruleset != spec.ruleset) continue;
                    const auto& value = rec.*(spec.field);
                    if (!value) continue;
                    if (rec.inducing) {
                        inducing.push_back(*value);
                        inducing_pp[rec.project].push_back(*value);
                    } else {
                        other.push_back(*value);
                        other_pp[rec.project].push_back(*value);
                    }
                }
                auto group_json = [&](const std::vector<double>& pooled,
                                      const std::map<std::string, std::vector<double>>& pp) {
                    json per_project = json::object();
                    for (const auto& [project, sample] : pp) {
                        per_project[project] = box_or_null(sample);
                    }
                    return json{{"pooled", box_or_null(pooled)}, {"per_project", per_project}};
                };
                boxes["metrics"][spec.name] = json{{"other", group_json(other, other_pp)},
                                                   {"inducing", group_json(inducing, inducing_pp)}};
            };
            for (const auto& spec : kStudyMetrics) emit_metric(spec);
            for (const auto& spec : kBeforeMetrics) emit_metric(spec);

            std::map<std::string, std::int64_t> count_other, count_inducing;
            std::int64_t n_other = 0, n_inducing = 0;
            for (const auto& rec : records) {
                if (rec.ruleset != "all") continue;  // one entry per change
                if (rec.inducing) {
                    ++n_inducing;
                    ++count_inducing[rec.project];
                } else {
                    ++n_other;
                    ++count_other[rec.project];
                }
            }
            auto counts_json = [](std::int64_t pooled,
                                  const std::map<std::string, std::int64_t>& pp) {
                json per_project = json::object();
                for (const auto& [project, n] : pp) per_project[project] = n;
                return json{{"pooled", pooled}, {"per_project", per_project}};
            };
            boxes["change_counts"] = json{{"other", counts_json(n_other, count_other)},
                                          {"inducing", counts_json(n_inducing, count_inducing)}};
            std::ofstream out(out_dir / "boxes.json");
            out << boxes.dump(2) << '\n';
        }
        return 0;
    });

    std::ostringstream table;
    emit_summary(report.rows, table);
    report.summary_table = table.str();
    report.record_count = records.size();
    report.label_count = all_labels.size();
    return report;
}

void emit_summary(const std::vector<StudyRow>& rows, std::ostream& out) {
    out << "WD Metric | Median other | Median bug inducing | P-value | Effect size\n";
    for (const auto& row : rows) {
        if (!row.test) {
            out << row.metric << " | - | - | - | -\n";
            continue;
        }
        const TestResult& t = *row.test;
        std::string p = t.p_value < 1e-4 ? "<0.0001" : fmt_fixed(t.p_value, 4);
        std::string effect = "-";
        if (t.delta) {
            effect = fmt_fixed(*t.delta, 2) + " " + std::string(abbrev(*t.magnitude));
        }
        out << row.metric << " | " << fmt_fixed(t.median_other, 4) << " | "
            << fmt_fixed(t.median_inducing, 4) << " | " << p << " | " << effect << "\n";
    }
}

}  // namespace wde
