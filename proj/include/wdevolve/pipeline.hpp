#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wdevolve/metrics.hpp"
#include "wdevolve/stats.hpp"

namespace wde {

/// Everything one study run needs. Relative paths are resolved against the
/// directory holding the config file.
struct PipelineConfig {
    std::string log_path;
    std::optional<std::string> blob_dir;
    std::vector<std::string> ruleset_paths;  // loaded names must cover "all" and "default"
    int consensus_threshold = 3;
    bool exclude_self = true;
    std::optional<std::string> production_filter_path;
    std::optional<std::string> external_report_path;
    std::string output_dir;
    double alpha = 0.05;
    int normality_tests = 8;
    int mwu_tests = 4;
    /// CLI-only: restricts records.csv/records.jsonl/totals.csv to one rule
    /// set. Statistics still run over everything.
    std::optional<std::string> ruleset_filter;

    static PipelineConfig load(const std::string& config_path);
};

/// One line of the final comparison table. `test` is empty when the
/// comparison could not run (then `skipped_reason` says why).
struct StudyRow {
    std::string metric;  // fd | fd_default | dfd | dfd_default
    std::optional<TestResult> test;
    std::string skipped_reason;
};

struct RunReport {
    std::vector<StudyRow> rows;
    std::size_t record_count = 0;
    std::size_t label_count = 0;
    std::string summary_table;
};

/// Runs the whole study: log -> graph -> snapshots -> labels -> metrics ->
/// statistics, writing records.csv, records.jsonl, labels.csv, totals.csv,
/// summary.json and boxes.json into the output directory. Deterministic for
/// identical inputs. Errors carry the failing stage in brackets.
RunReport run_pipeline(const PipelineConfig& config);

/// Renders rows as the study table: metric, group medians at 4 decimals,
/// p-value ("<0.0001" below 1e-4) and effect size ("-" unless significant).
void emit_summary(const std::vector<StudyRow>& rows, std::ostream& out);

}  // namespace wde
