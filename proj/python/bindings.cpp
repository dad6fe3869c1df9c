#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "wdevolve/lint.hpp"
#include "wdevolve/metrics.hpp"
#include "wdevolve/pipeline.hpp"
#include "wdevolve/stats.hpp"

namespace py = pybind11;
using namespace wde;

namespace {

MwuMode mode_from(const std::string& name) {
    if (name == "auto") return MwuMode::Auto;
    if (name == "exact") return MwuMode::Exact;
    if (name == "approx" || name == "approximate") return MwuMode::Approximate;
    throw Error("unknown MWU mode: " + name + " (use auto, exact or approx)");
}

py::dict test_result_dict(const TestResult& t) {
    py::dict d;
    d["metric"] = t.metric_name;
    d["n_other"] = t.n_other;
    d["n_inducing"] = t.n_inducing;
    d["median_other"] = t.median_other;
    d["median_inducing"] = t.median_inducing;
    d["u"] = t.u_statistic;
    d["p_value"] = t.p_value;
    d["significant"] = t.significant;
    if (t.delta) {
        d["delta"] = *t.delta;
        d["magnitude"] = std::string(to_string(*t.magnitude));
    } else {
        d["delta"] = py::none();
        d["magnitude"] = py::none();
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_wdevolve, m) {
    m.doc() = "Warning-density repository mining: lint, evolution metrics and statistics";

    m.def("count_lloc", [](const std::string& content) { return count_lloc(content); },
          py::arg("content"), "Logical lines of code after comment and blank-line stripping.");

    m.def(
        "analyze_file",
        [](const std::string& content, const std::string& path) {
            FileAnalysis analysis = analyze_file(content, path);
            py::list warnings;
            for (const Warning& w : analysis.warnings) {
                py::dict entry;
                entry["rule"] = w.rule_id;
                entry["line"] = w.line;
                warnings.append(entry);
            }
            py::dict result;
            result["path"] = analysis.path;
            result["lloc"] = analysis.lloc;
            result["warnings"] = warnings;
            return result;
        },
        py::arg("content"), py::arg("path") = "<memory>",
        "Runs the built-in rules over the content.");

    m.def("builtin_rule_ids", []() { return builtin_rule_ids(); });

    m.def("warning_density",
          [](std::int64_t warnings, std::int64_t lloc) { return warning_density(warnings, lloc); },
          py::arg("warnings"), py::arg("lloc"));

    m.def("fd", &fd, py::arg("file_wd"), py::arg("system_wd"),
          "Density difference of a file against the rest of its system.");

    m.def("dfd", &dfd, py::arg("deltas"),
          "Decayed cumulative density deltas, newest first weighted in full.");

    m.def(
        "mann_whitney_u",
        [](const std::vector<double>& a, const std::vector<double>& b, const std::string& mode) {
            MwuResult r = mann_whitney_u(a, b, mode_from(mode));
            py::dict d;
            d["u"] = r.u;
            d["p_value"] = r.p;
            d["exact"] = r.exact;
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("mode") = "auto",
        "Two-sided Mann-Whitney U test of the first sample against the second.");

    m.def("bonferroni", &bonferroni, py::arg("alpha"), py::arg("tests"));

    m.def(
        "cliffs_delta",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            DeltaResult r = cliffs_delta(a, b);
            py::dict d;
            d["delta"] = r.delta;
            d["magnitude"] = std::string(to_string(r.magnitude));
            return d;
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "normality_test",
        [](const std::vector<double>& sample) {
            NormalityResult r = normality_test(sample);
            py::dict d;
            d["statistic"] = r.statistic;
            d["p_value"] = r.p;
            d["z_skew"] = r.z_skew;
            d["z_kurt"] = r.z_kurt;
            return d;
        },
        py::arg("sample"), "D'Agostino-Pearson omnibus normality test (needs n >= 20).");

    m.def(
        "box_summary",
        [](const std::vector<double>& sample) {
            BoxSummary b = box_summary(sample);
            py::dict d;
            d["median"] = b.median;
            d["q1"] = b.q1;
            d["q3"] = b.q3;
            d["whisker_low"] = b.whisker_low;
            d["whisker_high"] = b.whisker_high;
            d["n"] = b.n;
            return d;
        },
        py::arg("sample"));

    m.def("median", [](const std::vector<double>& sample) { return median(sample); },
          py::arg("sample"));

    m.def(
        "run_pipeline",
        [](const std::string& config_path) {
            RunReport report;
            {
                py::gil_scoped_release release;
                report = run_pipeline(PipelineConfig::load(config_path));
            }
            py::list rows;
            for (const StudyRow& row : report.rows) {
                py::dict entry;
                entry["metric"] = row.metric;
                if (row.test) {
                    entry["test"] = test_result_dict(*row.test);
                } else {
                    entry["test"] = py::none();
                    entry["skipped_reason"] = row.skipped_reason;
                }
                rows.append(entry);
            }
            py::dict d;
            d["records"] = report.record_count;
            d["labels"] = report.label_count;
            d["rows"] = rows;
            d["summary_table"] = report.summary_table;
            return d;
        },
        py::arg("config_path"),
        "Runs the full study described by a pipeline config file and returns the comparison "
        "table; output files land in the config's output directory.");
}
