#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wdevolve/error.hpp"

namespace wde {

/// Named subset of rule ids. The set named "all" is special: it passes every
/// warning through unfiltered, which keeps externally ingested rule ids alive.
struct RuleSet {
    std::string name;
    std::set<std::string> members;

    bool is_all() const { return name == "all"; }
    bool contains(const std::string& rule_id) const {
        return is_all() || members.count(rule_id) != 0;
    }

    static RuleSet load(const std::string& config_path);  // JSON {"name", "members"}
};

struct Warning {
    std::string rule_id;
    std::string path;
    int line = 1;  // 1-based

    bool operator==(const Warning&) const = default;
};

struct FileAnalysis {
    std::string path;
    std::int64_t lloc = 0;
    std::vector<Warning> warnings;
};

/// Per-rule warning counts plus size; what snapshots and metrics carry around
/// instead of full warning lists.
struct FileSummary {
    std::int64_t lloc = 0;
    std::map<std::string, int> rule_counts;

    std::int64_t warnings_for(const RuleSet& rules) const;
};

FileSummary summarize(const FileAnalysis& analysis);

/// Logical lines of code: lines with at least one code token left after
/// stripping // and /* */ comments and blank lines. String literals are code
/// and never open comments.
std::int64_t count_lloc(std::string_view content);

/// Built-in rule ids, in catalog order:
///   R-LONG-LINE    line longer than 120 characters
///   R-MAGIC-NUM    numeric literal other than 0/1 on a line without final/const
///   R-TODO         comment containing TODO or FIXME
///   R-EMPTY-CATCH  catch block with nothing but whitespace/comments inside
///   R-DEEP-NEST    brace depth exceeding 6
///   R-BOOL-CMP     == or != against a boolean literal
const std::vector<std::string>& builtin_rule_ids();

/// Runs every built-in rule over `content`. Deterministic: warnings come out
/// sorted by (line, rule).
FileAnalysis analyze_file(std::string_view content, const std::string& path);

/// Restricts warnings to the rule set; lloc is untouched.
FileAnalysis filter_warnings(const FileAnalysis& analysis, const RuleSet& rules);

enum class ReportFormat { PmdCsv };

/// Parses an external analyzer report (CSV with header columns file, line,
/// rule; extra columns ignored). Warnings are grouped per file value, sorted
/// by path; lloc stays 0 because size is always measured from blob content.
std::vector<FileAnalysis> ingest_external_report(std::istream& report,
                                                 ReportFormat format = ReportFormat::PmdCsv);

/// Produces per-content-version summaries. Pure: equal content gives an equal
/// summary, so results may be cached and shared by digest.
class AnalysisEngine {
  public:
    virtual ~AnalysisEngine() = default;
    virtual FileSummary summarize_content(std::string_view content) const = 0;
};

/// The built-in rule catalog.
class BuiltinEngine final : public AnalysisEngine {
  public:
    FileSummary summarize_content(std::string_view content) const override;
};

/// Warnings come from an ingested report instead of the built-in rules. The
/// report's file column is matched to content by digest: each row's file
/// value, reduced to its basename without extension, must be the SHA-256 ref
/// of the analyzed content (i.e. the report was produced by running the
/// external tool over the blob store files).
class ExternalReportEngine final : public AnalysisEngine {
  public:
    explicit ExternalReportEngine(const std::vector<FileAnalysis>& report);
    FileSummary summarize_content(std::string_view content) const override;

  private:
    std::map<std::string, std::map<std::string, int>> counts_by_digest_;
};

}  // namespace wde
