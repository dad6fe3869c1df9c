#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "wdevolve/extract.hpp"
#include "wdevolve/pipeline.hpp"

namespace {

int cmd_analyze(const std::string& config_path, bool no_exclude_self,
                const std::string& ruleset) {
    wde::PipelineConfig config = wde::PipelineConfig::load(config_path);
    if (no_exclude_self) config.exclude_self = false;
    if (!ruleset.empty()) config.ruleset_filter = ruleset;
    wde::RunReport report = wde::run_pipeline(config);
    std::cout << report.summary_table;
    std::cout << "wrote " << report.record_count << " records, " << report.label_count
              << " labels to " << config.output_dir << "\n";
    return 0;
}

int cmd_extract(const std::string& repo, const std::string& out_path, const std::string& blob_dir,
                const std::string& project) {
    wde::ExtractOptions options;
    if (!project.empty()) options.project = project;
    wde::RepositoryLog log = wde::extract_log(repo, options);
    if (!blob_dir.empty()) log.blobs.write_directory(blob_dir);
    std::ofstream out(out_path);
    if (!out) throw wde::Error("cannot open output log: " + out_path);
    wde::serialize_repository_log(log, out, blob_dir.empty());
    std::cout << "extracted " << log.commits.size() << " commits, " << log.changes.size()
              << " changes to " << out_path << "\n";
    return 0;
}

int cmd_lint(const std::string& file, const std::string& ruleset) {
    std::ifstream in(file);
    if (!in) throw wde::Error("cannot open file: " + file);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    wde::FileAnalysis analysis = wde::analyze_file(content, file);
    if (!ruleset.empty() && ruleset != "all") {
        if (!std::filesystem::is_regular_file(ruleset)) {
            throw wde::Error("--ruleset takes \"all\" or the path of a rule set config, got: " +
                             ruleset);
        }
        analysis = wde::filter_warnings(analysis, wde::RuleSet::load(ruleset));
    }
    for (const auto& w : analysis.warnings) {
        std::cout << w.path << ":" << w.line << ": " << w.rule_id << "\n";
    }
    std::cout << "lloc " << analysis.lloc << ", warnings " << analysis.warnings.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"warning-density evolution toolchain"};
    app.require_subcommand(1);

    std::string config_path, ruleset;
    bool no_exclude_self = false;
    CLI::App* analyze = app.add_subcommand("analyze", "run the full study pipeline");
    analyze->add_option("--config", config_path, "pipeline config (JSON)")->required();
    analyze->add_flag("--no-exclude-self", no_exclude_self,
                      "keep the changed file inside the system density");
    analyze->add_option("--ruleset", ruleset, "restrict record/total outputs to one rule set");

    std::string repo, out_path, blob_dir, project;
    CLI::App* extract = app.add_subcommand("extract", "read a git checkout into a history log");
    extract->add_option("--repo", repo, "checkout directory")->required();
    extract->add_option("--out", out_path, "history log to write")->required();
    extract->add_option("--blob-dir", blob_dir,
                        "write contents here instead of inlining them into the log");
    extract->add_option("--project", project, "project name recorded in the log");

    std::string lint_file, lint_ruleset;
    CLI::App* lint = app.add_subcommand("lint", "analyze a single file");
    lint->add_option("--file", lint_file, "file to analyze")->required();
    lint->add_option("--ruleset", lint_ruleset, "\"all\" or a rule set config path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return cmd_analyze(config_path, no_exclude_self, ruleset);
        if (extract->parsed()) return cmd_extract(repo, out_path, blob_dir, project);
        if (lint->parsed()) return cmd_lint(lint_file, lint_ruleset);
    } catch (const wde::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
