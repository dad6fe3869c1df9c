#include "support/fixture.hpp"

#include <filesystem>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "wdevolve/error.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace wde::testing {

namespace {

constexpr int kFiles = 30;
constexpr int kBadFiles = 10;
constexpr int kCommits = 200;
constexpr int kBugLines = 8;

std::string file_path(int f) {
    std::string n = std::to_string(f);
    return "src/main/F" + std::string(2 - n.size(), '0') + n + ".java";
}

std::string commit_id(int t) {
    std::string n = std::to_string(t);
    return "c" + std::string(3 - n.size(), '0') + n;
}

std::string render(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

}  // namespace

RepositoryLog planted_history() {
    RepositoryLog log;
    int fresh = 0;
    auto benign = [&fresh] { return "int v" + std::to_string(fresh++) + " = 0;"; };

    std::vector<std::vector<std::string>> files(kFiles);
    std::vector<int> touches(kFiles, 0);

    {
        CommitRecord c;
        c.id = commit_id(1);
        c.timestamp = 1000;
        c.message = "initial import";
        log.commits.push_back(c);
        for (int f = 0; f < kFiles; ++f) {
            for (int l = 0; l < 20; ++l) files[f].push_back(benign());
            FileChangeRecord ch;
            ch.commit_id = c.id;
            ch.path = file_path(f);
            ch.kind = ChangeKind::Add;
            ch.after_blob = log.blobs.put(render(files[f]));
            ch.hunks = {{1, 0, 1, 20}};
            log.changes.push_back(std::move(ch));
        }
    }

    for (int t = 2; t <= kCommits; ++t) {
        CommitRecord c;
        c.id = commit_id(t);
        c.parents = {commit_id(t - 1)};
        c.timestamp = 1000 + 10 * (t - 1);

        int f = (t - 2) % kFiles;
        int k = touches[f]++;
        std::vector<std::string>& lines = files[f];

        FileChangeRecord ch;
        ch.commit_id = c.id;
        ch.path = file_path(f);
        ch.kind = ChangeKind::Modify;
        ch.before_blob = log.blobs.put(render(lines));

        if (f < kBadFiles && k == 1) {
            c.message = "extend parsing";
            for (int j = kBugLines - 1; j >= 0; --j) {
                std::string s = std::to_string(f) + "_" + std::to_string(j);
                lines.insert(lines.begin(), "boolean bug" + s + " = (flag" + s + " == true);");
            }
            ch.hunks = {{1, 0, 1, kBugLines}};
        } else if (f < kBadFiles && k == 2) {
            c.message = "fix comparison bug";
            lines.erase(lines.begin(), lines.begin() + kBugLines);
            ch.hunks = {{1, kBugLines, 1, 0}};

            BugFixAnnotation ann;
            ann.issue_id = "BUG-" + std::to_string(f);
            ann.fix_commit = c.id;
            ann.path = ch.path;
            ann.old_line = 1;
            ann.consensus = 4;
            log.annotations.push_back(ann);
            if (f == 0) {  // second issue resolved by the same origin
                ann.issue_id = "BUG-0-DUP";
                ann.old_line = 2;
                ann.consensus = 3;
                log.annotations.push_back(ann);
            }
            if (f == 1) {  // below the consensus threshold, must be ignored
                ann.issue_id = "BUG-1-WEAK";
                ann.old_line = 3;
                ann.consensus = 2;
                log.annotations.push_back(ann);
            }
        } else {
            c.message = "routine churn";
            int p = f < kBadFiles ? static_cast<int>(lines.size()) : (f + k) % 20 + 1;
            lines[static_cast<std::size_t>(p - 1)] = benign();
            ch.hunks = {{p, 1, p, 1}};
        }

        ch.after_blob = log.blobs.put(render(lines));
        log.changes.push_back(std::move(ch));
        log.commits.push_back(std::move(c));
    }

    log.heads.push_back({kDefaultProject, "main", commit_id(kCommits), true});
    for (const auto& c : log.commits) log.commit_project[c.id] = kDefaultProject;
    log.validate();
    return log;
}

std::string write_study(const std::string& dir, const RepositoryLog& log) {
    fs::create_directories(fs::path(dir) / "rulesets");

    {
        std::ofstream out(fs::path(dir) / "history.jsonl");
        serialize_repository_log(log, out);
        if (!out) throw Error("cannot write history under " + dir);
    }

    json all = {{"name", "all"},
                {"members", {"R-LONG-LINE", "R-MAGIC-NUM", "R-TODO", "R-EMPTY-CATCH",
                             "R-DEEP-NEST", "R-BOOL-CMP"}}};
    json def = {{"name", "default"}, {"members", {"R-EMPTY-CATCH", "R-DEEP-NEST", "R-BOOL-CMP"}}};
    std::ofstream(fs::path(dir) / "rulesets" / "all.json") << all.dump(2) << '\n';
    std::ofstream(fs::path(dir) / "rulesets" / "default.json") << def.dump(2) << '\n';

    json cfg = {{"log_path", "history.jsonl"},
                {"ruleset_paths", {"rulesets/all.json", "rulesets/default.json"}},
                {"output_dir", "out"},
                {"consensus_threshold", 3}};
    fs::path config = fs::path(dir) / "config.json";
    std::ofstream(config) << cfg.dump(2) << '\n';
    return config.string();
}

}  // namespace wde::testing
