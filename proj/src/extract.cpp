#include "wdevolve/extract.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <sstream>

namespace wde {

CommandResult run_command(const std::vector<std::string>& argv, const std::string& cwd) {
    if (argv.empty()) throw Error("empty command");

    int fds[2];
    if (pipe(fds) != 0) throw Error("pipe: " + std::string(std::strerror(errno)));

    pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        throw Error("fork: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        close(fds[0]);
        dup2(fds[1], STDOUT_FILENO);
        dup2(fds[1], STDERR_FILENO);
        close(fds[1]);
        if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(127);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }

    close(fds[1]);
    CommandResult result;
    char buf[4096];
    ssize_t n;
    while ((n = read(fds[0], buf, sizeof(buf))) > 0) {
        result.output.append(buf, static_cast<std::size_t>(n));
    }
    close(fds[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    result.status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return result;
}

namespace {

std::string git(const std::string& cwd, const std::vector<std::string>& args) {
    std::vector<std::string> argv = {"git"};
    argv.insert(argv.end(), args.begin(), args.end());
    CommandResult r = run_command(argv, cwd);
    if (r.status != 0) {
        std::string cmd = "git";
        for (const auto& a : args) cmd += " " + a;
        throw Error(cmd + " failed (" + std::to_string(r.status) + "): " + r.output);
    }
    return r.output;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

// "@@ -os[,ol] +ns[,nl] @@". Unified headers anchor empty ranges on the line
// before the gap; the model anchors them on the first line after it, hence
// the +1 on zero-length ranges.
Hunk parse_hunk_header(const std::string& line) {
    auto parse_range = [&](std::size_t pos, int* start, int* len) {
        char* end = nullptr;
        long s = std::strtol(line.c_str() + pos, &end, 10);
        long l = 1;
        if (*end == ',') l = std::strtol(end + 1, &end, 10);
        *start = static_cast<int>(s);
        *len = static_cast<int>(l);
        return static_cast<std::size_t>(end - line.c_str());
    };
    Hunk h;
    std::size_t at = line.find("@@ -");
    if (at == std::string::npos) throw Error("unparseable hunk header: " + line);
    std::size_t pos = parse_range(at + 4, &h.old_start, &h.old_len);
    std::size_t plus = line.find('+', pos);
    if (plus == std::string::npos) throw Error("unparseable hunk header: " + line);
    parse_range(plus + 1, &h.new_start, &h.new_len);
    if (h.old_len == 0) h.old_start += 1;
    if (h.new_len == 0) h.new_start += 1;
    return h;
}

std::optional<std::string> strip_prefix(const std::string& line, const char* prefix) {
    std::size_t len = std::strlen(prefix);
    if (line.rfind(prefix, 0) == 0) return line.substr(len);
    return std::nullopt;
}

struct DiffEntry {
    ChangeKind kind = ChangeKind::Modify;
    std::string path;
    std::string old_path;
    std::vector<Hunk> hunks;
    bool binary = false;
};

std::vector<DiffEntry> parse_diff(const std::string& text) {
    std::vector<DiffEntry> entries;
    DiffEntry* cur = nullptr;
    for (const std::string& line : split_lines(text)) {
        if (line.rfind("diff --git ", 0) == 0) {
            entries.emplace_back();
            cur = &entries.back();
            continue;
        }
        if (cur == nullptr) continue;
        if (line.rfind("new file mode", 0) == 0) {
            cur->kind = ChangeKind::Add;
        } else if (line.rfind("deleted file mode", 0) == 0) {
            cur->kind = ChangeKind::Delete;
        } else if (auto from = strip_prefix(line, "rename from ")) {
            cur->kind = ChangeKind::Rename;
            cur->old_path = *from;
        } else if (auto to = strip_prefix(line, "rename to ")) {
            cur->path = *to;
        } else if (auto before = strip_prefix(line, "--- ")) {
            if (*before != "/dev/null" && cur->path.empty() && cur->old_path.empty()) {
                cur->old_path = before->substr(2);  // strip "a/"
            }
        } else if (auto after = strip_prefix(line, "+++ ")) {
            if (*after == "/dev/null") {
                cur->path = cur->old_path;
                cur->old_path.clear();
            } else if (cur->kind != ChangeKind::Rename) {
                cur->path = after->substr(2);  // strip "b/"
            }
        } else if (line.rfind("@@ -", 0) == 0) {
            cur->hunks.push_back(parse_hunk_header(line));
        } else if (line.rfind("Binary files ", 0) == 0 || line == "GIT binary patch") {
            cur->binary = true;
        }
    }
    return entries;
}

}  // namespace

RepositoryLog extract_log(const std::string& checkout_dir, const ExtractOptions& options) {
    RepositoryLog log;

    std::map<std::string, std::string> heads;
    for (const std::string& line :
         split_lines(git(checkout_dir, {"for-each-ref", "refs/heads",
                                        "--format=%(refname:short)\t%(objectname)"}))) {
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) continue;
        heads[line.substr(0, tab)] = line.substr(tab + 1);
    }
    if (heads.empty()) throw Error("repository has no branches: " + checkout_dir);

    std::string main_branch;
    CommandResult head = run_command({"git", "symbolic-ref", "--short", "HEAD"}, checkout_dir);
    if (head.status == 0) {
        main_branch = head.output;
        while (!main_branch.empty() && (main_branch.back() == '\n' || main_branch.back() == '\r')) {
            main_branch.pop_back();
        }
    }
    if (heads.count(main_branch) == 0) {
        if (heads.count("main")) main_branch = "main";
        else if (heads.count("master")) main_branch = "master";
        else if (heads.size() == 1) main_branch = heads.begin()->first;
        else throw Error("cannot determine the main branch of " + checkout_dir);
    }

    for (const auto& [name, commit] : heads) {
        log.heads.push_back({options.project, name, commit, name == main_branch});
    }

    for (const std::string& line :
         split_lines(git(checkout_dir, {"log", "--all", "--format=%H\t%P\t%ct\t%s"}))) {
        std::istringstream fields(line);
        CommitRecord commit;
        std::string parents, timestamp;
        std::getline(fields, commit.id, '\t');
        std::getline(fields, parents, '\t');
        std::getline(fields, timestamp, '\t');
        std::getline(fields, commit.message);
        std::istringstream ps(parents);
        std::string p;
        while (ps >> p) commit.parents.push_back(p);
        commit.timestamp = std::strtoll(timestamp.c_str(), nullptr, 10);
        log.commit_project[commit.id] = options.project;
        log.commits.push_back(std::move(commit));
    }
    std::reverse(log.commits.begin(), log.commits.end());  // oldest first

    for (const CommitRecord& commit : log.commits) {
        std::string diff;
        if (commit.parents.empty()) {
            diff = git(checkout_dir,
                       {"diff-tree", "-r", "-M", "-U0", "--root", "--no-commit-id", commit.id});
        } else {
            diff = git(checkout_dir, {"diff-tree", "-r", "-M", "-U0", "--no-commit-id",
                                      commit.parents.front(), commit.id});
        }
        for (DiffEntry& entry : parse_diff(diff)) {
            if (entry.binary) continue;
            FileChangeRecord change;
            change.commit_id = commit.id;
            change.kind = entry.kind;
            change.path = entry.path;
            if (entry.kind == ChangeKind::Rename) change.old_path = entry.old_path;
            std::sort(entry.hunks.begin(), entry.hunks.end(),
                      [](const Hunk& a, const Hunk& b) { return a.old_start < b.old_start; });
            change.hunks = std::move(entry.hunks);

            if (entry.kind != ChangeKind::Add) {
                const std::string& old_name =
                    entry.kind == ChangeKind::Rename ? entry.old_path : entry.path;
                change.before_blob = log.blobs.put(
                    git(checkout_dir, {"show", commit.parents.front() + ":" + old_name}));
            }
            if (entry.kind != ChangeKind::Delete) {
                change.after_blob =
                    log.blobs.put(git(checkout_dir, {"show", commit.id + ":" + entry.path}));
            }
            log.changes.push_back(std::move(change));
        }
    }

    log.validate();
    return log;
}

}  // namespace wde
