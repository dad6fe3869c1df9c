#pragma once

#include <string>
#include <vector>

#include "wdevolve/model.hpp"

namespace wde {

struct CommandResult {
    int status = 0;
    std::string output;  // stdout and stderr merged
};

/// Runs argv[0] with the given arguments in `cwd`, without a shell.
CommandResult run_command(const std::vector<std::string>& argv, const std::string& cwd);

struct ExtractOptions {
    std::string project = kDefaultProject;
};

/// Reads a git checkout into a RepositoryLog: every commit reachable from a
/// branch, per-commit file changes diffed against the first parent with
/// rename detection, file contents in the blob store, branch heads with the
/// checked-out branch as main. Binary file changes are skipped.
RepositoryLog extract_log(const std::string& checkout_dir, const ExtractOptions& options = {});

}  // namespace wde
