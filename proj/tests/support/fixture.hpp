#pragma once

#include <string>

#include "wdevolve/model.hpp"

namespace wde::testing {

/// Linear 200-commit history over 30 files where ten files each receive one
/// change that inserts eight boolean-comparison warnings, fixed again by the
/// file's next change and annotated with consensus 4. The inducing changes
/// are the only ones whose after-version carries warnings, so their density
/// metrics separate cleanly from the rest.
RepositoryLog planted_history();

/// Writes `log` plus rule set and pipeline configs under `dir` and returns
/// the config path. Rule sets: "all" (every builtin rule) and "default"
/// (empty-catch, deep-nest, bool-cmp). Output directory is <dir>/out.
std::string write_study(const std::string& dir, const RepositoryLog& log);

}  // namespace wde::testing
