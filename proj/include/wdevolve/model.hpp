#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wdevolve/error.hpp"

namespace wde {

/// One edited region of a file change, in 1-based line coordinates.
/// Old lines [old_start, old_start+old_len) were replaced by new lines
/// [new_start, new_start+new_len). A pure insertion has old_len == 0 and
/// old_start naming the first old line that now follows the insertion; a pure
/// deletion has new_len == 0 and new_start naming the first surviving new
/// line after the cut. (Note this differs from unified-diff headers, which
/// anchor empty ranges on the line *before* the gap.)
struct Hunk {
    int old_start = 1;
    int old_len = 0;
    int new_start = 1;
    int new_len = 0;

    bool operator==(const Hunk&) const = default;
};

enum class ChangeKind { Add, Modify, Delete, Rename };

std::string_view to_string(ChangeKind kind);
std::optional<ChangeKind> change_kind_from(std::string_view name);

struct CommitRecord {
    std::string id;
    std::vector<std::string> parents;  // first parent first
    std::int64_t timestamp = 0;       // UTC seconds
    std::string message;

    bool operator==(const CommitRecord&) const = default;
};

struct FileChangeRecord {
    std::string commit_id;
    std::string path;  // path after the change (the deleted path for deletes)
    ChangeKind kind = ChangeKind::Modify;
    std::optional<std::string> old_path;  // renames only
    std::optional<std::string> before_blob;
    std::optional<std::string> after_blob;
    std::vector<Hunk> hunks;

    bool operator==(const FileChangeRecord&) const = default;
};

/// Content-addressed text store. Refs are hex SHA-256 digests of the content
/// bytes, so identical content always resolves to the same ref.
class BlobStore {
  public:
    std::string put(std::string content);
    const std::string& get(const std::string& ref) const;  // throws on missing ref
    bool contains(const std::string& ref) const;
    std::size_t size() const { return blobs_.size(); }

    /// Reads every regular file of `dir` whose name is a hex digest.
    void load_directory(const std::string& dir);
    /// Writes each blob to `dir/<digest>`, creating the directory if needed.
    void write_directory(const std::string& dir) const;

    bool operator==(const BlobStore&) const = default;

  private:
    std::map<std::string, std::string> blobs_;
};

struct BugFixAnnotation {
    std::string issue_id;
    std::string fix_commit;
    std::string path;
    int old_line = 1;   // 1-based line in the pre-change version at fix_commit
    int consensus = 0;  // number of labelers agreeing, 0..4

    bool operator==(const BugFixAnnotation&) const = default;
};

struct HeadRef {
    std::string project;
    std::string name;
    std::string commit_id;
    bool main = false;

    bool operator==(const HeadRef&) const = default;
};

/// A full serialized history: commits, per-file changes, branch heads and
/// validated fix-line annotations, plus the content store backing the blob
/// refs. Multiple projects may live in one log (concatenated extracts); every
/// record belongs to the project that was current at its point in the stream.
struct RepositoryLog {
    std::vector<CommitRecord> commits;
    std::vector<FileChangeRecord> changes;
    std::vector<HeadRef> heads;
    std::vector<BugFixAnnotation> annotations;
    std::map<std::string, std::string> commit_project;  // commit id -> project
    BlobStore blobs;

    const CommitRecord* find_commit(const std::string& id) const;
    std::vector<std::string> projects() const;  // sorted, at least one entry
    std::map<std::string, std::string> head_refs(const std::string& project) const;
    /// Tip of the designated main branch of `project`.
    std::string main_head(const std::string& project) const;
    std::string project_of(const std::string& commit_id) const;

    /// Checks every structural invariant; throws Error on the first violation.
    void validate() const;
};

inline constexpr const char* kDefaultProject = "default";

/// Parses the JSON-lines history format. Record kinds: "project", "commit",
/// "change", "head", "annotation". Inline before_content/after_content fields
/// on change records are stored into the blob store and take precedence over
/// blob refs. `preloaded` typically holds the blobs read from a blob
/// directory. The returned log is fully validated.
RepositoryLog parse_repository_log(std::istream& in);
RepositoryLog parse_repository_log(std::istream& in, BlobStore preloaded);

/// Writes a log back out as JSON-lines. With `inline_blobs`, change records
/// carry before_content/after_content so the stream is self-contained;
/// otherwise they reference the blob store by digest.
void serialize_repository_log(const RepositoryLog& log, std::ostream& out, bool inline_blobs = true);

RepositoryLog load_repository_log(const std::string& log_path,
                                  const std::optional<std::string>& blob_dir);

/// Semantic equality: same records per project and identical referenced blobs
/// (record order within a project matters, project order does not).
bool log_equal(const RepositoryLog& a, const RepositoryLog& b);

/// Path classification rules for the production-code filter.
struct PathFilter {
    std::set<std::string> exclude_segments;
    std::set<std::string> extensions;  // with leading dot

    static PathFilter defaults();
    static PathFilter load(const std::string& config_path);  // JSON config
};

/// True iff no path segment (lowercased) is excluded and the file extension
/// (lowercased) is one of the configured source extensions.
bool is_production_file(const std::string& path, const PathFilter& config);

/// Keeps annotations whose consensus is at least `threshold` (1..4).
std::vector<BugFixAnnotation> filter_consensus(const std::vector<BugFixAnnotation>& annotations,
                                               int threshold);

/// Number of physical lines of `content`: '\n'-separated, a trailing fragment
/// without newline counts as a line.
int physical_line_count(std::string_view content);

}  // namespace wde
