#include "wdevolve/model.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "wdevolve/digest.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace wde {

std::string_view to_string(ChangeKind kind) {
    switch (kind) {
        case ChangeKind::Add: return "add";
        case ChangeKind::Modify: return "modify";
        case ChangeKind::Delete: return "delete";
        case ChangeKind::Rename: return "rename";
    }
    return "?";
}

std::optional<ChangeKind> change_kind_from(std::string_view name) {
    if (name == "add") return ChangeKind::Add;
    if (name == "modify") return ChangeKind::Modify;
    if (name == "delete") return ChangeKind::Delete;
    if (name == "rename") return ChangeKind::Rename;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// BlobStore

std::string BlobStore::put(std::string content) {
    std::string ref = sha256_hex(content);
    blobs_.emplace(ref, std::move(content));
    return ref;
}

const std::string& BlobStore::get(const std::string& ref) const {
    auto it = blobs_.find(ref);
    if (it == blobs_.end()) throw Error("blob ref missing: " + ref);
    return it->second;
}

bool BlobStore::contains(const std::string& ref) const { return blobs_.count(ref) != 0; }

namespace {

bool is_hex_digest_name(const std::string& name) {
    if (name.size() != 64) return false;
    return std::all_of(name.begin(), name.end(), [](unsigned char c) {
        return std::isdigit(c) || (c >= 'a' && c <= 'f');
    });
}

std::string read_file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read file: " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

void BlobStore::load_directory(const std::string& dir) {
    fs::path root(dir);
    if (!fs::is_directory(root)) throw Error("blob store directory not found: " + dir);
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (!is_hex_digest_name(name)) continue;
        std::string content = read_file_bytes(entry.path());
        if (sha256_hex(content) != name) {
            throw Error("blob file " + name + " does not match its content digest");
        }
        blobs_.emplace(name, std::move(content));
    }
}

void BlobStore::write_directory(const std::string& dir) const {
    fs::path root(dir);
    fs::create_directories(root);
    for (const auto& [ref, content] : blobs_) {
        std::ofstream out(root / ref, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write blob file: " + (root / ref).string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
}

// ---------------------------------------------------------------------------
// RepositoryLog accessors

const CommitRecord* RepositoryLog::find_commit(const std::string& id) const {
    for (const auto& c : commits) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

std::vector<std::string> RepositoryLog::projects() const {
    std::set<std::string> names;
    for (const auto& [_, p] : commit_project) names.insert(p);
    for (const auto& h : heads) names.insert(h.project);
    if (names.empty()) names.insert(kDefaultProject);
    return {names.begin(), names.end()};
}

std::map<std::string, std::string> RepositoryLog::head_refs(const std::string& project) const {
    std::map<std::string, std::string> refs;
    for (const auto& h : heads) {
        if (h.project == project) refs[h.name] = h.commit_id;
    }
    return refs;
}

std::string RepositoryLog::main_head(const std::string& project) const {
    for (const auto& h : heads) {
        if (h.project == project && h.main) return h.commit_id;
    }
    throw Error("no main branch head for project " + project);
}

std::string RepositoryLog::project_of(const std::string& commit_id) const {
    auto it = commit_project.find(commit_id);
    return it == commit_project.end() ? kDefaultProject : it->second;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void validate_hunks(const FileChangeRecord& ch) {
    const Hunk* prev = nullptr;
    for (const auto& h : ch.hunks) {
        if (h.old_start < 1 || h.new_start < 1 || h.old_len < 0 || h.new_len < 0) {
            throw Error("invalid hunk in change of " + ch.path + " at " + ch.commit_id);
        }
        if (prev) {
            if (prev->old_start + prev->old_len > h.old_start ||
                prev->new_start + prev->new_len > h.new_start) {
                throw Error("hunks overlap or are unsorted in change of " + ch.path + " at " +
                            ch.commit_id);
            }
        }
        prev = &h;
    }
}

}  // namespace

void RepositoryLog::validate() const {
    if (commits.empty()) throw Error("no commits");

    std::unordered_set<std::string> ids;
    for (const auto& c : commits) {
        if (!ids.insert(c.id).second) throw Error("duplicate commit id: " + c.id);
        if (c.timestamp < 0) throw Error("negative timestamp on commit " + c.id);
    }
    for (const auto& c : commits) {
        for (const auto& p : c.parents) {
            if (!ids.count(p)) throw Error("commit " + c.id + " references unknown parent " + p);
        }
    }

    for (const auto& ch : changes) {
        if (!ids.count(ch.commit_id)) {
            throw Error("change of " + ch.path + " references unknown commit " + ch.commit_id);
        }
        auto context = [&] { return " (change of " + ch.path + " at " + ch.commit_id + ")"; };
        switch (ch.kind) {
            case ChangeKind::Add:
                if (ch.before_blob) throw Error("add carries a before blob" + context());
                if (ch.old_path) throw Error("add carries an old_path" + context());
                if (!ch.after_blob) throw Error("add is missing after content" + context());
                break;
            case ChangeKind::Modify:
                if (!ch.before_blob) throw Error("modify is missing before content" + context());
                if (!ch.after_blob) throw Error("modify is missing after content" + context());
                break;
            case ChangeKind::Delete:
                if (ch.after_blob) throw Error("delete carries an after blob" + context());
                if (!ch.before_blob) throw Error("delete is missing before content" + context());
                break;
            case ChangeKind::Rename:
                if (!ch.old_path) throw Error("rename is missing old_path" + context());
                if (!ch.before_blob) throw Error("rename is missing before content" + context());
                if (!ch.after_blob) throw Error("rename is missing after content" + context());
                break;
        }
        if (ch.before_blob && !blobs.contains(*ch.before_blob)) {
            throw Error("blob ref missing: " + *ch.before_blob + context());
        }
        if (ch.after_blob && !blobs.contains(*ch.after_blob)) {
            throw Error("blob ref missing: " + *ch.after_blob + context());
        }
        validate_hunks(ch);
    }

    std::map<std::string, int> mains;
    for (const auto& h : heads) {
        if (!ids.count(h.commit_id)) {
            throw Error("head " + h.name + " references unknown commit " + h.commit_id);
        }
        if (h.main) mains[h.project]++;
    }
    for (const auto& project : projects()) {
        int n = mains.count(project) ? mains.at(project) : 0;
        if (n == 0) throw Error("no main branch head for project " + project);
        if (n > 1) throw Error("multiple main branch heads for project " + project);
    }

    for (const auto& a : annotations) {
        if (a.old_line < 1) throw Error("annotation " + a.issue_id + " has old_line < 1");
        if (a.consensus < 0 || a.consensus > 4) {
            throw Error("annotation " + a.issue_id + " has consensus outside 0..4");
        }
        if (!ids.count(a.fix_commit)) {
            throw Error("annotation " + a.issue_id + " references unknown commit " + a.fix_commit);
        }
    }
}

// ---------------------------------------------------------------------------
// JSON-lines parsing

namespace {

const json& require_field(const json& rec, const char* name, std::size_t line) {
    auto it = rec.find(name);
    if (it == rec.end()) throw ParseError(line, std::string("missing field '") + name + "'");
    return *it;
}

std::string get_string(const json& rec, const char* name, std::size_t line) {
    const json& v = require_field(rec, name, line);
    if (!v.is_string()) throw ParseError(line, std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

std::int64_t get_int(const json& rec, const char* name, std::size_t line) {
    const json& v = require_field(rec, name, line);
    if (!v.is_number_integer()) {
        throw ParseError(line, std::string("field '") + name + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

std::optional<std::string> opt_string(const json& rec, const char* name, std::size_t line) {
    auto it = rec.find(name);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ParseError(line, std::string("field '") + name + "' must be a string");
    return it->get<std::string>();
}

}  // namespace

RepositoryLog parse_repository_log(std::istream& in) {
    return parse_repository_log(in, BlobStore{});
}

RepositoryLog parse_repository_log(std::istream& in, BlobStore preloaded) {
    RepositoryLog log;
    log.blobs = std::move(preloaded);

    std::string project = kDefaultProject;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(lineno, std::string("malformed record: ") + e.what());
        }
        if (!rec.is_object()) throw ParseError(lineno, "record is not a JSON object");

        std::string kind = get_string(rec, "kind", lineno);
        if (kind == "project") {
            project = get_string(rec, "name", lineno);
        } else if (kind == "commit") {
            CommitRecord c;
            c.id = get_string(rec, "id", lineno);
            if (auto it = rec.find("parents"); it != rec.end()) {
                if (!it->is_array()) throw ParseError(lineno, "field 'parents' must be an array");
                for (const auto& p : *it) {
                    if (!p.is_string()) throw ParseError(lineno, "parent ids must be strings");
                    c.parents.push_back(p.get<std::string>());
                }
            }
            c.timestamp = get_int(rec, "timestamp", lineno);
            if (auto m = opt_string(rec, "message", lineno)) c.message = *m;
            log.commit_project[c.id] = project;
            log.commits.push_back(std::move(c));
        } else if (kind == "change") {
            FileChangeRecord ch;
            ch.commit_id = get_string(rec, "commit_id", lineno);
            ch.path = get_string(rec, "path", lineno);
            std::string kind_name = get_string(rec, "change_kind", lineno);
            auto parsed = change_kind_from(kind_name);
            if (!parsed) throw ParseError(lineno, "unknown change_kind: " + kind_name);
            ch.kind = *parsed;
            ch.old_path = opt_string(rec, "old_path", lineno);
            ch.before_blob = opt_string(rec, "before_blob", lineno);
            ch.after_blob = opt_string(rec, "after_blob", lineno);
            // Inline content wins over blob refs.
            if (auto c = opt_string(rec, "before_content", lineno)) {
                ch.before_blob = log.blobs.put(*c);
            }
            if (auto c = opt_string(rec, "after_content", lineno)) {
                ch.after_blob = log.blobs.put(*c);
            }
            if (auto it = rec.find("hunks"); it != rec.end()) {
                if (!it->is_array()) throw ParseError(lineno, "field 'hunks' must be an array");
                for (const auto& h : *it) {
                    if (!h.is_array() || h.size() != 4) {
                        throw ParseError(lineno, "each hunk must be [old_start, old_len, new_start, new_len]");
                    }
                    Hunk hunk;
                    try {
                        hunk.old_start = h[0].get<int>();
                        hunk.old_len = h[1].get<int>();
                        hunk.new_start = h[2].get<int>();
                        hunk.new_len = h[3].get<int>();
                    } catch (const json::exception&) {
                        throw ParseError(lineno, "hunk entries must be integers");
                    }
                    ch.hunks.push_back(hunk);
                }
            }
            log.changes.push_back(std::move(ch));
        } else if (kind == "head") {
            HeadRef h;
            h.project = project;
            h.name = get_string(rec, "name", lineno);
            h.commit_id = get_string(rec, "commit_id", lineno);
            if (auto it = rec.find("main"); it != rec.end()) {
                if (!it->is_boolean()) throw ParseError(lineno, "field 'main' must be a boolean");
                h.main = it->get<bool>();
            }
            log.heads.push_back(std::move(h));
        } else if (kind == "annotation") {
            BugFixAnnotation a;
            a.issue_id = get_string(rec, "issue_id", lineno);
            a.fix_commit = get_string(rec, "fix_commit", lineno);
            a.path = get_string(rec, "path", lineno);
            a.old_line = static_cast<int>(get_int(rec, "old_line", lineno));
            a.consensus = static_cast<int>(get_int(rec, "consensus", lineno));
            log.annotations.push_back(std::move(a));
        } else {
            throw ParseError(lineno, "unknown record kind: " + kind);
        }
    }

    // A single unnamed head is the main branch even without an explicit flag.
    std::map<std::string, std::vector<HeadRef*>> by_project;
    for (auto& h : log.heads) by_project[h.project].push_back(&h);
    for (auto& [_, refs] : by_project) {
        bool any_main = std::any_of(refs.begin(), refs.end(), [](HeadRef* h) { return h->main; });
        if (!any_main && refs.size() == 1) refs[0]->main = true;
    }

    log.validate();
    return log;
}

// ---------------------------------------------------------------------------
// Serialization

void serialize_repository_log(const RepositoryLog& log, std::ostream& out, bool inline_blobs) {
    auto names = log.projects();
    bool sole_default = names.size() == 1 && names[0] == kDefaultProject;

    for (const auto& project : names) {
        if (!sole_default) {
            out << json{{"kind", "project"}, {"name", project}}.dump() << '\n';
        }
        for (const auto& c : log.commits) {
            if (log.project_of(c.id) != project) continue;
            json rec{{"kind", "commit"},
                     {"id", c.id},
                     {"parents", c.parents},
                     {"timestamp", c.timestamp}};
            if (!c.message.empty()) rec["message"] = c.message;
            out << rec.dump() << '\n';
        }
        for (const auto& h : log.heads) {
            if (h.project != project) continue;
            json rec{{"kind", "head"}, {"name", h.name}, {"commit_id", h.commit_id}};
            if (h.main) rec["main"] = true;
            out << rec.dump() << '\n';
        }
        for (const auto& ch : log.changes) {
            if (log.project_of(ch.commit_id) != project) continue;
            json rec{{"kind", "change"},
                     {"commit_id", ch.commit_id},
                     {"path", ch.path},
                     {"change_kind", std::string(to_string(ch.kind))}};
            if (ch.old_path) rec["old_path"] = *ch.old_path;
            if (inline_blobs) {
                if (ch.before_blob) rec["before_content"] = log.blobs.get(*ch.before_blob);
                if (ch.after_blob) rec["after_content"] = log.blobs.get(*ch.after_blob);
            } else {
                if (ch.before_blob) rec["before_blob"] = *ch.before_blob;
                if (ch.after_blob) rec["after_blob"] = *ch.after_blob;
            }
            if (!ch.hunks.empty()) {
                json hunks = json::array();
                for (const auto& h : ch.hunks) {
                    hunks.push_back({h.old_start, h.old_len, h.new_start, h.new_len});
                }
                rec["hunks"] = std::move(hunks);
            }
            out << rec.dump() << '\n';
        }
        for (const auto& a : log.annotations) {
            if (log.project_of(a.fix_commit) != project) continue;
            json rec{{"kind", "annotation"}, {"issue_id", a.issue_id},
                     {"fix_commit", a.fix_commit}, {"path", a.path},
                     {"old_line", a.old_line},    {"consensus", a.consensus}};
            out << rec.dump() << '\n';
        }
    }
}

RepositoryLog load_repository_log(const std::string& log_path,
                                  const std::optional<std::string>& blob_dir) {
    BlobStore store;
    if (blob_dir) store.load_directory(*blob_dir);
    std::ifstream in(log_path, std::ios::binary);
    if (!in) throw Error("cannot open history log: " + log_path);
    return parse_repository_log(in, std::move(store));
}

bool log_equal(const RepositoryLog& a, const RepositoryLog& b) {
    if (a.projects() != b.projects()) return false;
    for (const auto& project : a.projects()) {
        auto pick = [&](const RepositoryLog& log) {
            RepositoryLog sub;
            for (const auto& c : log.commits) {
                if (log.project_of(c.id) == project) sub.commits.push_back(c);
            }
            for (const auto& h : log.heads) {
                if (h.project == project) sub.heads.push_back(h);
            }
            for (const auto& ch : log.changes) {
                if (log.project_of(ch.commit_id) == project) sub.changes.push_back(ch);
            }
            for (const auto& an : log.annotations) {
                if (log.project_of(an.fix_commit) == project) sub.annotations.push_back(an);
            }
            return sub;
        };
        RepositoryLog sa = pick(a), sb = pick(b);
        // Blob refs are content digests, so equal refs mean equal content.
        if (sa.commits != sb.commits || sa.heads != sb.heads || sa.changes != sb.changes ||
            sa.annotations != sb.annotations) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Production filter and consensus filter

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

PathFilter PathFilter::defaults() {
    PathFilter f;
    f.exclude_segments = {"test", "tests",  "it",   "examples",  "example", "samples",
                          "demo", "docs",   "generated", "target", "build"};
    f.extensions = {".java"};
    return f;
}

PathFilter PathFilter::load(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw Error("cannot open path filter config: " + config_path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw Error("malformed path filter config " + config_path + ": " + e.what());
    }
    PathFilter f = defaults();
    if (cfg.contains("exclude_segments")) {
        f.exclude_segments.clear();
        for (const auto& s : cfg.at("exclude_segments")) {
            f.exclude_segments.insert(lowercase(s.get<std::string>()));
        }
    }
    if (cfg.contains("extensions")) {
        f.extensions.clear();
        for (const auto& s : cfg.at("extensions")) f.extensions.insert(lowercase(s.get<std::string>()));
    }
    return f;
}

bool is_production_file(const std::string& path, const PathFilter& config) {
    if (path.empty()) return false;

    std::string segment;
    std::string last;
    std::size_t start = 0;
    while (start <= path.size()) {
        std::size_t slash = path.find('/', start);
        std::size_t end = slash == std::string::npos ? path.size() : slash;
        segment = path.substr(start, end - start);
        if (!segment.empty()) {
            if (config.exclude_segments.count(lowercase(segment))) return false;
            last = segment;
        }
        if (slash == std::string::npos) break;
        start = slash + 1;
    }
    if (last.empty()) return false;

    std::size_t dot = last.rfind('.');
    if (dot == std::string::npos || dot == 0) return false;
    return config.extensions.count(lowercase(last.substr(dot))) != 0;
}

std::vector<BugFixAnnotation> filter_consensus(const std::vector<BugFixAnnotation>& annotations,
                                               int threshold) {
    if (threshold < 1 || threshold > 4) {
        throw Error("consensus threshold must be in 1..4, got " + std::to_string(threshold));
    }
    std::vector<BugFixAnnotation> kept;
    for (const auto& a : annotations) {
        if (a.consensus >= threshold) kept.push_back(a);
    }
    return kept;
}

int physical_line_count(std::string_view content) {
    if (content.empty()) return 0;
    int lines = static_cast<int>(std::count(content.begin(), content.end(), '\n'));
    if (content.back() != '\n') ++lines;
    return lines;
}

}  // namespace wde
