#include "support/gen.hpp"

#include <algorithm>
#include <set>

#include "wdevolve/graph.hpp"

namespace wde::testing {

std::vector<std::string> split_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) {
            lines.push_back(content.substr(start));
            break;
        }
        lines.push_back(content.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

namespace {

struct Cell {
    int id = 0;
    std::string text;
};

using FileState = std::vector<Cell>;
using Tree = std::map<std::string, FileState>;

std::string render(const FileState& file) {
    std::string out;
    for (const Cell& c : file) {
        out += c.text;
        out += '\n';
    }
    return out;
}

class Generator {
  public:
    explicit Generator(const GenOptions& opt) : opt_(opt), rng_(opt.seed) {}

    GeneratedHistory run() {
        Tree tree;
        int root_files = 1 + pick(2);
        std::vector<FileChangeRecord> changes;
        for (int i = 0; i < root_files; ++i) add_file(tree, changes);
        std::string tip = commit({}, std::move(tree), std::move(changes));
        mainline_.push_back(tip);

        while (static_cast<int>(log_.commits.size()) < opt_.commits) {
            int room = opt_.commits - static_cast<int>(log_.commits.size());
            int roll = pick(100);
            if (opt_.allow_branches && room >= 2 && roll < 20) {
                branch_and_merge();
            } else if (opt_.allow_branches && room >= 1 && roll < 28) {
                dangling_branch();
            } else {
                mainline_.push_back(edit_commit(mainline_.back()));
            }
        }

        log_.heads.push_back({kDefaultProject, "main", mainline_.back(), true});
        for (std::size_t i = 0; i < dangling_.size(); ++i) {
            log_.heads.push_back(
                {kDefaultProject, "feature-" + std::to_string(i), dangling_[i], false});
        }
        if (pick(4) == 0) detached_lineage();
        add_annotations();
        log_.validate();

        GeneratedHistory out;
        out.log = std::move(log_);
        return out;
    }

  private:
    int pick(int n) { return static_cast<int>(rng_() % static_cast<unsigned>(n)); }

    Cell fresh_cell() {
        int id = next_id_++;
        std::string s = std::to_string(id);
        Cell c;
        c.id = id;
        switch (pick(20)) {
            case 0: case 1: case 2:
                c.text = "boolean b" + s + " = (v" + s + " == true);";
                break;
            case 3: case 4:
                c.text = "int m" + s + " = " + std::to_string(41 + id) + ";";
                break;
            case 5: case 6:
                c.text = "v" + s + ".run(); // TODO check";
                break;
            case 7:
                c.text = "try { v" + s + ".go(); } catch (E e) { }";
                break;
            default:
                c.text = "int v" + s + " = 0;";
                break;
        }
        return c;
    }

    std::string fresh_path() {
        int k = next_file_++;
        if (opt_.test_paths && pick(5) == 0) {
            return "src/test/T" + std::to_string(k) + ".java";
        }
        return "src/core/F" + std::to_string(k) + ".java";
    }

    std::string commit(std::vector<std::string> parents, Tree tree,
                       std::vector<FileChangeRecord> changes) {
        CommitRecord rec;
        rec.id = "c" + std::string(3 - std::min<std::size_t>(3, std::to_string(next_commit_).size()),
                                   '0') +
                 std::to_string(next_commit_);
        ++next_commit_;
        rec.parents = std::move(parents);
        rec.timestamp = next_ts_;
        if (pick(4) != 0) next_ts_ += 10;  // occasional equal timestamps
        rec.message = "change " + rec.id;
        for (auto& ch : changes) ch.commit_id = rec.id;
        for (auto& ch : changes) log_.changes.push_back(std::move(ch));
        log_.commit_project[rec.id] = kDefaultProject;
        trees_[rec.id] = std::move(tree);
        std::string id = rec.id;
        log_.commits.push_back(std::move(rec));
        return id;
    }

    void add_file(Tree& tree, std::vector<FileChangeRecord>& changes) {
        std::string path = fresh_path();
        FileState file;
        int n = 3 + pick(6);
        for (int i = 0; i < n; ++i) file.push_back(fresh_cell());
        FileChangeRecord ch;
        ch.path = path;
        ch.kind = ChangeKind::Add;
        ch.after_blob = log_.blobs.put(render(file));
        Hunk h;
        h.old_start = 1;
        h.old_len = 0;
        h.new_start = 1;
        h.new_len = static_cast<int>(file.size());
        ch.hunks = {h};
        changes.push_back(std::move(ch));
        tree[path] = std::move(file);
    }

    std::vector<Hunk> diff_hunks(const FileState& o, const FileState& n) {
        std::set<int> old_ids, new_ids;
        for (const Cell& c : o) old_ids.insert(c.id);
        for (const Cell& c : n) new_ids.insert(c.id);
        std::vector<Hunk> hunks;
        std::size_t i = 0, j = 0;
        while (i < o.size() || j < n.size()) {
            if (i < o.size() && j < n.size() && o[i].id == n[j].id) {
                ++i;
                ++j;
                continue;
            }
            std::size_t os = i, ns = j;
            while (i < o.size() && new_ids.count(o[i].id) == 0) ++i;
            while (j < n.size() && old_ids.count(n[j].id) == 0) ++j;
            if (i == os && j == ns) throw Error("generator produced a reordering");
            Hunk h;
            h.old_start = static_cast<int>(os + 1);
            h.old_len = static_cast<int>(i - os);
            h.new_start = static_cast<int>(ns + 1);
            h.new_len = static_cast<int>(j - ns);
            hunks.push_back(h);
        }
        return hunks;
    }

    FileState edited(const FileState& in) {
        FileState file = in;
        int ops = 1 + pick(2);
        for (int k = 0; k < ops; ++k) {
            int len = static_cast<int>(file.size());
            switch (pick(3)) {
                case 0: {  // insert
                    int at = pick(len + 1);
                    int cnt = 1 + pick(3);
                    for (int c = 0; c < cnt; ++c) {
                        file.insert(file.begin() + at + c, fresh_cell());
                    }
                    break;
                }
                case 1: {  // delete
                    if (len == 0) break;
                    int at = pick(len);
                    int cnt = 1 + pick(std::min(2, len - at));
                    file.erase(file.begin() + at, file.begin() + at + cnt);
                    break;
                }
                default: {  // replace: the new line gets a fresh identity
                    if (len == 0) break;
                    int at = pick(len);
                    file[at] = fresh_cell();
                    break;
                }
            }
        }
        if (file.empty()) file.push_back(fresh_cell());
        return file;
    }

    /// One commit of 1..2 edits on top of `base`, returning the new commit id.
    std::string edit_commit(const std::string& base) {
        Tree tree = trees_.at(base);
        std::vector<FileChangeRecord> changes;
        int edits = 1 + pick(2);
        for (int k = 0; k < edits; ++k) {
            std::vector<std::string> paths;
            for (const auto& [p, _] : tree) paths.push_back(p);
            int roll = pick(100);
            if (paths.empty() || (roll < 15 && static_cast<int>(paths.size()) < opt_.max_files)) {
                add_file(tree, changes);
                continue;
            }
            const std::string path = paths[static_cast<std::size_t>(pick(
                static_cast<int>(paths.size())))];
            if (already_touched(changes, path)) continue;
            if (roll < 25 && opt_.allow_renames) {  // rename, sometimes with edits
                std::string to = fresh_path();
                FileState before = tree.at(path);
                FileState after = pick(2) == 0 ? edited(before) : before;
                FileChangeRecord ch;
                ch.path = to;
                ch.kind = ChangeKind::Rename;
                ch.old_path = path;
                ch.before_blob = log_.blobs.put(render(before));
                ch.after_blob = log_.blobs.put(render(after));
                ch.hunks = diff_hunks(before, after);
                changes.push_back(std::move(ch));
                tree.erase(path);
                tree[to] = std::move(after);
            } else if (roll < 32 && paths.size() > 1) {  // delete
                FileChangeRecord ch;
                ch.path = path;
                ch.kind = ChangeKind::Delete;
                ch.before_blob = log_.blobs.put(render(tree.at(path)));
                changes.push_back(std::move(ch));
                tree.erase(path);
            } else {  // modify
                FileState before = tree.at(path);
                FileState after = edited(before);
                FileChangeRecord ch;
                ch.path = path;
                ch.kind = ChangeKind::Modify;
                ch.before_blob = log_.blobs.put(render(before));
                ch.after_blob = log_.blobs.put(render(after));
                ch.hunks = diff_hunks(before, after);
                changes.push_back(std::move(ch));
                tree[path] = std::move(after);
            }
        }
        return commit({base}, std::move(tree), std::move(changes));
    }

    static bool already_touched(const std::vector<FileChangeRecord>& changes,
                                const std::string& path) {
        for (const auto& ch : changes) {
            if (ch.path == path || (ch.old_path && *ch.old_path == path)) return true;
        }
        return false;
    }

    void branch_and_merge() {
        const std::string base =
            mainline_[static_cast<std::size_t>(pick(static_cast<int>(mainline_.size())))];
        if (pick(10) == 0) next_ts_ -= 25;  // clock skew on the side branch
        std::string side = edit_commit(base);

        const std::string main_tip = mainline_.back();
        const Tree& base_tree = trees_.at(base);
        const Tree& side_tree = trees_.at(side);
        const Tree& main_tree = trees_.at(main_tip);

        // The merge takes the side branch's version of anything it touched.
        Tree merged = main_tree;
        std::set<std::string> all_paths;
        for (const auto& [p, _] : base_tree) all_paths.insert(p);
        for (const auto& [p, _] : side_tree) all_paths.insert(p);
        for (const auto& path : all_paths) {
            auto b = base_tree.find(path);
            auto s = side_tree.find(path);
            bool changed_on_side =
                (b == base_tree.end()) != (s == side_tree.end()) ||
                (b != base_tree.end() && s != side_tree.end() && !same_ids(b->second, s->second));
            if (!changed_on_side) continue;
            if (s == side_tree.end()) {
                merged.erase(path);
            } else {
                merged[path] = s->second;
            }
        }

        // Records: merged tree vs first parent.
        std::vector<FileChangeRecord> changes;
        std::set<std::string> union_paths;
        for (const auto& [p, _] : main_tree) union_paths.insert(p);
        for (const auto& [p, _] : merged) union_paths.insert(p);
        for (const auto& path : union_paths) {
            auto m = main_tree.find(path);
            auto g = merged.find(path);
            if (m != main_tree.end() && g != merged.end()) {
                if (same_ids(m->second, g->second)) continue;
                FileChangeRecord ch;
                ch.path = path;
                ch.kind = ChangeKind::Modify;
                ch.before_blob = log_.blobs.put(render(m->second));
                ch.after_blob = log_.blobs.put(render(g->second));
                ch.hunks = diff_hunks(m->second, g->second);
                changes.push_back(std::move(ch));
            } else if (g != merged.end()) {
                FileChangeRecord ch;
                ch.path = path;
                ch.kind = ChangeKind::Add;
                ch.after_blob = log_.blobs.put(render(g->second));
                Hunk h;
                h.old_start = 1;
                h.old_len = 0;
                h.new_start = 1;
                h.new_len = static_cast<int>(g->second.size());
                ch.hunks = {h};
                changes.push_back(std::move(ch));
            } else {
                FileChangeRecord ch;
                ch.path = path;
                ch.kind = ChangeKind::Delete;
                ch.before_blob = log_.blobs.put(render(m->second));
                changes.push_back(std::move(ch));
            }
        }
        mainline_.push_back(commit({main_tip, side}, std::move(merged), std::move(changes)));
    }

    void dangling_branch() {
        const std::string base =
            mainline_[static_cast<std::size_t>(pick(static_cast<int>(mainline_.size())))];
        dangling_.push_back(edit_commit(base));
    }

    void detached_lineage() {
        Tree tree;
        std::vector<FileChangeRecord> changes;
        add_file(tree, changes);
        std::string d1 = commit({}, tree, std::move(changes));
        std::string d2 = edit_commit(d1);
        log_.heads.push_back({kDefaultProject, "docs", d2, false});
    }

    static bool same_ids(const FileState& a, const FileState& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].id != b[i].id) return false;
        }
        return true;
    }

    void add_annotations() {
        CommitGraph graph = select_relevant(build_graph(log_));
        struct Candidate {
            std::string commit;
            std::string path;
            int lines;
        };
        std::vector<Candidate> candidates;
        for (const auto& ch : log_.changes) {
            if (!ch.before_blob || !graph.contains(ch.commit_id)) continue;
            int lines = physical_line_count(log_.blobs.get(*ch.before_blob));
            if (lines > 0) candidates.push_back({ch.commit_id, ch.path, lines});
        }
        for (int k = 0; k < opt_.annotations && !candidates.empty(); ++k) {
            const Candidate& c =
                candidates[static_cast<std::size_t>(pick(static_cast<int>(candidates.size())))];
            BugFixAnnotation ann;
            ann.issue_id = "ISSUE-" + std::to_string(k + 1);
            ann.fix_commit = c.commit;
            ann.path = c.path;
            ann.old_line = 1 + pick(c.lines);
            ann.consensus = 1 + pick(4);
            log_.annotations.push_back(std::move(ann));
        }
    }

    GenOptions opt_;
    std::mt19937 rng_;
    int next_id_ = 1;
    int next_file_ = 1;
    int next_commit_ = 1;
    std::int64_t next_ts_ = 1000;
    RepositoryLog log_;
    std::map<std::string, Tree> trees_;
    std::vector<std::string> mainline_;
    std::vector<std::string> dangling_;
};

}  // namespace

GeneratedHistory generate_history(const GenOptions& options) {
    Generator gen(options);
    return gen.run();
}

}  // namespace wde::testing
