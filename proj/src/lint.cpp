#include "wdevolve/lint.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <istream>

#include <nlohmann/json.hpp>

#include "wdevolve/csv.hpp"
#include "wdevolve/digest.hpp"

using json = nlohmann::json;

namespace wde {

RuleSet RuleSet::load(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw Error("cannot open rule set config: " + config_path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw Error("malformed rule set config " + config_path + ": " + e.what());
    }
    RuleSet rs;
    rs.name = cfg.at("name").get<std::string>();
    for (const auto& m : cfg.at("members")) rs.members.insert(m.get<std::string>());
    if (rs.members.empty()) throw Error("rule set " + rs.name + " has no members");
    return rs;
}

std::int64_t FileSummary::warnings_for(const RuleSet& rules) const {
    std::int64_t total = 0;
    for (const auto& [rule, n] : rule_counts) {
        if (rules.contains(rule)) total += n;
    }
    return total;
}

FileSummary summarize(const FileAnalysis& analysis) {
    FileSummary s;
    s.lloc = analysis.lloc;
    for (const auto& w : analysis.warnings) s.rule_counts[w.rule_id]++;
    return s;
}

// ---------------------------------------------------------------------------
// Scanner
//
// One pass over the bytes produces everything the rules need: a code token
// stream with line numbers, comment text per line, physical line lengths and
// the logical line count. Strings and char literals are opaque code tokens;
// comment markers inside them are ignored.

namespace {

struct Token {
    enum Kind { Word, Number, Punct, Text };  // Text = string/char literal
    Kind kind;
    std::string text;
    int line;
};

struct Scan {
    std::vector<Token> tokens;
    std::vector<std::pair<int, std::string>> comment_lines;  // (line, comment text on it)
    std::vector<std::size_t> line_lengths;
    std::int64_t lloc = 0;
};

bool word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$'; }

Scan scan_content(std::string_view src) {
    Scan out;
    enum State { Code, LineComment, BlockComment, StringLit, CharLit };
    State state = Code;

    int line = 1;
    bool line_has_code = false;
    std::size_t line_len = 0;
    std::string comment_chunk;
    std::string literal;
    int literal_line = 1;

    auto flush_comment = [&] {
        if (!comment_chunk.empty()) {
            out.comment_lines.emplace_back(line, comment_chunk);
            comment_chunk.clear();
        }
    };
    auto end_line = [&] {
        flush_comment();
        if (line_has_code) ++out.lloc;
        out.line_lengths.push_back(line_len);
        line_has_code = false;
        line_len = 0;
        ++line;
    };

    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        char c = src[i];
        if (c == '\n') {
            if (state == StringLit || state == CharLit) {
                // Unterminated literal; close it at end of line.
                out.tokens.push_back({Token::Text, literal, literal_line});
                literal.clear();
                state = Code;
            }
            if (state == LineComment) state = Code;
            end_line();
            ++i;
            continue;
        }
        if (c != '\r') ++line_len;

        switch (state) {
            case LineComment:
                comment_chunk.push_back(c);
                ++i;
                break;
            case BlockComment:
                if (c == '*' && i + 1 < n && src[i + 1] == '/') {
                    state = Code;
                    i += 2;
                    ++line_len;  // the '/' consumed here
                } else {
                    comment_chunk.push_back(c);
                    ++i;
                }
                break;
            case StringLit:
            case CharLit: {
                line_has_code = true;
                literal.push_back(c);
                if (c == '\\' && i + 1 < n && src[i + 1] != '\n') {
                    literal.push_back(src[i + 1]);
                    line_len += (src[i + 1] != '\r') ? 1 : 0;
                    i += 2;
                    break;
                }
                char quote = state == StringLit ? '"' : '\'';
                if (c == quote && literal.size() > 1) {
                    out.tokens.push_back({Token::Text, literal, literal_line});
                    literal.clear();
                    state = Code;
                }
                ++i;
                break;
            }
            case Code: {
                if (c == '/' && i + 1 < n && src[i + 1] == '/') {
                    state = LineComment;
                    i += 2;
                    ++line_len;
                    break;
                }
                if (c == '/' && i + 1 < n && src[i + 1] == '*') {
                    state = BlockComment;
                    i += 2;
                    ++line_len;
                    break;
                }
                if (c == '"' || c == '\'') {
                    state = c == '"' ? StringLit : CharLit;
                    literal.assign(1, c);
                    literal_line = line;
                    line_has_code = true;
                    ++i;
                    break;
                }
                if (std::isspace(static_cast<unsigned char>(c))) {
                    ++i;
                    break;
                }
                line_has_code = true;
                if (std::isdigit(static_cast<unsigned char>(c))) {
                    std::string num(1, c);
                    ++i;
                    while (i < n) {
                        char d = src[i];
                        if (word_char(static_cast<unsigned char>(d)) || d == '.') {
                            num.push_back(d);
                            ++i;
                            ++line_len;
                            // exponent sign: 1e-5, 2E+10
                            if ((d == 'e' || d == 'E') && i < n && (src[i] == '+' || src[i] == '-') &&
                                i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
                                num.push_back(src[i]);
                                ++i;
                                ++line_len;
                            }
                        } else {
                            break;
                        }
                    }
                    out.tokens.push_back({Token::Number, num, line});
                    break;
                }
                if (word_char(static_cast<unsigned char>(c)) ) {
                    std::string word(1, c);
                    ++i;
                    while (i < n && word_char(static_cast<unsigned char>(src[i]))) {
                        word.push_back(src[i]);
                        ++i;
                        ++line_len;
                    }
                    out.tokens.push_back({Token::Word, word, line});
                    break;
                }
                // Punctuation; == and != matter as units.
                if ((c == '=' || c == '!') && i + 1 < n && src[i + 1] == '=') {
                    out.tokens.push_back({Token::Punct, std::string(1, c) + "=", line});
                    i += 2;
                    ++line_len;
                    break;
                }
                out.tokens.push_back({Token::Punct, std::string(1, c), line});
                ++i;
                break;
            }
        }
    }
    if (state == StringLit || state == CharLit) {
        out.tokens.push_back({Token::Text, literal, literal_line});
    }
    if (line_has_code || line_len > 0 || !comment_chunk.empty()) {
        end_line();
    }
    return out;
}

/// Value of a numeric literal, with suffixes and digit separators stripped.
/// Returns false when the literal cannot be evaluated.
bool literal_value(const std::string& text, double* value) {
    std::string t;
    for (char c : text) {
        if (c != '_') t.push_back(c);
    }
    while (!t.empty()) {
        char c = t.back();
        if (c == 'l' || c == 'L' || c == 'f' || c == 'F' || c == 'd' || c == 'D' || c == 'u' ||
            c == 'U') {
            t.pop_back();
        } else {
            break;
        }
    }
    if (t.empty()) return false;
    char* end = nullptr;
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X' || t[1] == 'b' || t[1] == 'B')) {
        int base = (t[1] == 'x' || t[1] == 'X') ? 16 : 2;
        long long v = std::strtoll(t.c_str() + 2, &end, base);
        if (end == nullptr || *end != '\0') return false;
        *value = static_cast<double>(v);
        return true;
    }
    double v = std::strtod(t.c_str(), &end);
    if (end == nullptr || *end != '\0') return false;
    *value = v;
    return true;
}

}  // namespace

std::int64_t count_lloc(std::string_view content) { return scan_content(content).lloc; }

const std::vector<std::string>& builtin_rule_ids() {
    static const std::vector<std::string> ids = {"R-LONG-LINE",    "R-MAGIC-NUM", "R-TODO",
                                                 "R-EMPTY-CATCH", "R-DEEP-NEST", "R-BOOL-CMP"};
    return ids;
}

FileAnalysis analyze_file(std::string_view content, const std::string& path) {
    Scan scan = scan_content(content);
    FileAnalysis out;
    out.path = path;
    out.lloc = scan.lloc;

    auto warn = [&](const char* rule, int line) { out.warnings.push_back({rule, path, line}); };

    // R-LONG-LINE
    for (std::size_t li = 0; li < scan.line_lengths.size(); ++li) {
        if (scan.line_lengths[li] > 120) warn("R-LONG-LINE", static_cast<int>(li + 1));
    }

    // R-TODO: one warning per commented line mentioning TODO or FIXME.
    {
        std::set<int> seen;
        for (const auto& [line, text] : scan.comment_lines) {
            if (text.find("TODO") != std::string::npos || text.find("FIXME") != std::string::npos) {
                if (seen.insert(line).second) warn("R-TODO", line);
            }
        }
    }

    // Lines carrying a final/const token are exempt from R-MAGIC-NUM.
    std::set<int> const_lines;
    for (const auto& t : scan.tokens) {
        if (t.kind == Token::Word && (t.text == "final" || t.text == "const")) {
            const_lines.insert(t.line);
        }
    }

    const auto& toks = scan.tokens;
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];

        if (t.kind == Token::Number) {
            double v = 0;
            bool known = literal_value(t.text, &v);
            bool trivial = known && (v == 0.0 || v == 1.0);
            if (!trivial && !const_lines.count(t.line)) warn("R-MAGIC-NUM", t.line);
            continue;
        }

        if (t.kind == Token::Punct && (t.text == "==" || t.text == "!=") && i + 1 < toks.size()) {
            const Token& rhs = toks[i + 1];
            if (rhs.kind == Token::Word && (rhs.text == "true" || rhs.text == "false")) {
                warn("R-BOOL-CMP", t.line);
            }
        }

        if (t.kind == Token::Punct && t.text == "{") {
            if (++depth == 7) warn("R-DEEP-NEST", t.line);
            continue;
        }
        if (t.kind == Token::Punct && t.text == "}") {
            if (depth > 0) --depth;
            continue;
        }

        if (t.kind == Token::Word && t.text == "catch") {
            std::size_t j = i + 1;
            if (j >= toks.size() || toks[j].text != "(") continue;
            int parens = 0;
            for (; j < toks.size(); ++j) {
                if (toks[j].kind != Token::Punct) continue;
                if (toks[j].text == "(") ++parens;
                if (toks[j].text == ")" && --parens == 0) break;
            }
            if (j >= toks.size() || j + 1 >= toks.size()) continue;
            if (toks[j + 1].text != "{" || toks[j + 1].kind != Token::Punct) continue;
            if (j + 2 < toks.size() && toks[j + 2].kind == Token::Punct && toks[j + 2].text == "}") {
                warn("R-EMPTY-CATCH", t.line);
            }
        }
    }

    std::stable_sort(out.warnings.begin(), out.warnings.end(),
                     [](const Warning& a, const Warning& b) {
                         return std::tie(a.line, a.rule_id) < std::tie(b.line, b.rule_id);
                     });
    return out;
}

FileAnalysis filter_warnings(const FileAnalysis& analysis, const RuleSet& rules) {
    FileAnalysis out;
    out.path = analysis.path;
    out.lloc = analysis.lloc;
    for (const auto& w : analysis.warnings) {
        if (rules.contains(w.rule_id)) out.warnings.push_back(w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// External reports

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string digest_key(const std::string& file_value) {
    std::size_t slash = file_value.find_last_of("/\\");
    std::string base = slash == std::string::npos ? file_value : file_value.substr(slash + 1);
    std::size_t dot = base.rfind('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    return base;
}

}  // namespace

std::vector<FileAnalysis> ingest_external_report(std::istream& report, ReportFormat format) {
    if (format != ReportFormat::PmdCsv) throw Error("unsupported report format");

    auto rows = read_csv(report);
    if (rows.empty()) return {};

    const auto& header = rows.front();
    int file_col = -1, line_col = -1, rule_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name = lower(header[i]);
        if (name == "file") file_col = static_cast<int>(i);
        if (name == "line") line_col = static_cast<int>(i);
        if (name == "rule") rule_col = static_cast<int>(i);
    }
    if (file_col < 0 || line_col < 0 || rule_col < 0) {
        throw Error("report header must name file, line and rule columns");
    }

    std::map<std::string, FileAnalysis> by_file;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::size_t needed = static_cast<std::size_t>(std::max({file_col, line_col, rule_col})) + 1;
        if (row.size() < needed) {
            throw Error("row " + std::to_string(r + 1) + ": too few columns");
        }
        const std::string& line_text = row[static_cast<std::size_t>(line_col)];
        char* end = nullptr;
        long line_no = std::strtol(line_text.c_str(), &end, 10);
        if (end == nullptr || *end != '\0' || line_text.empty() || line_no < 1) {
            throw Error("row " + std::to_string(r + 1) + ": non-numeric value '" + line_text +
                        "' in column line");
        }
        const std::string& file = row[static_cast<std::size_t>(file_col)];
        FileAnalysis& fa = by_file[file];
        fa.path = file;
        fa.warnings.push_back({row[static_cast<std::size_t>(rule_col)], file,
                               static_cast<int>(line_no)});
    }

    std::vector<FileAnalysis> out;
    out.reserve(by_file.size());
    for (auto& [_, fa] : by_file) {
        std::stable_sort(fa.warnings.begin(), fa.warnings.end(),
                         [](const Warning& a, const Warning& b) {
                             return std::tie(a.line, a.rule_id) < std::tie(b.line, b.rule_id);
                         });
        out.push_back(std::move(fa));
    }
    return out;
}

FileSummary BuiltinEngine::summarize_content(std::string_view content) const {
    return summarize(analyze_file(content, ""));
}

ExternalReportEngine::ExternalReportEngine(const std::vector<FileAnalysis>& report) {
    for (const auto& fa : report) {
        auto& counts = counts_by_digest_[digest_key(fa.path)];
        for (const auto& w : fa.warnings) counts[w.rule_id]++;
    }
}

FileSummary ExternalReportEngine::summarize_content(std::string_view content) const {
    FileSummary s;
    s.lloc = count_lloc(content);
    auto it = counts_by_digest_.find(sha256_hex(content));
    if (it != counts_by_digest_.end()) s.rule_counts = it->second;
    return s;
}

}  // namespace wde
