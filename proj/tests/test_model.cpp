#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "support/gen.hpp"
#include "wdevolve/digest.hpp"
#include "wdevolve/model.hpp"

using namespace wde;
namespace fs = std::filesystem;

namespace {

RepositoryLog tiny_log() {
    RepositoryLog log;
    log.commits.push_back({"a", {}, 100, "root"});
    log.commits.push_back({"b", {"a"}, 200, "next"});
    log.commit_project["a"] = kDefaultProject;
    log.commit_project["b"] = kDefaultProject;
    FileChangeRecord add;
    add.commit_id = "a";
    add.path = "src/Main.java";
    add.kind = ChangeKind::Add;
    add.after_blob = log.blobs.put("int x = 0;\n");
    add.hunks = {{1, 0, 1, 1}};
    log.changes.push_back(add);
    log.heads.push_back({kDefaultProject, "main", "b", true});
    return log;
}

}  // namespace

TEST_CASE("physical line count") {
    CHECK(physical_line_count("") == 0);
    CHECK(physical_line_count("a") == 1);
    CHECK(physical_line_count("a\n") == 1);
    CHECK(physical_line_count("a\nb") == 2);
    CHECK(physical_line_count("a\nb\n") == 2);
    CHECK(physical_line_count("\n") == 1);
    CHECK(physical_line_count("\n\n") == 2);
}

TEST_CASE("blob store is content addressed") {
    BlobStore store;
    std::string r1 = store.put("hello\n");
    std::string r2 = store.put("hello\n");
    CHECK(r1 == r2);
    CHECK(r1 == sha256_hex("hello\n"));
    CHECK(store.size() == 1);
    CHECK(store.get(r1) == "hello\n");
    CHECK_THROWS_WITH_AS(store.get("feed"), "blob ref missing: feed", Error);
}

TEST_CASE("blob store directory round trip") {
    BlobStore store;
    store.put("alpha\n");
    store.put("beta\n");
    fs::path dir = fs::temp_directory_path() / "wde_blob_rt";
    fs::remove_all(dir);
    store.write_directory(dir.string());
    BlobStore loaded;
    loaded.load_directory(dir.string());
    CHECK(loaded == store);
    fs::remove_all(dir);
}

TEST_CASE("validate rejects structural problems") {
    auto log = tiny_log();
    CHECK_NOTHROW(log.validate());

    SUBCASE("duplicate commit id") {
        log.commits.push_back({"a", {}, 300, ""});
        CHECK_THROWS_WITH_AS(log.validate(), "duplicate commit id: a", Error);
    }
    SUBCASE("unknown parent") {
        log.commits[1].parents = {"zz"};
        CHECK_THROWS_AS(log.validate(), Error);
    }
    SUBCASE("add with before blob") {
        log.changes[0].before_blob = log.changes[0].after_blob;
        CHECK_THROWS_AS(log.validate(), Error);
    }
    SUBCASE("modify without before blob") {
        log.changes[0].kind = ChangeKind::Modify;
        CHECK_THROWS_AS(log.validate(), Error);
    }
    SUBCASE("rename without old path") {
        log.changes[0].kind = ChangeKind::Rename;
        log.changes[0].before_blob = log.changes[0].after_blob;
        CHECK_THROWS_AS(log.validate(), Error);
    }
    SUBCASE("dangling blob ref") {
        log.changes[0].after_blob = std::string(64, '0');
        CHECK_THROWS_AS(log.validate(), Error);
    }
    SUBCASE("overlapping hunks") {
        log.changes[0].hunks = {{1, 2, 1, 2}, {2, 1, 4, 1}};
        CHECK_THROWS_AS(log.validate(), Error);
    }
    SUBCASE("unsorted hunks") {
        log.changes[0].hunks = {{5, 1, 5, 1}, {1, 1, 1, 1}};
        CHECK_THROWS_AS(log.validate(), Error);
    }
    SUBCASE("missing main head") {
        log.heads[0].main = false;
        CHECK_THROWS_AS(log.validate(), Error);
    }
    SUBCASE("annotation with bad line") {
        log.annotations.push_back({"I-1", "a", "src/Main.java", 0, 3});
        CHECK_THROWS_AS(log.validate(), Error);
    }
    SUBCASE("annotation with unknown commit") {
        log.annotations.push_back({"I-1", "zz", "src/Main.java", 1, 3});
        CHECK_THROWS_AS(log.validate(), Error);
    }
}

TEST_CASE("parse and serialize round trip inline") {
    auto history = wde::testing::generate_history({.seed = 7, .commits = 25, .annotations = 5});
    std::stringstream out;
    serialize_repository_log(history.log, out, true);
    RepositoryLog parsed = parse_repository_log(out);
    CHECK(log_equal(parsed, history.log));
}

TEST_CASE("parse and serialize round trip with blob refs") {
    auto history = wde::testing::generate_history({.seed = 8, .commits = 15});
    std::stringstream out;
    serialize_repository_log(history.log, out, false);

    // Without the blobs the refs dangle.
    std::stringstream copy(out.str());
    CHECK_THROWS_AS(parse_repository_log(copy), Error);

    std::stringstream again(out.str());
    RepositoryLog parsed = parse_repository_log(again, history.log.blobs);
    CHECK(log_equal(parsed, history.log));
}

TEST_CASE("parser reports line numbers") {
    std::stringstream in("{\"kind\": \"commit\", \"id\": \"a\", \"timestamp\": 1}\nnot json\n");
    try {
        parse_repository_log(in);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line_number == 2);
    }
}

TEST_CASE("parser rejects unknown record kinds and bad fields") {
    {
        std::stringstream in("{\"kind\": \"branch\"}\n");
        CHECK_THROWS_WITH_AS(parse_repository_log(in), "line 1: unknown record kind: branch",
                             ParseError);
    }
    {
        std::stringstream in("{\"kind\": \"commit\", \"timestamp\": 1}\n");
        CHECK_THROWS_WITH_AS(parse_repository_log(in), "line 1: missing field 'id'", ParseError);
    }
    {
        std::stringstream in(
            "{\"kind\": \"commit\", \"id\": \"a\", \"timestamp\": 1}\n"
            "{\"kind\": \"change\", \"commit_id\": \"a\", \"path\": \"p\","
            " \"change_kind\": \"copy\"}\n");
        CHECK_THROWS_WITH_AS(parse_repository_log(in), "line 2: unknown change_kind: copy",
                             ParseError);
    }
}

TEST_CASE("inline content beats blob refs") {
    std::string digest = sha256_hex("stale\n");
    std::stringstream in(
        "{\"kind\": \"commit\", \"id\": \"a\", \"timestamp\": 1}\n"
        "{\"kind\": \"change\", \"commit_id\": \"a\", \"path\": \"src/A.java\","
        " \"change_kind\": \"add\", \"after_blob\": \"" +
        digest +
        "\", \"after_content\": \"fresh\\n\", \"hunks\": [[1, 0, 1, 1]]}\n"
        "{\"kind\": \"head\", \"name\": \"main\", \"commit_id\": \"a\"}\n");
    BlobStore preloaded;
    preloaded.put("stale\n");
    RepositoryLog log = parse_repository_log(in, std::move(preloaded));
    CHECK(log.blobs.get(*log.changes[0].after_blob) == "fresh\n");
}

TEST_CASE("a single unflagged head becomes main") {
    std::stringstream in(
        "{\"kind\": \"commit\", \"id\": \"a\", \"timestamp\": 1}\n"
        "{\"kind\": \"head\", \"name\": \"trunk\", \"commit_id\": \"a\"}\n");
    RepositoryLog log = parse_repository_log(in);
    CHECK(log.main_head(kDefaultProject) == "a");
}

TEST_CASE("projects partition records") {
    std::stringstream in(
        "{\"kind\": \"project\", \"name\": \"alpha\"}\n"
        "{\"kind\": \"commit\", \"id\": \"a1\", \"timestamp\": 1}\n"
        "{\"kind\": \"head\", \"name\": \"main\", \"commit_id\": \"a1\", \"main\": true}\n"
        "{\"kind\": \"project\", \"name\": \"beta\"}\n"
        "{\"kind\": \"commit\", \"id\": \"b1\", \"timestamp\": 2}\n"
        "{\"kind\": \"head\", \"name\": \"main\", \"commit_id\": \"b1\", \"main\": true}\n");
    RepositoryLog log = parse_repository_log(in);
    CHECK(log.projects() == std::vector<std::string>{"alpha", "beta"});
    CHECK(log.project_of("a1") == "alpha");
    CHECK(log.project_of("b1") == "beta");
    CHECK(log.main_head("beta") == "b1");

    std::stringstream out;
    serialize_repository_log(log, out, true);
    RepositoryLog reparsed = parse_repository_log(out);
    CHECK(log_equal(reparsed, log));
}

TEST_CASE("production filter") {
    PathFilter f = PathFilter::defaults();
    CHECK(is_production_file("src/main/java/App.java", f));
    CHECK(is_production_file("core/Engine.java", f));
    CHECK_FALSE(is_production_file("src/test/java/AppTest.java", f));
    CHECK_FALSE(is_production_file("src/TEST/AppTest.java", f));
    CHECK_FALSE(is_production_file("docs/Guide.java", f));
    CHECK_FALSE(is_production_file("src/main/readme.md", f));
    CHECK_FALSE(is_production_file("no_extension", f));
    CHECK(is_production_file("src/main/App.JAVA", f));
    CHECK(is_production_file("protest/App.java", f));  // segment match is exact

    PathFilter custom;
    custom.exclude_segments = {"vendor"};
    custom.extensions = {".kt"};
    CHECK(is_production_file("src/test/App.kt", custom));
    CHECK_FALSE(is_production_file("vendor/App.kt", custom));
    CHECK_FALSE(is_production_file("src/App.java", custom));
}

TEST_CASE("consensus filter keeps strong annotations") {
    std::vector<BugFixAnnotation> anns = {
        {"I-1", "a", "p", 1, 4}, {"I-2", "a", "p", 1, 3}, {"I-3", "a", "p", 1, 2},
        {"I-4", "a", "p", 1, 0},
    };
    auto kept = filter_consensus(anns, 3);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].issue_id == "I-1");
    CHECK(kept[1].issue_id == "I-2");
    CHECK(filter_consensus(anns, 1).size() == 3);
    CHECK(filter_consensus(anns, 4).size() == 1);
}
