#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "splat/workspace.hpp"
#include "support.hpp"

using namespace splat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("workspace_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    }
    ~TempDir() { fs::remove_all(path); }
};

RunRecord sample_record() {
    RunRecord record;
    record.stack.push({ExplorationEntry::Kind::Method, "test"});
    record.stack.push({ExplorationEntry::Kind::Feature, "WEIGHTED"});
    record.state.set("WEIGHTED", true);
    record.state.set("SEARCH", false);
    record.verdict = {false, "assertion failed"};
    record.pruned = 2;
    return record;
}

}  // namespace

TEST_CASE("run records survive a json round trip") {
    auto record = sample_record();
    auto restored = run_record_from_json(run_record_to_json(record));
    CHECK(restored.stack == record.stack);
    CHECK(restored.state == record.state);
    CHECK(restored.verdict == record.verdict);
    CHECK(restored.pruned == record.pruned);
}

TEST_CASE("model digest gates workspace initialization") {
    TempDir tmp;
    Workspace ws(tmp.path);
    CHECK(!ws.initialized());
    CHECK(!ws.model_digest());
    ws.write_model_digest("abc123");
    CHECK(ws.initialized());
    CHECK(ws.model_digest() == std::string("abc123"));
}

TEST_CASE("test caches round trip through the runs directory") {
    TempDir tmp;
    Workspace ws(tmp.path);
    CHECK(!ws.test_cache("graph"));
    CHECK(ws.cached_tests().empty());

    TestCache cache;
    cache.runs.push_back(sample_record());
    cache.bounded = true;
    ws.write_test_cache("graph", cache);

    auto loaded = ws.test_cache("graph");
    REQUIRE(loaded);
    CHECK(loaded->bounded);
    REQUIRE(loaded->runs.size() == 1);
    CHECK(loaded->runs[0].stack == cache.runs[0].stack);
    CHECK(loaded->runs[0].verdict == cache.runs[0].verdict);
    CHECK(ws.cached_tests() == std::vector<std::string>{"graph"});
}

TEST_CASE("coverage and method digests round trip") {
    TempDir tmp;
    Workspace ws(tmp.path);
    std::map<std::string, std::set<std::string>> coverage{{"t", {"m1", "m2"}}};
    ws.write_coverage(coverage);
    CHECK(ws.coverage() == coverage);

    std::map<std::string, std::string> digests{{"m1", "aa"}, {"m2", "bb"}};
    ws.write_method_digests(digests);
    CHECK(ws.method_digests() == digests);
}

TEST_CASE("the trie persists under the workspace with digest gating") {
    TempDir tmp;
    Workspace ws(tmp.path);
    auto fm = FeatureModel::parse(support::kGraphModel);
    SatTrie trie;
    Assignment a;
    a.set("WEIGHTED", false);
    trie.is_sat(fm, a);
    ws.save_trie(trie, fm.digest());

    auto loaded = ws.load_trie(fm.digest());
    CHECK(loaded.entries() == trie.entries());
    auto stale = ws.load_trie("other-digest");
    CHECK(stale.path_count() == 0);
}

TEST_CASE("reports are idempotent per session name") {
    TempDir tmp;
    Workspace ws(tmp.path);
    nlohmann::json report{{"command", "explore"}, {"runs", 5}};
    ws.write_report("explore-abc", report);
    ws.write_report("explore-abc", report);
    CHECK(ws.report_sessions() == std::vector<std::string>{"explore-abc"});
    auto loaded = ws.report("explore-abc");
    REQUIRE(loaded);
    CHECK((*loaded)["runs"] == 5);
    CHECK(!ws.report("missing"));
}

TEST_CASE("artifact paths are stable") {
    Workspace ws("/tmp/ws");
    CHECK(ws.tree_path("graph") == fs::path("/tmp/ws/trees/graph.dot"));
    CHECK(ws.array_path(2) == fs::path("/tmp/ws/array-t2.csv"));
}
