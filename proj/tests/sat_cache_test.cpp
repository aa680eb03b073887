#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "splat/sat_cache.hpp"
#include "support.hpp"

using namespace splat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sat_cache_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("canonicalization orders bindings by declaration") {
    auto fm = FeatureModel::parse("feature x\nfeature y\n");
    Assignment reversed;
    reversed.set("y", true);
    reversed.set("x", false);
    auto key = canonicalize(reversed, fm);
    REQUIRE(key.pairs.size() == 2);
    CHECK(key.pairs[0] == std::pair<std::string, bool>{"x", false});
    CHECK(key.pairs[1] == std::pair<std::string, bool>{"y", true});

    Assignment forward;
    forward.set("x", false);
    forward.set("y", true);
    CHECK(canonicalize(forward, fm) == key);
    CHECK_THROWS_AS(canonicalize([] {
                        Assignment a;
                        a.set("z", true);
                        return a;
                    }(), fm),
                    Error);
}

TEST_CASE("equivalent assignments share one cache path") {
    auto fm = FeatureModel::parse("feature x\nfeature y\n");
    SatTrie trie;
    Assignment a;
    a.set("y", true);
    a.set("x", true);
    Assignment b;
    b.set("x", true);
    b.set("y", true);
    trie.is_sat(fm, a);
    trie.is_sat(fm, b);
    CHECK(trie.stats().hits == 1);
    CHECK(trie.stats().misses == 1);
    CHECK(trie.path_count() == 1);
}

TEST_CASE("cache is transparent over random queries") {
    support::Rng rng(1234);
    std::uint64_t queries = 0;
    for (int round = 0; round < 40; ++round) {
        auto fm = FeatureModel::parse(support::random_model_text(rng, 8));
        SatTrie trie;
        for (int q = 0; q < 60; ++q) {
            Assignment a;
            for (const auto& var : fm.variables())
                if (support::chance(rng, 0.6)) a.set(var.name, support::chance(rng, 0.5));
            CHECK(trie.is_sat(fm, a) == support::brute_sat(fm, a));
            ++queries;
        }
        auto stats = trie.stats();
        CHECK(stats.lookups() == 60);
        CHECK(stats.sat_count + stats.unsat_count == stats.misses);
        CHECK(trie.path_count() == stats.misses);
    }
    CHECK(queries == 2400);
}

TEST_CASE("repeat queries hit without consulting the solver") {
    auto fm = FeatureModel::parse(support::kGraphModel);
    SatTrie trie;
    Assignment a;
    a.set("WEIGHTED", false);
    for (int i = 0; i < 5; ++i) trie.is_sat(fm, a);
    CHECK(trie.stats().misses == 1);
    CHECK(trie.stats().hits == 4);
    CHECK(trie.stats().solver_calls() == 1);
}

TEST_CASE("persist and load round-trips all answers") {
    TempDir tmp;
    auto fm = FeatureModel::parse(support::kGraphModel);
    SatTrie trie;
    support::Rng rng(5);
    for (int q = 0; q < 50; ++q) {
        Assignment a;
        for (const auto& var : fm.variables())
            if (support::chance(rng, 0.6)) a.set(var.name, support::chance(rng, 0.5));
        trie.is_sat(fm, a);
    }
    auto file = tmp.path / "trie.bin";
    trie.persist(file, fm.digest());

    auto loaded = SatTrie::load(file, fm.digest());
    CHECK(loaded.entries() == trie.entries());
    CHECK(loaded.path_count() == trie.path_count());
    CHECK(loaded.stats().lookups() == 0);  // stats are per-session
}

TEST_CASE("load of a missing file yields an empty trie") {
    TempDir tmp;
    auto trie = SatTrie::load(tmp.path / "absent.bin", "whatever");
    CHECK(trie.path_count() == 0);
}

TEST_CASE("a model digest mismatch discards stored answers") {
    TempDir tmp;
    auto fm = FeatureModel::parse("feature A\n");
    SatTrie trie;
    trie.is_sat(fm, {});
    auto file = tmp.path / "trie.bin";
    trie.persist(file, fm.digest());

    auto stale = SatTrie::load(file, "different-digest");
    CHECK(stale.path_count() == 0);
    auto fresh = SatTrie::load(file, fm.digest());
    CHECK(fresh.path_count() == 1);
}

TEST_CASE("corrupt trie files are rejected unless tolerated") {
    TempDir tmp;
    auto fm = FeatureModel::parse("feature A\n");
    SatTrie trie;
    trie.is_sat(fm, {});
    auto file = tmp.path / "trie.bin";
    trie.persist(file, fm.digest());

    std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-1, std::ios::end);
    f.put('\x7f');  // flip the last payload byte; the checksum no longer matches
    f.close();

    CHECK_THROWS_AS(SatTrie::load(file, fm.digest()), Error);
    auto tolerated = SatTrie::load(file, fm.digest(), true);
    CHECK(tolerated.path_count() == 0);

    std::ofstream(file, std::ios::binary | std::ios::trunc) << "not a trie";
    CHECK_THROWS_AS(SatTrie::load(file, fm.digest()), Error);
}

TEST_CASE("persisted bytes are deterministic for the same answer set") {
    TempDir tmp;
    auto fm = FeatureModel::parse(support::kGraphModel);
    auto query = [&](SatTrie& trie, std::initializer_list<std::pair<const char*, bool>> bindings) {
        Assignment a;
        for (const auto& [name, value] : bindings) a.set(name, value);
        trie.is_sat(fm, a);
    };
    SatTrie first;
    query(first, {{"WEIGHTED", false}});
    query(first, {{"WEIGHTED", false}, {"SEARCH", false}});
    SatTrie second;
    query(second, {{"WEIGHTED", false}, {"SEARCH", false}});
    query(second, {{"WEIGHTED", false}});

    auto read = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    first.persist(tmp.path / "a.bin", fm.digest());
    second.persist(tmp.path / "b.bin", fm.digest());
    CHECK(read(tmp.path / "a.bin") == read(tmp.path / "b.bin"));
}
