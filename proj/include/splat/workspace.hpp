#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "splat/explorer.hpp"

namespace splat {

/// One test's persisted exploration history.
struct TestCache {
    std::vector<RunRecord> runs;
    bool bounded = false;
};

nlohmann::json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Directory-backed store for run caches, the SAT trie, coverage maps,
/// and method digests across versions:
///   model.digest  methods.json  runs/<test>.json  trie.bin
///   coverage.json  reports/<session>.json
/// All JSON content has sorted keys for diff-ability.
class Workspace {
public:
    explicit Workspace(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& dir() const { return dir_; }
    bool initialized() const { return std::filesystem::exists(dir_ / "model.digest"); }

    void write_model_digest(const std::string& digest);
    std::optional<std::string> model_digest() const;

    void write_method_digests(const std::map<std::string, std::string>& digests);
    std::map<std::string, std::string> method_digests() const;

    void write_test_cache(const std::string& test, const TestCache& cache);
    std::optional<TestCache> test_cache(const std::string& test) const;
    std::vector<std::string> cached_tests() const;

    void write_coverage(const std::map<std::string, std::set<std::string>>& by_test);
    std::map<std::string, std::set<std::string>> coverage() const;

    SatTrie load_trie(const std::string& model_digest, bool tolerate_corrupt = false) const;
    void save_trie(const SatTrie& trie, const std::string& model_digest) const;

    /// Reports are keyed by a deterministic session name so re-running an
    /// identical command rewrites the same file with the same bytes.
    void write_report(const std::string& session, const nlohmann::json& report);
    std::optional<nlohmann::json> report(const std::string& session) const;
    std::vector<std::string> report_sessions() const;

    std::filesystem::path tree_path(const std::string& test) const;
    std::filesystem::path array_path(std::size_t strength) const;

private:
    std::filesystem::path runs_dir() const { return dir_ / "runs"; }
    std::filesystem::path reports_dir() const { return dir_ / "reports"; }
    void write_json(const std::filesystem::path& path, const nlohmann::json& j) const;
    std::optional<nlohmann::json> read_json(const std::filesystem::path& path) const;

    std::filesystem::path dir_;
};

}  // namespace splat
