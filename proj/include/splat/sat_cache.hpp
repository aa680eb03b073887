#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "splat/feature_model.hpp"

namespace splat {

/// (variable-name, value) pairs sorted by the model's declaration order.
struct CanonicalKey {
    std::vector<std::pair<std::string, bool>> pairs;

    friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

CanonicalKey canonicalize(const Assignment& a, const FeatureModel& fm);

struct CacheStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t sat_count = 0;
    std::uint64_t unsat_count = 0;

    std::uint64_t solver_calls() const { return misses; }
    std::uint64_t lookups() const { return hits + misses; }
};

/// Memoizes satisfiability answers keyed by canonicalized partial
/// assignments. Edge labels along any root path are strictly increasing
/// in declaration order. Thread-safe; insertions are serialized.
class SatTrie {
public:
    SatTrie() : root_(std::make_unique<Node>()) {}
    SatTrie(SatTrie&& other) noexcept;
    SatTrie& operator=(SatTrie&& other) noexcept;
    SatTrie(const SatTrie&) = delete;
    SatTrie& operator=(const SatTrie&) = delete;

    /// Cached answer to fm.is_satisfiable(a); consults the solver on miss.
    bool is_sat(const FeatureModel& fm, const Assignment& a);

    std::optional<bool> lookup(const CanonicalKey& key) const;
    void store(const CanonicalKey& key, bool answer);

    /// Number of distinct keys ever answered.
    std::size_t path_count() const;

    CacheStats stats() const;
    void reset_stats();

    /// Binary record stream with a header carrying the format version,
    /// the model digest, and a checksum over the records.
    void persist(const std::filesystem::path& path, const std::string& model_digest) const;

    /// Missing file yields an empty trie. A model-digest mismatch discards
    /// the stored answers (they are only valid for the model that produced
    /// them). A corrupt file throws unless tolerate_corrupt is set.
    static SatTrie load(const std::filesystem::path& path, const std::string& model_digest,
                        bool tolerate_corrupt = false);

    std::vector<std::pair<CanonicalKey, bool>> entries() const;

private:
    struct Node {
        // edge label: (variable-name, value); keys are canonical, so labels
        // along any root path follow the model's declaration order
        std::map<std::pair<std::string, bool>, std::unique_ptr<Node>> children;
        std::optional<bool> answer;
    };

    std::optional<bool> lookup_locked(const CanonicalKey& key) const;
    void store_locked(const CanonicalKey& key, bool answer);

    mutable std::mutex mutex_;
    std::unique_ptr<Node> root_;
    std::size_t path_count_ = 0;
    CacheStats stats_;
};

}  // namespace splat
