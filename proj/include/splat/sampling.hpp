#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "splat/feature_model.hpp"
#include "splat/rts.hpp"
#include "splat/sat_cache.hpp"
#include "splat/subject.hpp"

namespace splat {

/// Constraint-aware t-wise covering array: every satisfiable value
/// combination over every t variables appears in some valid row.
struct CoveringArray {
    std::size_t strength = 0;
    std::vector<Assignment> rows;  // complete, valid configurations
    std::uint64_t seed = 0;
};

/// All satisfiable t-tuples of the model, as partial assignments in
/// canonical enumeration order.
std::vector<Assignment> satisfiable_tuples(const FeatureModel& fm, std::size_t t, SatTrie& trie);

/// Greedy one-row-at-a-time construction: each row is the valid
/// configuration covering the most still-uncovered satisfiable t-tuples,
/// ties broken by canonical enumeration order. Deterministic given
/// (fm, t, seed).
CoveringArray generate_twise(const FeatureModel& fm, std::size_t t, std::uint64_t seed,
                             SatTrie& trie);

struct CoverageReport {
    std::vector<Assignment> uncovered;  // satisfiable t-tuples missing from the array

    bool complete() const { return uncovered.empty(); }
};

/// Brute-force check of the covering invariant over all C(n,t)*2^t tuples.
CoverageReport verify_covering(const FeatureModel& fm, const CoveringArray& array, SatTrie& trie);

std::string array_to_csv(const CoveringArray& array, const FeatureModel& fm);
CoveringArray array_from_csv(const std::string& csv, const FeatureModel& fm, std::size_t strength);

struct SampleRunOutcome {
    std::vector<std::string> selected;
    double selection_ratio = 0.0;
    // per selected test, one verdict per array row (row order preserved)
    std::map<std::string, std::vector<Verdict>> verdicts;
    std::size_t executions = 0;
};

/// The (Evo)t-wise baseline: select tests exactly like RTS, then run each
/// selected test once per precomputed row (plain execution, no exploration).
SampleRunOutcome evo_sample_run(const CoveringArray& array, const CoverageMap& coverage,
                                const ChangeSet& changes, const std::vector<TestCase>& suite,
                                const Program& new_program, const FeatureModel& fm);

/// Plain single-configuration execution under a complete assignment.
Verdict execute_under(const Program& program, const TestCase& test, const FeatureModel& fm,
                      const Assignment& config);

}  // namespace splat
