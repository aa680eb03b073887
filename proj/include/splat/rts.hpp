#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "splat/explorer.hpp"
#include "splat/workspace.hpp"

namespace splat {

/// test-name -> methods covered by any run of that test.
struct CoverageMap {
    std::map<std::string, std::set<std::string>> by_test;

    bool knows(const std::string& test) const { return by_test.count(test) != 0; }
};

CoverageMap build_coverage(const std::map<std::string, ExplorationResult>& results);
CoverageMap build_coverage_from_records(const std::map<std::string, std::vector<RunRecord>>& records);

/// Tests whose covered methods intersect the change set, in suite order.
/// Tests the map has never seen are always selected (no coverage yet).
std::vector<std::string> select_tests(const CoverageMap& coverage, const ChangeSet& changes,
                                      const std::vector<TestCase>& suite);

struct RtsTestOutcome {
    bool selected = false;
    std::vector<RunRecord> runs;  // fresh when selected, carried forward otherwise
    bool bounded = false;
    bool verdict_changed = false;  // any per-run verdict differs from the prior cache
};

struct RtsOutcome {
    std::vector<std::string> selected;
    double selection_ratio = 0.0;  // Tests Exec. (%)
    std::map<std::string, RtsTestOutcome> tests;
    CoverageMap coverage;  // updated map for the new version
    CacheStats stats;
};

/// Selected tests get a fresh full (empty-prefix) exploration on the new
/// program; unselected tests carry their cached records forward.
RtsOutcome run_rts(const FeatureModel& fm, const Program& new_program,
                   const std::vector<TestCase>& suite,
                   const std::map<std::string, TestCache>& prior, const CoverageMap& coverage,
                   const ChangeSet& changes, std::size_t bound, SatTrie& trie);

}  // namespace splat
