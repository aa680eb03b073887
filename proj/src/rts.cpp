#include "splat/rts.hpp"

#include <algorithm>

namespace splat {

namespace {

std::set<std::string> covered_methods(const std::vector<RunRecord>& runs) {
    std::set<std::string> methods;
    for (const auto& record : runs)
        for (const auto& method : record.stack.methods()) methods.insert(method);
    return methods;
}

}  // namespace

CoverageMap build_coverage(const std::map<std::string, ExplorationResult>& results) {
    CoverageMap map;
    for (const auto& [test, result] : results) map.by_test[test] = covered_methods(result.runs);
    return map;
}

CoverageMap build_coverage_from_records(
    const std::map<std::string, std::vector<RunRecord>>& records) {
    CoverageMap map;
    for (const auto& [test, runs] : records) map.by_test[test] = covered_methods(runs);
    return map;
}

std::vector<std::string> select_tests(const CoverageMap& coverage, const ChangeSet& changes,
                                      const std::vector<TestCase>& suite) {
    std::vector<std::string> selected;
    for (const auto& test : suite) {
        auto it = coverage.by_test.find(test.name);
        if (it == coverage.by_test.end()) {
            selected.push_back(test.name);  // unknown test: no history, always run
            continue;
        }
        bool impacted = std::any_of(it->second.begin(), it->second.end(),
                                    [&](const std::string& m) { return changes.contains(m); });
        if (impacted) selected.push_back(test.name);
    }
    return selected;
}

RtsOutcome run_rts(const FeatureModel& fm, const Program& new_program,
                   const std::vector<TestCase>& suite,
                   const std::map<std::string, TestCache>& prior, const CoverageMap& coverage,
                   const ChangeSet& changes, std::size_t bound, SatTrie& trie) {
    RtsOutcome outcome;
    outcome.selected = select_tests(coverage, changes, suite);
    outcome.selection_ratio =
        suite.empty() ? 0.0
                      : static_cast<double>(outcome.selected.size()) / static_cast<double>(suite.size());

    CacheStats before = trie.stats();
    for (const auto& test : suite) {
        RtsTestOutcome per_test;
        per_test.selected = std::find(outcome.selected.begin(), outcome.selected.end(), test.name) !=
                            outcome.selected.end();
        auto prior_it = prior.find(test.name);
        if (per_test.selected) {
            auto result = splat(fm, new_program, test, StackPrefix{}, bound, trie);
            per_test.bounded = result.bounded;
            per_test.runs = std::move(result.runs);
            if (prior_it != prior.end()) {
                auto verdicts = [](const std::vector<RunRecord>& runs) {
                    std::vector<std::pair<Assignment, Verdict>> out;
                    for (const auto& r : runs) out.emplace_back(stack_partial(r), r.verdict);
                    std::sort(out.begin(), out.end());
                    return out;
                };
                per_test.verdict_changed = verdicts(per_test.runs) != verdicts(prior_it->second.runs);
            }
        } else {
            if (prior_it == prior.end())
                throw Error("test '" + test.name + "' is unselected but has no cached runs");
            per_test.runs = prior_it->second.runs;
            per_test.bounded = prior_it->second.bounded;
        }
        outcome.coverage.by_test[test.name] = covered_methods(per_test.runs);
        outcome.tests[test.name] = std::move(per_test);
    }
    CacheStats after = trie.stats();
    outcome.stats.hits = after.hits - before.hits;
    outcome.stats.misses = after.misses - before.misses;
    outcome.stats.sat_count = after.sat_count - before.sat_count;
    outcome.stats.unsat_count = after.unsat_count - before.unsat_count;
    return outcome;
}

}  // namespace splat
