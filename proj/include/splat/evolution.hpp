#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splat/explorer.hpp"
#include "splat/workspace.hpp"

namespace splat {

/// The affected decision subtree rooted where a previous run first hit a
/// changed method: the stack entries strictly before the hit plus the
/// recorded values of its feature entries.
using SubtreePrefix = StackPrefix;

/// Smallest index of a method entry whose name is in `changes`.
std::optional<std::size_t> find_hit(const ExplorationStack& stack, const ChangeSet& changes);

/// Deduplicated, first-occurrence-ordered prefixes of all change-impacted
/// runs. A hit at index 0 yields the empty prefix (full re-exploration).
std::vector<SubtreePrefix> affected_prefixes(const std::vector<RunRecord>& records,
                                             const ChangeSet& changes);

/// True iff the record's stack starts with the prefix's entries and its
/// state agrees with the prefix's recorded feature values.
bool extends_prefix(const RunRecord& record, const SubtreePrefix& prefix);

struct EvoOutcome {
    std::vector<RunRecord> merged;  // retained records first, then fresh subtree records
    std::set<Assignment> covered;
    std::size_t runs_retained = 0;
    std::size_t runs_reexecuted = 0;
    // Decision-tree paths (runs plus pruned-illegal branches) on each side.
    std::size_t paths_retained = 0;
    std::size_t paths_reexecuted = 0;
    std::size_t subtrees_explored = 0;
    bool initial_run = false;      // no history: full bootstrap exploration
    bool drift_escalated = false;  // structural drift forced full re-exploration
    bool bounded = false;
    CacheStats stats;
};

/// EvoSPLat in RCS mode for one test: re-explores only change-impacted
/// decision subtrees of the prior exploration and merges fresh records
/// over the records they replace. `prior` empty means bootstrap.
/// Throws when the prior exploration was bounded (RCS refuses such tests)
/// or when a retained record's partial assignment is no longer satisfiable
/// (the model changed under the workspace).
EvoOutcome evo_splat(const FeatureModel& fm, const Program& new_program, const TestCase& test,
                     const std::optional<TestCache>& prior, const ChangeSet& changes,
                     std::size_t bound, SatTrie& trie);

struct ReductionReport {
    std::map<std::string, double> per_method;  // fraction of runs whose stack lacks the method
    double average = 0.0;
};

/// The configuration-reduction measure: per program method, the fraction
/// of the test's runs that never enter it; averaged over all methods.
ReductionReport reduction_report(const std::vector<RunRecord>& records, const Program& program);

/// Histogram bucket index for a reduction average: [0,0.1) -> 0, ...,
/// [0.9,1.0] -> 9.
std::size_t reduction_bucket(double average);

}  // namespace splat
