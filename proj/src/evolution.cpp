#include "splat/evolution.hpp"

#include <algorithm>

namespace splat {

std::optional<std::size_t> find_hit(const ExplorationStack& stack, const ChangeSet& changes) {
    const auto& entries = stack.entries();
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].kind == ExplorationEntry::Kind::Method && changes.contains(entries[i].name))
            return i;
    return std::nullopt;
}

std::vector<SubtreePrefix> affected_prefixes(const std::vector<RunRecord>& records,
                                             const ChangeSet& changes) {
    std::vector<SubtreePrefix> prefixes;
    for (const auto& record : records) {
        auto hit = find_hit(record.stack, changes);
        if (!hit) continue;
        SubtreePrefix prefix;
        for (std::size_t i = 0; i < *hit; ++i) {
            const auto& entry = record.stack.entries()[i];
            prefix.stack.push(entry);
            if (entry.kind == ExplorationEntry::Kind::Feature)
                prefix.values.set(entry.name, *record.state.get(entry.name));
        }
        if (std::find(prefixes.begin(), prefixes.end(), prefix) == prefixes.end())
            prefixes.push_back(std::move(prefix));
    }
    return prefixes;
}

bool extends_prefix(const RunRecord& record, const SubtreePrefix& prefix) {
    const auto& entries = record.stack.entries();
    const auto& wanted = prefix.stack.entries();
    if (entries.size() < wanted.size()) return false;
    if (!std::equal(wanted.begin(), wanted.end(), entries.begin())) return false;
    for (const auto& [feature, value] : prefix.values.bindings())
        if (record.state.get(feature) != value) return false;
    return true;
}

namespace {

bool trace_matches_prefix(const std::vector<ExplorationEntry>& trace, const SubtreePrefix& prefix) {
    const auto& wanted = prefix.stack.entries();
    if (trace.size() < wanted.size()) return false;
    return std::equal(wanted.begin(), wanted.end(), trace.begin());
}

void add_covered(const FeatureModel& fm, const std::vector<RunRecord>& records,
                 std::set<Assignment>& covered) {
    for (const auto& record : records)
        for (auto& config : fm.get_valid(stack_partial(record))) covered.insert(std::move(config));
}

EvoOutcome full_exploration(const FeatureModel& fm, const Program& program, const TestCase& test,
                            std::size_t bound, SatTrie& trie) {
    auto result = splat(fm, program, test, StackPrefix{}, bound, trie);
    EvoOutcome outcome;
    outcome.runs_reexecuted = result.runs.size();
    outcome.paths_reexecuted = result.path_count();
    outcome.subtrees_explored = 1;
    outcome.covered = std::move(result.covered);
    outcome.bounded = result.bounded;
    outcome.stats = result.stats;
    outcome.merged = std::move(result.runs);
    return outcome;
}

}  // namespace

EvoOutcome evo_splat(const FeatureModel& fm, const Program& new_program, const TestCase& test,
                     const std::optional<TestCache>& prior, const ChangeSet& changes,
                     std::size_t bound, SatTrie& trie) {
    if (!prior || prior->runs.empty()) {
        auto outcome = full_exploration(fm, new_program, test, bound, trie);
        outcome.initial_run = true;
        return outcome;
    }
    if (prior->bounded)
        throw Error("test '" + test.name +
                    "': prior exploration was bounded; refusing subtree re-exploration");

    auto prefixes = affected_prefixes(prior->runs, changes);

    auto is_affected = [&](const RunRecord& record) {
        return std::any_of(prefixes.begin(), prefixes.end(),
                           [&](const SubtreePrefix& p) { return extends_prefix(record, p); });
    };

    EvoOutcome outcome;
    for (const auto& record : prior->runs) {
        if (is_affected(record)) continue;
        if (!trie.is_sat(fm, stack_partial(record)))
            throw Error("test '" + test.name +
                        "': retained run is no longer satisfiable; the model changed and the "
                        "workspace is invalid");
        outcome.merged.push_back(record);
        ++outcome.runs_retained;
        outcome.paths_retained += 1 + record.pruned;
    }

    CacheStats before = trie.stats();
    std::vector<RunRecord> fresh;
    for (const auto& prefix : prefixes) {
        auto result = splat(fm, new_program, test, prefix, bound, trie);
        if (!trace_matches_prefix(result.first_run_trace, prefix)) {
            // The code before the changed method no longer reproduces the
            // recorded prefix: the change assumption is violated, so the
            // whole cache for this test is stale.
            auto escalated = full_exploration(fm, new_program, test, bound, trie);
            escalated.drift_escalated = true;
            return escalated;
        }
        outcome.bounded = outcome.bounded || result.bounded;
        ++outcome.subtrees_explored;
        outcome.runs_reexecuted += result.runs.size();
        outcome.paths_reexecuted += result.path_count();
        for (auto& record : result.runs) fresh.push_back(std::move(record));
    }
    CacheStats after = trie.stats();
    outcome.stats.hits = after.hits - before.hits;
    outcome.stats.misses = after.misses - before.misses;
    outcome.stats.sat_count = after.sat_count - before.sat_count;
    outcome.stats.unsat_count = after.unsat_count - before.unsat_count;

    outcome.merged.insert(outcome.merged.end(), std::make_move_iterator(fresh.begin()),
                          std::make_move_iterator(fresh.end()));
    add_covered(fm, outcome.merged, outcome.covered);
    return outcome;
}

ReductionReport reduction_report(const std::vector<RunRecord>& records, const Program& program) {
    ReductionReport report;
    if (program.methods().empty()) return report;
    double total = 0.0;
    for (const auto& [method, body] : program.methods()) {
        std::size_t absent = 0;
        for (const auto& record : records)
            if (!record.stack.contains(ExplorationEntry::Kind::Method, method)) ++absent;
        double fraction =
            records.empty() ? 1.0 : static_cast<double>(absent) / static_cast<double>(records.size());
        report.per_method[method] = fraction;
        total += fraction;
    }
    report.average = total / static_cast<double>(program.methods().size());
    return report;
}

std::size_t reduction_bucket(double average) {
    if (average < 0.0) average = 0.0;
    auto bucket = static_cast<std::size_t>(average * 10.0);
    return bucket > 9 ? 9 : bucket;
}

}  // namespace splat
