#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "splat/feature_model.hpp"
#include "splat/sat_cache.hpp"
#include "splat/subject.hpp"

namespace splat {

struct ExplorationEntry {
    enum class Kind { Method, Feature };
    Kind kind = Kind::Method;
    std::string name;

    friend auto operator<=>(const ExplorationEntry&, const ExplorationEntry&) = default;
};

/// First-read / first-entry order of one test run. A given feature or
/// method appears at most once.
class ExplorationStack {
public:
    void push(ExplorationEntry entry) { entries_.push_back(std::move(entry)); }
    void pop() { entries_.pop_back(); }

    const ExplorationEntry& top() const { return entries_.back(); }
    const std::vector<ExplorationEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    bool contains(ExplorationEntry::Kind kind, const std::string& name) const;

    /// Feature entries in stack order.
    std::vector<std::string> features() const;
    std::vector<std::string> methods() const;

    friend auto operator<=>(const ExplorationStack&, const ExplorationStack&) = default;

private:
    std::vector<ExplorationEntry> entries_;
};

/// Per-run snapshot: the stack at run end, the complete state over all
/// variables, the verdict, and how many unsatisfiable partial assignments
/// were pruned while producing this run (read-time flips plus backtracking
/// rejections attributed to it).
struct RunRecord {
    ExplorationStack stack;
    Assignment state;
    Verdict verdict;
    std::size_t pruned = 0;
};

/// Partial assignment over the record's stack features, from its state.
Assignment stack_partial(const RunRecord& record);

/// A decision subtree given as a stack prefix recorded by a previous run,
/// with the recorded values of its feature entries.
struct StackPrefix {
    ExplorationStack stack;
    Assignment values;  // binds exactly the prefix's feature entries

    friend auto operator<=>(const StackPrefix&, const StackPrefix&) = default;
};

struct ExplorationResult {
    std::vector<RunRecord> runs;
    std::set<Assignment> covered;  // union of get_valid over run partials
    std::size_t pruned_unsat = 0;
    CacheStats stats;  // trie activity during this exploration
    bool bounded = false;
    // Observed first-read/first-entry sequence of the first run; evolution
    // compares it against the prefix to detect structural drift.
    std::vector<ExplorationEntry> first_run_trace;

    /// Root-to-leaf paths: executed runs plus pruned-illegal branches.
    std::size_t path_count() const { return runs.size() + pruned_unsat; }
};

/// Runs the test repeatedly, backtracking over first-read feature
/// decisions in false-before-true order, pruning unsatisfiable partial
/// assignments through the trie, confined to the given prefix subtree.
/// Stops after `bound` executed runs (bounded flag set).
ExplorationResult splat(const FeatureModel& fm, const Program& program, const TestCase& test,
                        const StackPrefix& prefix, std::size_t bound, SatTrie& trie);

struct DecisionTree {
    struct Node {
        std::string feature;  // empty for leaves
        std::optional<Verdict> verdict;
        bool illegal = false;
        bool unexplored = false;
        std::map<bool, std::unique_ptr<Node>> children;

        bool is_leaf() const { return children.empty(); }
    };

    std::unique_ptr<Node> root;

    std::string to_dot() const;
    std::size_t leaf_count() const;
    std::size_t illegal_count() const;
};

/// Merges run stacks on common feature prefixes (method entries elided).
/// Missing value branches become ILLEGAL leaves when their partial
/// assignment is unsatisfiable, unexplored leaves otherwise (bounded runs).
DecisionTree decision_tree(const ExplorationResult& result, const FeatureModel& fm, SatTrie& trie);

/// Full empty-prefix exploration of every test, sharing one trie.
std::map<std::string, ExplorationResult> explore_suite(const FeatureModel& fm,
                                                       const Program& program,
                                                       const std::vector<TestCase>& tests,
                                                       std::size_t bound, SatTrie& trie,
                                                       unsigned jobs = 1);

}  // namespace splat
