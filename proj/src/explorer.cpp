#include "splat/explorer.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace splat {

bool ExplorationStack::contains(ExplorationEntry::Kind kind, const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const ExplorationEntry& e) {
        return e.kind == kind && e.name == name;
    });
}

std::vector<std::string> ExplorationStack::features() const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
        if (e.kind == ExplorationEntry::Kind::Feature) out.push_back(e.name);
    return out;
}

std::vector<std::string> ExplorationStack::methods() const {
    std::vector<std::string> out;
    for (const auto& e : entries_)
        if (e.kind == ExplorationEntry::Kind::Method) out.push_back(e.name);
    return out;
}

Assignment stack_partial(const RunRecord& record) {
    Assignment partial;
    for (const auto& feature : record.stack.features()) {
        auto value = record.state.get(feature);
        if (!value) throw Error("stack feature '" + feature + "' unbound in run state");
        partial.set(feature, *value);
    }
    return partial;
}

namespace {

class Exploration : public ExecutionMonitor {
public:
    Exploration(const FeatureModel& fm, const Program& program, const TestCase& test,
                const StackPrefix& prefix, std::size_t bound, SatTrie& trie)
        : fm_(fm), program_(program), test_(test), prefix_(prefix), bound_(bound), trie_(trie) {}

    ExplorationResult run() {
        CacheStats before = trie_.stats();
        init_state();

        Assignment prefix_partial = prefix_.values;
        if (!prefix_partial.empty() && !trie_.is_sat(fm_, prefix_partial))
            throw Error("prefix partial assignment is unsatisfiable");

        while (true) {
            stack_ = prefix_.stack;
            Verdict verdict = program_.execute(test_, *this);
            if (result_.runs.empty()) result_.first_run_trace = observed_;

            RunRecord record;
            record.stack = stack_;
            record.state = state_;
            record.verdict = verdict;
            record.pruned = pruned_this_run_;
            pruned_this_run_ = 0;
            result_.runs.push_back(std::move(record));
            for (auto& config : fm_.get_valid(stack_partial(result_.runs.back())))
                result_.covered.insert(std::move(config));

            if (!backtrack()) break;
            if (result_.runs.size() >= bound_) {
                result_.bounded = true;
                break;
            }
        }

        CacheStats after = trie_.stats();
        result_.stats.hits = after.hits - before.hits;
        result_.stats.misses = after.misses - before.misses;
        result_.stats.sat_count = after.sat_count - before.sat_count;
        result_.stats.unsat_count = after.unsat_count - before.unsat_count;
        return std::move(result_);
    }

    bool feature_read(const std::string& feature) override {
        if (!fm_.is_declared(feature)) throw Error("read of undeclared feature '" + feature + "'");
        // Mandatory reads carry a constant value and stay off the stack.
        if (fm_.is_mandatory(feature)) return fm_.get_mandatory_value(feature);
        observe({ExplorationEntry::Kind::Feature, feature});
        if (!stack_.contains(ExplorationEntry::Kind::Feature, feature)) {
            stack_.push({ExplorationEntry::Kind::Feature, feature});
            if (!trie_.is_sat(fm_, current_partial())) {
                // The false branch is illegal here; true is guaranteed
                // satisfiable because the assignment without this feature was.
                ++pruned_this_run_;
                ++result_.pruned_unsat;
                state_.set(feature, true);
            }
        }
        return *state_.get(feature);
    }

    void method_entered(const std::string& method) override {
        observe({ExplorationEntry::Kind::Method, method});
        if (!stack_.contains(ExplorationEntry::Kind::Method, method))
            stack_.push({ExplorationEntry::Kind::Method, method});
    }

private:
    void init_state() {
        for (const auto& var : fm_.variables())
            state_.set(var.name, var.mandatory ? var.mandatory_value : false);
        for (const auto& [name, value] : prefix_.values.bindings()) state_.set(name, value);
    }

    Assignment current_partial() const {
        Assignment partial;
        for (const auto& feature : stack_.features()) partial.set(feature, *state_.get(feature));
        return partial;
    }

    /// Finds the next satisfiable partial assignment by backtracking over
    /// the stack, never below the prefix boundary. Returns false when the
    /// subtree is exhausted.
    bool backtrack() {
        while (true) {
            while (!stack_.empty() && stack_.top().kind == ExplorationEntry::Kind::Method)
                stack_.pop();
            if (stack_.size() <= prefix_.stack.size()) return false;
            const std::string feature = stack_.top().name;
            if (*state_.get(feature)) {
                state_.set(feature, false);  // restore
                stack_.pop();
                if (stack_.size() <= prefix_.stack.size()) return false;
            } else {
                state_.set(feature, true);
                if (trie_.is_sat(fm_, current_partial())) return true;
                ++result_.pruned_unsat;
                if (!result_.runs.empty()) ++result_.runs.back().pruned;
            }
        }
    }

    void observe(ExplorationEntry entry) {
        if (result_.runs.empty() &&
            std::find(observed_.begin(), observed_.end(), entry) == observed_.end())
            observed_.push_back(std::move(entry));
    }

    const FeatureModel& fm_;
    const Program& program_;
    const TestCase& test_;
    const StackPrefix& prefix_;
    std::size_t bound_;
    SatTrie& trie_;

    ExplorationStack stack_;
    Assignment state_;
    std::size_t pruned_this_run_ = 0;
    std::vector<ExplorationEntry> observed_;
    ExplorationResult result_;
};

}  // namespace

ExplorationResult splat(const FeatureModel& fm, const Program& program, const TestCase& test,
                        const StackPrefix& prefix, std::size_t bound, SatTrie& trie) {
    if (bound == 0) throw Error("exploration bound must be positive");
    return Exploration(fm, program, test, prefix, bound, trie).run();
}

namespace {

using TreeNode = DecisionTree::Node;

void insert_run(TreeNode& root, const RunRecord& record) {
    TreeNode* node = &root;
    for (const auto& feature : record.stack.features()) {
        bool value = *record.state.get(feature);
        if (node->verdict) throw Error("run path extends an existing leaf");
        if (node->feature.empty())
            node->feature = feature;
        else if (node->feature != feature)
            throw Error("conflicting feature at decision-tree node: " + node->feature + " vs " +
                        feature);
        auto& child = node->children[value];
        if (!child) child = std::make_unique<TreeNode>();
        node = child.get();
    }
    if (!node->children.empty() || node->verdict) throw Error("duplicate or prefix run path");
    node->verdict = record.verdict;
}

void fill_missing(TreeNode& node, Assignment& path, const FeatureModel& fm, SatTrie& trie) {
    if (node.is_leaf()) return;
    for (bool value : {false, true}) {
        auto it = node.children.find(value);
        path.set(node.feature, value);
        if (it == node.children.end()) {
            auto leaf = std::make_unique<TreeNode>();
            if (trie.is_sat(fm, path))
                leaf->unexplored = true;  // bounded exploration stopped short
            else
                leaf->illegal = true;
            node.children[value] = std::move(leaf);
        } else {
            fill_missing(*it->second, path, fm, trie);
        }
    }
    path.unset(node.feature);
}

std::size_t count_leaves(const TreeNode& node, bool illegal_only) {
    if (node.is_leaf()) return illegal_only ? (node.illegal ? 1 : 0) : 1;
    std::size_t n = 0;
    for (const auto& [value, child] : node.children) n += count_leaves(*child, illegal_only);
    return n;
}

void dot_node(const TreeNode& node, std::string& out, int& counter, int id) {
    if (node.is_leaf()) {
        std::string label = node.illegal      ? "ILLEGAL"
                            : node.unexplored ? "UNEXPLORED"
                            : node.verdict->pass ? "PASS"
                                                 : "FAIL";
        out += "  n" + std::to_string(id) + " [shape=box,label=\"" + label + "\"];\n";
        return;
    }
    out += "  n" + std::to_string(id) + " [label=\"" + node.feature + "\"];\n";
    for (bool value : {false, true}) {
        auto it = node.children.find(value);
        if (it == node.children.end()) continue;
        int child_id = ++counter;
        out += "  n" + std::to_string(id) + " -> n" + std::to_string(child_id) + " [label=\"" +
               (value ? "1" : "0") + "\"];\n";
        dot_node(*it->second, out, counter, child_id);
    }
}

}  // namespace

std::string DecisionTree::to_dot() const {
    std::string out = "digraph decision_tree {\n";
    if (root) {
        int counter = 0;
        dot_node(*root, out, counter, 0);
    }
    out += "}\n";
    return out;
}

std::size_t DecisionTree::leaf_count() const { return root ? count_leaves(*root, false) : 0; }
std::size_t DecisionTree::illegal_count() const { return root ? count_leaves(*root, true) : 0; }

DecisionTree decision_tree(const ExplorationResult& result, const FeatureModel& fm, SatTrie& trie) {
    DecisionTree tree;
    tree.root = std::make_unique<TreeNode>();
    for (const auto& record : result.runs) insert_run(*tree.root, record);
    Assignment path;
    fill_missing(*tree.root, path, fm, trie);
    return tree;
}

std::map<std::string, ExplorationResult> explore_suite(const FeatureModel& fm,
                                                       const Program& program,
                                                       const std::vector<TestCase>& tests,
                                                       std::size_t bound, SatTrie& trie,
                                                       unsigned jobs) {
    std::vector<ExplorationResult> slots(tests.size());
    std::vector<std::exception_ptr> errors(tests.size());

    auto run_one = [&](std::size_t i) {
        try {
            slots[i] = splat(fm, program, tests[i], StackPrefix{}, bound, trie);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < tests.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tests.size(); i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& worker : workers) worker.join();
    }

    for (auto& error : errors)
        if (error) std::rethrow_exception(error);

    std::map<std::string, ExplorationResult> results;
    for (std::size_t i = 0; i < tests.size(); ++i) results[tests[i].name] = std::move(slots[i]);
    return results;
}

}  // namespace splat
