#include "splat/sampling.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "splat/errors.hpp"

namespace splat {

namespace {

// Enumerates t-subsets of variable indices in lexicographic order and, per
// subset, value combinations with false before true on the last variable
// varying fastest; matches get_valid's canonical order.
void for_each_tuple(const FeatureModel& fm, std::size_t t,
                    const std::function<void(const Assignment&)>& fn) {
    const auto& vars = fm.variables();
    std::vector<std::size_t> subset(t);
    std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t pos, std::size_t from) {
        if (pos == t) {
            for (std::uint32_t bits = 0; bits < (1u << t); ++bits) {
                Assignment tuple;
                for (std::size_t i = 0; i < t; ++i) {
                    // bit order: first chosen variable is the most significant,
                    // so bits counts 00..0 -> 11..1 in canonical order
                    bool value = (bits >> (t - 1 - i)) & 1u;
                    tuple.set(vars[subset[i]].name, value);
                }
                fn(tuple);
            }
            return;
        }
        for (std::size_t v = from; v + (t - pos) <= vars.size(); ++v) {
            subset[pos] = v;
            choose(pos + 1, v + 1);
        }
    };
    choose(0, 0);
}

bool row_covers(const Assignment& row, const Assignment& tuple) {
    for (const auto& [name, value] : tuple.bindings())
        if (row.get(name) != value) return false;
    return true;
}

}  // namespace

std::vector<Assignment> satisfiable_tuples(const FeatureModel& fm, std::size_t t, SatTrie& trie) {
    if (t < 1 || t > fm.variables().size())
        throw Error("strength " + std::to_string(t) + " out of range for " +
                    std::to_string(fm.variables().size()) + " variables");
    std::vector<Assignment> tuples;
    for_each_tuple(fm, t, [&](const Assignment& tuple) {
        if (trie.is_sat(fm, tuple)) tuples.push_back(tuple);
    });
    return tuples;
}

CoveringArray generate_twise(const FeatureModel& fm, std::size_t t, std::uint64_t seed,
                             SatTrie& trie) {
    auto tuples = satisfiable_tuples(fm, t, trie);
    auto candidates = fm.get_valid(Assignment{});  // canonical enumeration order
    if (candidates.empty()) throw Error("feature model has no valid configuration");

    CoveringArray array;
    array.strength = t;
    array.seed = seed;

    std::vector<bool> covered(tuples.size(), false);
    std::size_t remaining = tuples.size();
    while (remaining > 0) {
        std::size_t best = 0;
        std::size_t best_gain = 0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            std::size_t gain = 0;
            for (std::size_t i = 0; i < tuples.size(); ++i)
                if (!covered[i] && row_covers(candidates[c], tuples[i])) ++gain;
            if (gain > best_gain) {  // ties keep the earliest candidate in canonical order
                best_gain = gain;
                best = c;
            }
        }
        if (best_gain == 0)
            throw Error("internal: satisfiable tuple not coverable by any valid configuration");
        for (std::size_t i = 0; i < tuples.size(); ++i)
            if (!covered[i] && row_covers(candidates[best], tuples[i])) {
                covered[i] = true;
                --remaining;
            }
        array.rows.push_back(candidates[best]);
    }
    return array;
}

CoverageReport verify_covering(const FeatureModel& fm, const CoveringArray& array, SatTrie& trie) {
    CoverageReport report;
    for (const auto& tuple : satisfiable_tuples(fm, array.strength, trie)) {
        bool hit = std::any_of(array.rows.begin(), array.rows.end(),
                               [&](const Assignment& row) { return row_covers(row, tuple); });
        if (!hit) report.uncovered.push_back(tuple);
    }
    return report;
}

std::string array_to_csv(const CoveringArray& array, const FeatureModel& fm) {
    std::string out;
    const auto& vars = fm.variables();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (i) out += ",";
        out += vars[i].name;
    }
    out += "\n";
    for (const auto& row : array.rows) {
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (i) out += ",";
            auto value = row.get(vars[i].name);
            if (!value) throw Error("array row does not bind variable '" + vars[i].name + "'");
            out += *value ? "1" : "0";
        }
        out += "\n";
    }
    return out;
}

CoveringArray array_from_csv(const std::string& csv, const FeatureModel& fm, std::size_t strength) {
    CoveringArray array;
    array.strength = strength;
    std::istringstream input(csv);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(input, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (header.empty()) {
            header = cells;
            for (const auto& name : header)
                if (!fm.is_declared(name)) throw Error("array header names undeclared variable '" + name + "'");
            continue;
        }
        if (cells.size() != header.size()) throw Error("array row width mismatch");
        Assignment row;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i] != "0" && cells[i] != "1") throw Error("array cell must be 0 or 1");
            row.set(header[i], cells[i] == "1");
        }
        array.rows.push_back(std::move(row));
    }
    return array;
}

namespace {

class FixedConfigMonitor : public ExecutionMonitor {
public:
    explicit FixedConfigMonitor(const Assignment& config) : config_(config) {}

    bool feature_read(const std::string& feature) override {
        auto value = config_.get(feature);
        if (!value) throw Error("configuration does not bind feature '" + feature + "'");
        return *value;
    }

    void method_entered(const std::string&) override {}

private:
    const Assignment& config_;
};

}  // namespace

Verdict execute_under(const Program& program, const TestCase& test, const FeatureModel& fm,
                      const Assignment& config) {
    if (config.size() != fm.variables().size()) throw Error("configuration is not complete");
    FixedConfigMonitor monitor(config);
    return program.execute(test, monitor);
}

SampleRunOutcome evo_sample_run(const CoveringArray& array, const CoverageMap& coverage,
                                const ChangeSet& changes, const std::vector<TestCase>& suite,
                                const Program& new_program, const FeatureModel& fm) {
    for (const auto& row : array.rows)
        if (!fm.is_satisfiable(row)) throw Error("array row is invalid under the feature model");

    SampleRunOutcome outcome;
    outcome.selected = select_tests(coverage, changes, suite);
    outcome.selection_ratio =
        suite.empty() ? 0.0
                      : static_cast<double>(outcome.selected.size()) / static_cast<double>(suite.size());
    for (const auto& test : suite) {
        if (std::find(outcome.selected.begin(), outcome.selected.end(), test.name) ==
            outcome.selected.end())
            continue;
        auto& verdicts = outcome.verdicts[test.name];
        for (const auto& row : array.rows) {
            verdicts.push_back(execute_under(new_program, test, fm, row));
            ++outcome.executions;
        }
    }
    return outcome;
}

}  // namespace splat
