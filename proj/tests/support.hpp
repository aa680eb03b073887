#pragma once

// Shared fixtures, brute-force oracles and random generators for the tests.

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "splat/feature_model.hpp"
#include "splat/subject.hpp"

namespace support {

// Graph library fixture: three optional features, the unweighted variant
// requires search, and the edge path only exists in the weighted variant.
inline const char* kGraphModel = R"(
feature WEIGHTED
feature SEARCH
feature UNDIR
constraint WEIGHTED | SEARCH
)";

inline const char* kGraphSuiteV1 = R"(
method test {
  call addVertex
  pass
}
method addVertex {
  if WEIGHTED {
    call addAnEdge
  } else {
    if SEARCH { pass } else { pass }
  }
}
method addAnEdge {
  if SEARCH { call adjustAdorns } else { call adjustAdorns }
}
method adjustAdorns {
  if UNDIR { pass } else { pass }
}
test graph entry test expect pass
)";

// Same program with only addAnEdge's body rewritten.
inline const char* kGraphSuiteV2 = R"(
method test {
  call addVertex
  pass
}
method addVertex {
  if WEIGHTED {
    call addAnEdge
  } else {
    if SEARCH { pass } else { pass }
  }
}
method addAnEdge {
  if SEARCH { call adjustAdorns pass } else { call adjustAdorns }
}
method adjustAdorns {
  if UNDIR { pass } else { pass }
}
test graph entry test expect pass
)";

// Editor fixture: two mandatory features, three optional ones, at least one
// of the two bars present; the word counter lives on the toolbar.
inline const char* kEditorModel = R"(
feature NOTEPAD mandatory true
feature BASE mandatory true
feature MENUBAR
feature TOOLBAR
feature WORDCOUNT
constraint MENUBAR | TOOLBAR
)";

inline const char* kEditorSuite = R"(
method test {
  if NOTEPAD { pass } else { pass }
  if TOOLBAR {
    if WORDCOUNT { pass } else { pass }
  } else {
    pass
  }
}
test editor entry test expect pass
)";

// Three-method toy: each run reaches the dispatcher plus exactly one callee.
inline const char* kToyModel = "feature A\n";

inline const char* kToySuite = R"(
method m1 {
  if A { call m3 } else { call m2 }
}
method m2 { pass }
method m3 { pass }
test toy entry m1 expect pass
)";

// Isolated-feature fault: fails only when A is enabled and B, C are off.
inline const char* kFaultModel = "feature A\nfeature B\nfeature C\n";

inline const char* kFaultSuite = R"(
method probe {
  if A {
    if B { pass } else {
      if C { pass } else { fail "isolated feature" }
    }
  } else { pass }
}
test probe entry probe expect pass
)";

// ---- brute-force oracles ----------------------------------------------

inline bool clause_satisfied(const splat::Clause& clause, const std::vector<bool>& values) {
    for (const auto& lit : clause)
        if (values[static_cast<std::size_t>(lit.var)] == lit.positive) return true;
    return false;
}

template <typename Fn>
inline void for_each_valid(const splat::FeatureModel& fm, const splat::Assignment& a, Fn&& fn) {
    const auto& vars = fm.variables();
    const std::size_t n = vars.size();
    for (std::uint64_t bits = 0; bits < (1ull << n); ++bits) {
        std::vector<bool> values(n);
        bool consistent = true;
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = (bits >> i) & 1ull;
            auto pinned = a.get(vars[i].name);
            if (pinned && *pinned != values[i]) consistent = false;
        }
        if (!consistent) continue;
        bool ok = true;
        for (const auto& clause : fm.clauses())
            if (!clause_satisfied(clause, values)) {
                ok = false;
                break;
            }
        if (!ok) continue;
        splat::Assignment config;
        for (std::size_t i = 0; i < n; ++i) config.set(vars[i].name, values[i]);
        fn(config);
    }
}

inline bool brute_sat(const splat::FeatureModel& fm, const splat::Assignment& a) {
    bool found = false;
    for_each_valid(fm, a, [&](const splat::Assignment&) { found = true; });
    return found;
}

inline std::set<splat::Assignment> brute_valid(const splat::FeatureModel& fm,
                                               const splat::Assignment& a) {
    std::set<splat::Assignment> out;
    for_each_valid(fm, a, [&](const splat::Assignment& config) { out.insert(config); });
    return out;
}

// ---- random generators ------------------------------------------------

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

/// Random model text over F0..Fn-1 with a few random clauses; not
/// guaranteed satisfiable.
inline std::string random_model_text(Rng& rng, std::size_t max_vars) {
    std::size_t n = pick(rng, 2, max_vars);
    std::string text;
    std::vector<int> mandatory(n, -1);  // -1 optional, else pinned value
    for (std::size_t i = 0; i < n; ++i) {
        text += "feature F" + std::to_string(i);
        if (chance(rng, 0.15)) {
            mandatory[i] = chance(rng, 0.5) ? 1 : 0;
            text += mandatory[i] ? " mandatory true" : " mandatory false";
        }
        text += "\n";
    }
    std::size_t clauses = pick(rng, 0, n);
    for (std::size_t c = 0; c < clauses; ++c) {
        std::size_t width = pick(rng, 1, 3);
        text += "constraint ";
        for (std::size_t l = 0; l < width; ++l) {
            if (l) text += " | ";
            std::size_t var = pick(rng, 0, n - 1);
            bool negative = chance(rng, 0.4);
            // a declared unit clause may not contradict a mandatory value
            if (width == 1 && mandatory[var] >= 0) negative = mandatory[var] == 0;
            if (negative) text += "!";
            text += "F" + std::to_string(var);
        }
        text += "\n";
    }
    return text;
}

/// Random satisfiable model, by rejection.
inline splat::FeatureModel random_sat_model(Rng& rng, std::size_t max_vars) {
    while (true) {
        auto fm = splat::FeatureModel::parse(random_model_text(rng, max_vars));
        if (brute_sat(fm, {})) return fm;
    }
}

inline std::string random_expr(Rng& rng, const splat::FeatureModel& fm, int depth) {
    const auto& vars = fm.variables();
    if (depth >= 2 || chance(rng, 0.4)) return vars[pick(rng, 0, vars.size() - 1)].name;
    switch (pick(rng, 0, 2)) {
        case 0:
            return "!" + random_expr(rng, fm, depth + 1);
        case 1:
            return "(" + random_expr(rng, fm, depth + 1) + " & " + random_expr(rng, fm, depth + 1) +
                   ")";
        default:
            return "(" + random_expr(rng, fm, depth + 1) + " | " + random_expr(rng, fm, depth + 1) +
                   ")";
    }
}

inline std::string random_statement(Rng& rng, const splat::FeatureModel& fm, std::size_t method,
                                    std::size_t n_methods, int depth);

inline std::string random_block(Rng& rng, const splat::FeatureModel& fm, std::size_t method,
                                std::size_t n_methods, int depth) {
    std::size_t count = pick(rng, 1, 2);
    std::string out;
    for (std::size_t i = 0; i < count; ++i)
        out += random_statement(rng, fm, method, n_methods, depth) + " ";
    return out;
}

inline std::string random_statement(Rng& rng, const splat::FeatureModel& fm, std::size_t method,
                                    std::size_t n_methods, int depth) {
    const auto& vars = fm.variables();
    std::size_t roll = pick(rng, 0, 9);
    if (roll < 3 && depth < 2) {
        std::string out = "if " + vars[pick(rng, 0, vars.size() - 1)].name + " { " +
                          random_block(rng, fm, method, n_methods, depth + 1) + "}";
        if (chance(rng, 0.5))
            out += " else { " + random_block(rng, fm, method, n_methods, depth + 1) + "}";
        return out;
    }
    if (roll < 6 && method + 1 < n_methods)
        return "call m" + std::to_string(pick(rng, method + 1, n_methods - 1));
    if (roll < 8) return "assert " + random_expr(rng, fm, 0);
    if (roll == 8) return "fail \"planted\"";
    return "pass";
}

/// A random acyclic program kept as per-method body text so single-method
/// edits regenerate one body and rebuild the suite.
struct GeneratedSuite {
    std::vector<std::string> bodies;

    std::string text() const {
        std::string out;
        for (std::size_t i = 0; i < bodies.size(); ++i)
            out += "method m" + std::to_string(i) + " { " + bodies[i] + " }\n";
        for (std::size_t i = 0; i < bodies.size(); ++i)
            out += "test t" + std::to_string(i) + " entry m" + std::to_string(i) + " expect pass\n";
        return out;
    }
};

inline GeneratedSuite random_suite(Rng& rng, const splat::FeatureModel& fm) {
    GeneratedSuite suite;
    std::size_t n = pick(rng, 2, 6);
    for (std::size_t i = 0; i < n; ++i)
        suite.bodies.push_back(random_block(rng, fm, i, n, 0));
    return suite;
}

/// Rewrites one method body; guaranteed to change its digest.
inline GeneratedSuite edit_one_method(Rng& rng, const splat::FeatureModel& fm,
                                      const GeneratedSuite& base, std::size_t& edited) {
    GeneratedSuite next = base;
    edited = pick(rng, 0, base.bodies.size() - 1);
    std::string body;
    do {
        body = random_block(rng, fm, edited, base.bodies.size(), 0);
    } while (body == base.bodies[edited]);
    next.bodies[edited] = body;
    return next;
}

/// Plays back a fixed complete configuration.
class FixedMonitor : public splat::ExecutionMonitor {
public:
    explicit FixedMonitor(const splat::Assignment& config) : config_(config) {}

    bool feature_read(const std::string& feature) override { return *config_.get(feature); }
    void method_entered(const std::string&) override {}

private:
    const splat::Assignment& config_;
};

}  // namespace support
