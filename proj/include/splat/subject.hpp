#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "splat/errors.hpp"

namespace splat {

class FeatureModel;

/// Boolean expression over feature variables: names, !, &, |, parentheses.
struct BoolExpr {
    enum class Kind { Feature, Not, And, Or };
    Kind kind = Kind::Feature;
    std::string feature;                // Kind::Feature
    std::shared_ptr<BoolExpr> lhs;      // Not/And/Or
    std::shared_ptr<BoolExpr> rhs;      // And/Or
};

struct Statement {
    enum class Kind { FeatureBranch, Call, Assert, Fail, Pass };
    Kind kind = Kind::Pass;
    std::string name;                    // FeatureBranch: variable; Call: method
    std::vector<Statement> then_block;   // FeatureBranch
    std::vector<Statement> else_block;   // FeatureBranch
    std::shared_ptr<BoolExpr> expr;      // Assert
    std::string message;                 // Fail
};

struct TestCase {
    std::string name;
    std::string entry;
    bool expect_pass = true;
};

struct Verdict {
    bool pass = true;
    std::string message;  // nonempty iff !pass

    friend auto operator<=>(const Verdict&, const Verdict&) = default;
};

/// Set of method names whose bodies differ between two versions.
struct ChangeSet {
    std::set<std::string> changed;

    bool contains(const std::string& m) const { return changed.count(m) != 0; }
    bool empty() const { return changed.empty(); }
};

/// Receives the interpreter's notifications. feature_read supplies the
/// value for every textual read of a feature variable (branch conditions
/// and assert expressions alike); method_entered fires on every first
/// and subsequent entry, including the test's entry method.
class ExecutionMonitor {
public:
    virtual ~ExecutionMonitor() = default;
    virtual bool feature_read(const std::string& feature) = 0;
    virtual void method_entered(const std::string& method) = 0;
};

/// Deterministic configurable program: named methods over an acyclic
/// call graph. Immutable after parse; execute is reentrant.
class Program {
public:
    const std::map<std::string, std::vector<Statement>>& methods() const { return methods_; }
    bool has_method(const std::string& name) const { return methods_.count(name) != 0; }

    /// Interprets `test.entry`. Pure function of (program, test, monitor
    /// responses): the interpreter holds no cross-run state, which is what
    /// makes from-scratch re-execution sound.
    Verdict execute(const TestCase& test, ExecutionMonitor& monitor) const;

    /// Stable content hash of each method's normalized statement list.
    std::map<std::string, std::string> method_digests() const;

    friend class SuiteParser;

private:
    std::map<std::string, std::vector<Statement>> methods_;
};

struct Suite {
    Program program;
    std::vector<TestCase> tests;
};

/// Parses the suite grammar and checks it against `fm`:
///   method <name> { <stmts> }
///   test <name> entry <method> expect <pass|fail>
/// Statements: if <feature> { ... } [else { ... }] | call <name> |
/// assert <expr> | fail "<msg>" | pass.
Suite parse_suite(const std::string& text, const FeatureModel& fm);

ChangeSet diff_methods(const Program& older, const Program& newer);

}  // namespace splat
