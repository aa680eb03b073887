#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splat/errors.hpp"

namespace splat {

struct FeatureVariable {
    std::string name;
    bool mandatory = false;
    bool mandatory_value = false;  // meaningful only when mandatory
};

/// A literal over a declared feature variable, by declaration index.
struct Literal {
    int var = -1;
    bool positive = true;

    friend auto operator<=>(const Literal&, const Literal&) = default;
};

using Clause = std::vector<Literal>;

/// Partial or complete mapping feature-name -> boolean.
class Assignment {
public:
    Assignment() = default;

    void set(const std::string& name, bool value) { bindings_[name] = value; }
    void unset(const std::string& name) { bindings_.erase(name); }

    std::optional<bool> get(const std::string& name) const {
        auto it = bindings_.find(name);
        if (it == bindings_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(const std::string& name) const { return bindings_.count(name) != 0; }
    std::size_t size() const { return bindings_.size(); }
    bool empty() const { return bindings_.empty(); }

    const std::map<std::string, bool>& bindings() const { return bindings_; }

    friend auto operator<=>(const Assignment&, const Assignment&) = default;

private:
    std::map<std::string, bool> bindings_;
};

/// Feature variables plus CNF constraints; the legality oracle.
/// Immutable after parse; solver calls allocate their own working state.
class FeatureModel {
public:
    static constexpr std::size_t kDefaultEnumerationCap = 4096;

    /// Parses the model file grammar:
    ///   feature <name> [mandatory <true|false>]
    ///   constraint <lit> (| <lit>)*        lit := name | !name
    /// Comments start with '#'. Mandatory variables get a unit clause.
    static FeatureModel parse(const std::string& text);

    const std::vector<FeatureVariable>& variables() const { return variables_; }
    const std::vector<Clause>& clauses() const { return clauses_; }

    /// Declaration index, or -1 when undeclared.
    int index_of(const std::string& name) const;
    bool is_declared(const std::string& name) const { return index_of(name) >= 0; }

    bool is_mandatory(const std::string& name) const;
    bool get_mandatory_value(const std::string& name) const;

    /// True iff `a` extends to a complete assignment satisfying all clauses.
    /// DPLL with unit propagation; branching in declaration order, false first.
    bool is_satisfiable(const Assignment& a) const;

    /// All complete assignments agreeing with `a` that satisfy the model,
    /// in declaration order with false enumerated before true.
    /// Throws EnumerationCapError past `cap`.
    std::vector<Assignment> get_valid(const Assignment& a,
                                      std::size_t cap = kDefaultEnumerationCap) const;

    /// Hex digest of the source text the model was parsed from.
    const std::string& digest() const { return digest_; }

private:
    int require_declared(const std::string& name) const;
    // values: -1 unknown, 0 false, 1 true. Returns false on conflict.
    bool unit_propagate(std::vector<signed char>& values) const;
    bool dpll(std::vector<signed char>& values) const;
    void enumerate(std::vector<signed char>& values, std::size_t next, std::size_t cap,
                   std::vector<Assignment>& out) const;
    bool clause_falsified(const Clause& c, const std::vector<signed char>& values) const;
    std::vector<signed char> seed_values(const Assignment& a) const;

    std::vector<FeatureVariable> variables_;
    std::vector<Clause> clauses_;
    std::map<std::string, int> index_;
    std::string digest_;
};

}  // namespace splat
