#include "splat/feature_model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "splat/digest.hpp"

namespace splat {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

}  // namespace

FeatureModel FeatureModel::parse(const std::string& text) {
    FeatureModel fm;
    fm.digest_ = digest_hex(text);

    // Raw clause tokens are resolved after all declarations so that
    // constraints may precede the features they mention.
    std::vector<std::pair<int, std::vector<std::string>>> raw_clauses;

    std::istringstream input(text);
    std::string line;
    int lineno = 0;
    while (std::getline(input, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto toks = split_ws(line);
        if (toks.empty()) continue;

        if (toks[0] == "feature") {
            if (toks.size() != 2 && toks.size() != 4)
                throw ParseError("expected 'feature <name> [mandatory <true|false>]'", lineno, 1);
            const std::string& name = toks[1];
            if (!valid_identifier(name)) throw ParseError("bad feature name '" + name + "'", lineno, 1);
            if (fm.index_.count(name)) throw ParseError("duplicate feature '" + name + "'", lineno, 1);
            FeatureVariable var;
            var.name = name;
            if (toks.size() == 4) {
                if (toks[2] != "mandatory" || (toks[3] != "true" && toks[3] != "false"))
                    throw ParseError("expected 'mandatory <true|false>'", lineno, 1);
                var.mandatory = true;
                var.mandatory_value = toks[3] == "true";
            }
            fm.index_[name] = static_cast<int>(fm.variables_.size());
            fm.variables_.push_back(std::move(var));
        } else if (toks[0] == "constraint") {
            if (toks.size() < 2) throw ParseError("empty constraint", lineno, 1);
            raw_clauses.emplace_back(lineno, std::vector<std::string>(toks.begin() + 1, toks.end()));
        } else {
            throw ParseError("unknown directive '" + toks[0] + "'", lineno, 1);
        }
    }

    for (auto& [clause_line, toks] : raw_clauses) {
        Clause clause;
        bool expect_lit = true;
        for (const auto& tok : toks) {
            if (tok == "|") {
                if (expect_lit) throw ParseError("misplaced '|'", clause_line, 1);
                expect_lit = true;
                continue;
            }
            if (!expect_lit) throw ParseError("expected '|' between literals", clause_line, 1);
            Literal lit;
            std::string name = tok;
            if (!name.empty() && name[0] == '!') {
                lit.positive = false;
                name.erase(0, 1);
            }
            lit.var = fm.index_of(name);
            if (lit.var < 0)
                throw ParseError("constraint references undeclared variable '" + name + "'",
                                 clause_line, 1);
            clause.push_back(lit);
            expect_lit = false;
        }
        if (expect_lit) throw ParseError("constraint ends with '|'", clause_line, 1);
        // A declared unit clause must not contradict a mandatory value.
        if (clause.size() == 1) {
            const auto& var = fm.variables_[static_cast<std::size_t>(clause[0].var)];
            if (var.mandatory && var.mandatory_value != clause[0].positive)
                throw ParseError("unit clause contradicts mandatory variable '" + var.name + "'",
                                 clause_line, 1);
        }
        fm.clauses_.push_back(std::move(clause));
    }

    // Mandatory variables become unit clauses; the solver needs no special casing.
    for (std::size_t i = 0; i < fm.variables_.size(); ++i) {
        const auto& var = fm.variables_[i];
        if (var.mandatory) fm.clauses_.push_back({Literal{static_cast<int>(i), var.mandatory_value}});
    }
    return fm;
}

int FeatureModel::index_of(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

int FeatureModel::require_declared(const std::string& name) const {
    int idx = index_of(name);
    if (idx < 0) throw Error("undeclared feature variable '" + name + "'");
    return idx;
}

bool FeatureModel::is_mandatory(const std::string& name) const {
    return variables_[static_cast<std::size_t>(require_declared(name))].mandatory;
}

bool FeatureModel::get_mandatory_value(const std::string& name) const {
    const auto& var = variables_[static_cast<std::size_t>(require_declared(name))];
    if (!var.mandatory) throw Error("variable '" + name + "' is optional");
    return var.mandatory_value;
}

std::vector<signed char> FeatureModel::seed_values(const Assignment& a) const {
    std::vector<signed char> values(variables_.size(), -1);
    for (const auto& [name, value] : a.bindings())
        values[static_cast<std::size_t>(require_declared(name))] = value ? 1 : 0;
    return values;
}

bool FeatureModel::unit_propagate(std::vector<signed char>& values) const {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& clause : clauses_) {
            int unassigned = -1;
            int unassigned_count = 0;
            bool satisfied = false;
            for (const auto& lit : clause) {
                signed char v = values[static_cast<std::size_t>(lit.var)];
                if (v < 0) {
                    unassigned = lit.var;
                    ++unassigned_count;
                } else if ((v == 1) == lit.positive) {
                    satisfied = true;
                    break;
                }
            }
            if (satisfied) continue;
            if (unassigned_count == 0) return false;
            if (unassigned_count == 1) {
                for (const auto& lit : clause)
                    if (lit.var == unassigned)
                        values[static_cast<std::size_t>(unassigned)] = lit.positive ? 1 : 0;
                changed = true;
            }
        }
    }
    return true;
}

bool FeatureModel::dpll(std::vector<signed char>& values) const {
    if (!unit_propagate(values)) return false;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= 0) continue;
        for (signed char choice : {0, 1}) {  // false branch first
            auto trail = values;
            trail[i] = choice;
            if (dpll(trail)) return true;
        }
        return false;
    }
    return true;
}

bool FeatureModel::is_satisfiable(const Assignment& a) const {
    auto values = seed_values(a);
    return dpll(values);
}

bool FeatureModel::clause_falsified(const Clause& c, const std::vector<signed char>& values) const {
    for (const auto& lit : c) {
        signed char v = values[static_cast<std::size_t>(lit.var)];
        if (v < 0 || (v == 1) == lit.positive) return false;
    }
    return true;
}

void FeatureModel::enumerate(std::vector<signed char>& values, std::size_t next, std::size_t cap,
                             std::vector<Assignment>& out) const {
    for (const auto& clause : clauses_)
        if (clause_falsified(clause, values)) return;
    while (next < values.size() && values[next] >= 0) ++next;
    if (next == values.size()) {
        if (out.size() >= cap) throw EnumerationCapError(cap, out.size() + 1);
        Assignment complete;
        for (std::size_t i = 0; i < values.size(); ++i)
            complete.set(variables_[i].name, values[i] == 1);
        out.push_back(std::move(complete));
        return;
    }
    for (signed char choice : {0, 1}) {
        values[next] = choice;
        enumerate(values, next + 1, cap, out);
    }
    values[next] = -1;
}

std::vector<Assignment> FeatureModel::get_valid(const Assignment& a, std::size_t cap) const {
    auto values = seed_values(a);
    std::vector<Assignment> out;
    enumerate(values, 0, cap, out);
    return out;
}

}  // namespace splat
