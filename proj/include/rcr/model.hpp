#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcr/errors.hpp"
#include "rcr/logspace.hpp"

namespace rcr {

/// A discrete variable.  Clones are created when factor occurrences are
/// decomposed; `origin` records which variable and factor a clone came from.
struct Variable {
    int id = -1;
    int cardinality = 0;
    int origin_variable = -1;  // -1 for an original variable
    int origin_factor = -1;    // potential factor the clone occurrence belongs to

    bool is_clone() const { return origin_variable >= 0; }
};

enum class FactorKind {
    Potential,     // model potential
    Compensation,  // one side of a theta pair standing in for a relaxed constraint
    Equivalence,   // hard eq(X, Y): 0 on the diagonal, log-zero off it
};

/// Dense log-domain factor.  `table` is row-major in scope order: the last
/// scope variable varies fastest.
struct Factor {
    int id = -1;
    std::vector<int> scope;
    std::vector<double> table;
    FactorKind kind = FactorKind::Potential;
    int constraint = -1;  // owning equivalence constraint for non-potential kinds
    int side = -1;        // Compensation: 0 = on original, 1 = on clone

    std::size_t arity() const { return scope.size(); }
};

struct FactorGraph {
    std::vector<Variable> variables;
    std::vector<Factor> factors;

    int num_variables() const { return static_cast<int>(variables.size()); }
    int num_factors() const { return static_cast<int>(factors.size()); }
    int cardinality(int v) const { return variables[static_cast<std::size_t>(v)].cardinality; }

    std::size_t table_size(const Factor& f) const;
    /// Throws contract_error if scopes reference unknown variables, ids are
    /// not contiguous, or a table length does not match its scope.
    void validate() const;
};

/// Complete assignment: one state index per variable id.
struct Assignment {
    std::vector<int> values;

    Assignment() = default;
    explicit Assignment(std::vector<int> v) : values(std::move(v)) {}
    int operator[](int v) const { return values[static_cast<std::size_t>(v)]; }
    int& operator[](int v) { return values[static_cast<std::size_t>(v)]; }
    std::size_t size() const { return values.size(); }

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Parses the UAI competition model format (linear-domain tables; converted
/// to log domain here).  BAYES preambles are read exactly like MARKOV ones.
FactorGraph parse_uai(std::istream& in);
FactorGraph parse_uai(const std::string& text);

/// Inverse of parse_uai up to floating-point formatting.
std::string serialize_uai(const FactorGraph& fg);

/// Evidence file: count followed by (variable, state) pairs.
std::vector<std::pair<int, int>> parse_evidence(std::istream& in);
std::vector<std::pair<int, int>> parse_evidence(const std::string& text);

/// Sum of the selected log table entries; kLogZero if any entry is zero.
double evaluate(const FactorGraph& fg, const Assignment& a);

/// Zeroes every table row inconsistent with the evidence.  Variables are kept.
FactorGraph condition(const FactorGraph& fg, std::span<const std::pair<int, int>> evidence);

/// eq(x, y): 0 on the diagonal, log-zero off it.
Factor equivalence_factor(int factor_id, int x, int y, int cardinality, int constraint_id = -1);

/// Strides of each scope position in a row-major table.
std::vector<std::size_t> factor_strides(const FactorGraph& fg, const Factor& f);

/// Table index selected by a complete assignment.
std::size_t factor_index(const FactorGraph& fg, const Factor& f, const Assignment& a);

}  // namespace rcr
