#pragma once

#include <span>
#include <vector>

#include "rcr/model.hpp"

namespace rcr {

enum class ConstraintStatus { Relaxed, Recovered };

/// The two single-variable factors standing in for one relaxed constraint.
/// Under the upper-bound schemes, on_original[s] + on_clone[s] = 0 per state.
struct CompensationPair {
    std::vector<double> on_original;
    std::vector<double> on_clone;
};

struct EquivalenceConstraint {
    int id = -1;
    int original = -1;  // variable X
    int clone = -1;     // variable X_i; -1 once recovered
    int factor = -1;    // potential factor holding the clone occurrence
    ConstraintStatus status = ConstraintStatus::Relaxed;
    int theta_original_factor = -1;  // -1 once recovered
    int theta_clone_factor = -1;
};

/// A factor graph derived from `source` by cloning variable occurrences, plus
/// the registry of equivalence constraints and their compensation factors.
/// Mutation (recovery, theta updates) is single-writer; reads may be shared.
class DecomposedModel {
public:
    const FactorGraph& graph() const { return graph_; }
    const FactorGraph& source() const { return source_; }
    const std::vector<EquivalenceConstraint>& constraints() const { return constraints_; }
    const EquivalenceConstraint& constraint(int id) const;
    int relaxed_count() const;

    CompensationPair theta(int constraint_id) const;
    void set_theta(int constraint_id, const CompensationPair& pair);
    /// Direct mutable access to one side's log table (0 = original, 1 = clone).
    std::span<double> theta_table(int constraint_id, int side);
    std::span<const double> theta_table(int constraint_id, int side) const;

    /// Merges the clone back into its original variable, removes both
    /// compensation factors, and drops the clone variable.  Variable and
    /// factor ids are recompacted; constraint ids are stable.
    void recover(int constraint_id);

    /// Ids of relaxed constraints whose original and clone disagree under `a`.
    std::vector<int> violated_constraints(const Assignment& a) const;

    /// Restriction of an assignment on graph() to the source variables.
    Assignment project(const Assignment& a) const;

    friend DecomposedModel fully_decompose(const FactorGraph& fg);

private:
    FactorGraph graph_;
    FactorGraph source_;
    std::vector<EquivalenceConstraint> constraints_;
};

/// Clones every variable occurrence in every potential factor of arity >= 2,
/// registering one relaxed constraint per occurrence.  Compensation pairs
/// start at theta = 1 (log 0), which satisfies the upper-bound condition.
DecomposedModel fully_decompose(const FactorGraph& fg);

}  // namespace rcr
