#pragma once

#include <vector>

#include "rcr/decompose.hpp"
#include "rcr/exact.hpp"

namespace rcr {

enum class Task { MPE, PR };

/// Compensation scheme: the condition set the theta pairs are driven to.
/// PrDD and MpeDD keep theta(x) * theta(x_i) = 1 after every update; the
/// model-split scheme instead normalizes each table to linear sum 1.
enum class Scheme { ModelSplit, PrDD, MpeDD };

struct ConvergenceReport {
    int iterations = 0;       // sweeps performed
    double max_delta = 0.0;   // largest |d log theta| in the final sweep
    bool converged = false;
    std::vector<double> bound_trajectory;  // compensated value after each sweep
    long long zero_marginal_skips = 0;
};

/// One model-split update of a single constraint: theta(x) <- a Z(x_i)/theta(x_i),
/// theta(x_i) <- a Z(x)/theta(x), both tables normalized to linear sum 1.
void update_split_pair(DecomposedModel& dm, int constraint_id);

/// One pr-dd/mpe-dd update for a constraint whose original and clone lie in
/// different components: theta(x) = (Zh(x_i)/Zh(x))^(1/2) with Zh the marginal
/// divided by the current theta, and theta(x_i) = 1/theta(x).  Works for any
/// cardinality.  State pairs with a zero marginal are left unchanged.
void update_dd_decoupled(DecomposedModel& dm, int constraint_id, Scheme scheme);

/// One pr-dd/mpe-dd update valid in any structure but restricted to binary
/// variables.  Anchors theta at state 0 (theta(0) = theta(0_i) = 1) and sets
/// theta(1) from the ratio of the two cross pair-marginals with the current
/// theta divided out.  Skipped when a cross term carries no mass.
void update_dd_binary(DecomposedModel& dm, int constraint_id, Scheme scheme);

/// Round-robin fixed-point iteration: sweeps relaxed constraints in id order,
/// one at a time with fresh marginals, until the largest log-theta change in
/// a sweep drops to `tolerance` or `max_iterations` sweeps have run.
ConvergenceReport compensate(DecomposedModel& dm, Scheme scheme, double tolerance = 1e-8,
                             int max_iterations = 1000);

/// MaxProduct (MPE) or SumProduct (PR) value of the compensated graph.
/// Requires every relaxed pair to satisfy theta(x)*theta(x_i) = 1 (checked);
/// under that condition the result upper-bounds the source model's value.
double upper_bound(const DecomposedModel& dm, Task task);

/// Direct evaluation of the separable dual objective on a fully decomposed
/// model: per-variable maxima of the theta products plus per-factor maxima of
/// the potential with clone-side thetas folded in.  Equals
/// upper_bound(dm, MPE) but does not go through the elimination engine.
double dual_objective_closed_form(const DecomposedModel& dm);

}  // namespace rcr
