#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rcr/compensate.hpp"
#include "rcr/decompose.hpp"

namespace rcr {

enum class Heuristic { Impact, Violation, ImpactThenViolation, None };

struct RecoveryConfig {
    Heuristic heuristic = Heuristic::ImpactThenViolation;
    int batch_size = 5;
    int max_rounds = std::numeric_limits<int>::max();
    Task task = Task::MPE;
    Scheme scheme = Scheme::MpeDD;
    std::optional<long long> cost_budget;  // cap on plan total_table_entries
};

struct BoundState {
    double upper = 0.0;
    double lower = kLogZero;  // stays log-zero until a decode lands
    Assignment incumbent;     // on the source model
    std::vector<int> violated;
    bool certified = false;
};

struct TraceRecord {
    int round = 0;
    int recovered_total = 0;
    double upper_bound_log = 0.0;
    double lower_bound_log = kLogZero;
    int violated_count = 0;
    long long plan_total_table_entries = 0;
    bool certified = false;
};

struct SolveTrace {
    std::vector<TraceRecord> rounds;
    /// One JSON object per round, newline-delimited.
    std::string to_jsonl() const;
};

/// The bound the model would have after recovering just this constraint,
/// computed from the current pair marginals without mutating anything.
/// Binary variables only.
double impact_of_recovery(const DecomposedModel& dm, int constraint_id, Task task);

/// Recovery order for the relaxed constraints under the configured heuristic.
/// Impact ranks ascending by impact_of_recovery (largest reduction first);
/// Violation puts the constraints in `bound_state.violated` first; the
/// combined mode ranks each group by impact.  Ties break by constraint id.
std::vector<int> rank_constraints(const DecomposedModel& dm, const BoundState& bound_state,
                                  const RecoveryConfig& config);

struct SolveResult {
    BoundState state;
    SolveTrace trace;
};

/// The full anytime loop: fully decompose, then per round compensate to
/// convergence, bound, decode, certify if the decode violates nothing, and
/// otherwise recover a batch of constraints.  Stops on certification,
/// max_rounds, the cost budget, or full recovery (which is exact).
SolveResult rcr_solve(const FactorGraph& fg, const RecoveryConfig& config,
                      double tolerance = 1e-8, int max_iterations = 1000);

}  // namespace rcr
