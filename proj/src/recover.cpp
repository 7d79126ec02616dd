#include "rcr/recover.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace rcr {

std::string SolveTrace::to_jsonl() const {
    std::ostringstream out;
    for (const TraceRecord& r : rounds) {
        nlohmann::ordered_json j;
        j["round"] = r.round;
        j["recovered_total"] = r.recovered_total;
        j["upper_bound_log"] = r.upper_bound_log;
        j["lower_bound_log"] = r.lower_bound_log;
        j["violated_count"] = r.violated_count;
        j["plan_total_table_entries"] = r.plan_total_table_entries;
        j["certified"] = r.certified;
        out << j.dump() << '\n';
    }
    return out.str();
}

double impact_of_recovery(const DecomposedModel& dm, int constraint_id, Task task) {
    const EquivalenceConstraint& c = dm.constraint(constraint_id);
    if (c.status != ConstraintStatus::Relaxed)
        throw contract_error("impact_of_recovery: constraint " + std::to_string(constraint_id) +
                             " is already recovered");
    if (dm.graph().cardinality(c.original) != 2)
        throw unsupported_error("impact_of_recovery: variable " + std::to_string(c.original) +
                                " is not binary; the impact formulas are two-state");

    const Semiring mode = task == Task::MPE ? Semiring::MaxProduct : Semiring::SumProduct;
    const std::vector<double> p = pair_marginal(dm.graph(), mode, c.original, c.clone);
    auto t_orig = dm.theta_table(constraint_id, 0);
    auto t_clone = dm.theta_table(constraint_id, 1);

    // Diagonal pair marginals with this constraint's theta divided out: the
    // value the model takes once eq(X, X_i) is enforced again.
    const double d0 = log_div(p[0], t_orig[0] + t_clone[0]);
    const double d1 = log_div(p[3], t_orig[1] + t_clone[1]);
    return task == Task::MPE ? log_max(d0, d1) : log_add(d0, d1);
}

namespace {

std::vector<int> relaxed_ids(const DecomposedModel& dm) {
    std::vector<int> ids;
    for (const auto& c : dm.constraints())
        if (c.status == ConstraintStatus::Relaxed) ids.push_back(c.id);
    return ids;
}

void sort_by_impact(const DecomposedModel& dm, Task task, std::vector<int>& ids) {
    std::vector<std::pair<double, int>> keyed;
    keyed.reserve(ids.size());
    for (int id : ids) keyed.emplace_back(impact_of_recovery(dm, id, task), id);
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = keyed[i].second;
}

}  // namespace

std::vector<int> rank_constraints(const DecomposedModel& dm, const BoundState& bound_state,
                                  const RecoveryConfig& config) {
    if (config.heuristic == Heuristic::None) return {};
    std::vector<int> ids = relaxed_ids(dm);
    switch (config.heuristic) {
        case Heuristic::Impact:
            sort_by_impact(dm, config.task, ids);
            break;
        case Heuristic::Violation:
        case Heuristic::ImpactThenViolation: {
            std::vector<char> is_violated(dm.constraints().size(), 0);
            for (int id : bound_state.violated) is_violated[static_cast<std::size_t>(id)] = 1;
            std::vector<int> violated, rest;
            for (int id : ids)
                (is_violated[static_cast<std::size_t>(id)] ? violated : rest).push_back(id);
            if (config.heuristic == Heuristic::ImpactThenViolation) {
                sort_by_impact(dm, config.task, violated);
                sort_by_impact(dm, config.task, rest);
            }
            ids = std::move(violated);
            ids.insert(ids.end(), rest.begin(), rest.end());
            break;
        }
        case Heuristic::None:
            break;
    }
    return ids;
}

namespace {

void check_config(const FactorGraph& fg, const RecoveryConfig& config) {
    if (config.batch_size < 1) throw contract_error("rcr_solve: batch_size must be >= 1");
    if ((config.heuristic == Heuristic::Violation ||
         config.heuristic == Heuristic::ImpactThenViolation) &&
        (config.task != Task::MPE || config.scheme != Scheme::MpeDD))
        throw contract_error(
            "rcr_solve: violation-based recovery requires task=mpe and scheme=mpe-dd");
    if (config.heuristic != Heuristic::None && config.scheme != Scheme::ModelSplit) {
        for (const Variable& v : fg.variables)
            if (v.cardinality != 2)
                throw unsupported_error(
                    "rcr_solve: variable " + std::to_string(v.id) + " has cardinality " +
                    std::to_string(v.cardinality) +
                    "; recovery under pr-dd/mpe-dd requires binary variables");
    }
    if (config.heuristic == Heuristic::Impact ||
        config.heuristic == Heuristic::ImpactThenViolation) {
        for (const Variable& v : fg.variables)
            if (v.cardinality != 2)
                throw unsupported_error(
                    "rcr_solve: variable " + std::to_string(v.id) +
                    " is not binary; impact-based recovery needs two-state impact formulas");
    }
}

bool eq2_scheme(Scheme s) { return s == Scheme::PrDD || s == Scheme::MpeDD; }

}  // namespace

SolveResult rcr_solve(const FactorGraph& fg, const RecoveryConfig& config, double tolerance,
                      int max_iterations) {
    fg.validate();
    check_config(fg, config);

    DecomposedModel dm = fully_decompose(fg);
    const int total_constraints = static_cast<int>(dm.constraints().size());
    const Semiring task_mode =
        config.task == Task::MPE ? Semiring::MaxProduct : Semiring::SumProduct;

    SolveResult result;
    BoundState& state = result.state;

    for (int round = 0;; ++round) {
        EliminationPlan plan = make_plan(dm.graph());
        const int recovered_total = total_constraints - dm.relaxed_count();

        if (config.cost_budget && plan.total_table_entries > *config.cost_budget) {
            // Too connected to keep compensating under the budget; stop with
            // whatever bounds the previous rounds produced.
            break;
        }

        if (dm.relaxed_count() == 0) {
            // Fully recovered: the graph is the source model, so the answer
            // is exact for either task.
            state.upper = query(dm.graph(), task_mode, plan);
            state.lower = state.upper;
            state.violated.clear();
            state.certified = true;
            if (config.task == Task::MPE) state.incumbent = decode_mpe(dm.graph(), plan);
            result.trace.rounds.push_back({round, recovered_total, state.upper, state.lower, 0,
                                           plan.total_table_entries, true});
            break;
        }

        compensate(dm, config.scheme, tolerance, max_iterations);
        state.upper = eq2_scheme(config.scheme)
                          ? upper_bound(dm, config.task)
                          : query(dm.graph(), task_mode, plan);

        Assignment decoded = decode_mpe(dm.graph(), plan);
        Assignment projected = dm.project(decoded);
        const double decoded_value = evaluate(dm.source(), projected);
        if (decoded_value > state.lower || state.incumbent.size() == 0) {
            state.lower = decoded_value;
            state.incumbent = projected;
        }
        state.violated = dm.violated_constraints(decoded);

        const bool certifiable = config.task == Task::MPE && eq2_scheme(config.scheme) &&
                                 state.violated.empty();
        if (certifiable) state.certified = true;

        result.trace.rounds.push_back({round, recovered_total, state.upper, state.lower,
                                       static_cast<int>(state.violated.size()),
                                       plan.total_table_entries, state.certified});
        if (state.certified) break;
        if (round >= config.max_rounds) break;

        std::vector<int> ranked = rank_constraints(dm, state, config);
        if (ranked.empty()) break;  // heuristic None: plain dual decomposition
        const int batch = std::min<int>(config.batch_size, static_cast<int>(ranked.size()));
        for (int i = 0; i < batch; ++i) dm.recover(ranked[static_cast<std::size_t>(i)]);
    }
    return result;
}

}  // namespace rcr
