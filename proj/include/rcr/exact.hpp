#pragma once

#include <span>
#include <vector>

#include "rcr/model.hpp"

namespace rcr {

/// Combination rule for elimination: log-sum-exp (partition function) or
/// max (MPE).  Factor multiplication is addition in log domain either way.
enum class Semiring { SumProduct, MaxProduct };

/// Min-fill elimination order plus its simulated cost.  total_table_entries
/// is the sum over elimination steps of the intermediate table sizes and is
/// the inference-cost proxy used throughout; max_cluster_size is the log2 of
/// the largest such table, rounded up.
struct EliminationPlan {
    std::vector<int> order;
    int max_cluster_size = 0;
    long long total_table_entries = 0;
};

/// Greedy min-fill order; ties broken by lowest variable id.
EliminationPlan make_plan(const FactorGraph& fg);

/// log Z (SumProduct) or log MPE value (MaxProduct).
double query(const FactorGraph& fg, Semiring s, const EliminationPlan& plan);

/// Per-state log marginal of one variable: Z(x) or mpe(x).
std::vector<double> marginal(const FactorGraph& fg, Semiring s, int var);

/// Joint per-state-pair log marginal, row-major with x as the slow index.
std::vector<double> pair_marginal(const FactorGraph& fg, Semiring s, int x, int y);

/// Backtracking over max-product elimination.  The returned assignment
/// evaluates to the MaxProduct query value; ties resolve to the lowest
/// state index.
Assignment decode_mpe(const FactorGraph& fg, const EliminationPlan& plan);

/// Connected components of the variable/factor graph.  Factors with empty
/// scope are collected separately.
struct Components {
    std::vector<int> comp_of_var;             // component index per variable
    std::vector<std::vector<int>> vars;       // variable ids per component
    std::vector<std::vector<int>> factors;    // factor ids per component
    std::vector<int> constant_factors;        // factors with empty scope
    int count() const { return static_cast<int>(vars.size()); }
};
Components connected_components(const FactorGraph& fg);

// Restricted queries over an explicit factor subset.  `vars` must cover every
// scope variable of the listed factors; variables not kept are eliminated.
// These back the component-level caching done by the compensation sweep.
double subgraph_value(const FactorGraph& fg, Semiring s, std::span<const int> factor_ids,
                      std::span<const int> vars);
std::vector<double> subgraph_marginal(const FactorGraph& fg, Semiring s,
                                      std::span<const int> factor_ids, std::span<const int> vars,
                                      int keep);
std::vector<double> subgraph_pair_marginal(const FactorGraph& fg, Semiring s,
                                           std::span<const int> factor_ids,
                                           std::span<const int> vars, int keep_a, int keep_b);

// Eliminates exactly `order` from the given factors and returns the table
// over `keep` in ascending-variable layout (scalar when `keep` is empty).
// Lets a caller reuse one precomputed order across many queries.
std::vector<double> eliminate_in_order(const FactorGraph& fg, Semiring s,
                                       std::span<const int> factor_ids,
                                       std::span<const int> order, std::span<const int> keep);

}  // namespace rcr
