#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rcr/model.hpp"
#include "rcr/recover.hpp"

namespace rcr {

/// Binary Ising-style lattice with mixed attractive and repulsive couplings.
/// Unary log-potentials are drawn uniformly from [-u, u], edge couplings from
/// [-w, w].  Fully determined by the seed.
struct GridSpec {
    int rows = 10;
    int cols = 10;
    double unary_strength = 1.0;    // u
    double coupling_strength = 1.0; // w
    std::uint64_t seed = 1;
};

FactorGraph generate_grid(const GridSpec& spec);

/// Bounded-treewidth chain of overlapping cliques over binary variables;
/// consecutive cliques share one variable.
struct ChainSpec {
    int num_vars = 201;
    int max_clique = 4;
    double unary_strength = 1.0;
    double table_strength = 1.0;
    std::uint64_t seed = 1;
};

FactorGraph generate_chain(const ChainSpec& spec);

struct ExperimentRow {
    std::uint64_t seed = 0;
    int rows = 0;
    int cols = 0;
    int recovered = 0;
    int total_constraints = 0;
    bool certified = false;
    long long base_plan_entries = 0;   // fully decomposed compensated model
    long long final_plan_entries = 0;  // compensated model at termination
    double cost_increase_pct = 0.0;    // (final / base - 1) * 100
    double upper_log = 0.0;
    double lower_log = 0.0;
    int rounds = 0;
    double wall_seconds = 0.0;
};

struct ExperimentTable {
    std::vector<ExperimentRow> rows;
    /// Header plus one row per instance.  Wall time is the only
    /// non-reproducible column; drop it for byte-identical output.
    std::string to_csv(bool include_times = true) const;
    /// Aggregate distribution of constraints recovered at certification,
    /// bucketed the way the grid study reports it.
    std::string bucket_report() const;
};

ExperimentTable run_experiment(std::span<const GridSpec> specs, const RecoveryConfig& config,
                               double tolerance = 1e-8, int max_iterations = 1000);

}  // namespace rcr
