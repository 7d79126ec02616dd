#include "rcr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "rcr/decompose.hpp"
#include "rcr/exact.hpp"

namespace rcr {
namespace {

// Uniform double in [lo, hi) from the top 53 bits of the generator output;
// identical across platforms and standard-library versions.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

}  // namespace

FactorGraph generate_grid(const GridSpec& spec) {
    if (spec.rows < 2 || spec.cols < 2)
        throw contract_error("generate_grid: rows and cols must be >= 2");
    std::mt19937_64 rng(spec.seed);
    FactorGraph fg;
    const int n = spec.rows * spec.cols;
    for (int v = 0; v < n; ++v) fg.variables.push_back({v, 2, -1, -1});

    auto node = [&](int r, int c) { return r * spec.cols + c; };
    for (int v = 0; v < n; ++v) {
        Factor f;
        f.id = fg.num_factors();
        f.scope = {v};
        f.table = {uniform(rng, -spec.unary_strength, spec.unary_strength),
                   uniform(rng, -spec.unary_strength, spec.unary_strength)};
        fg.factors.push_back(std::move(f));
    }
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) {
            // right then down, row-major, so the edge order is canonical
            for (int dir = 0; dir < 2; ++dir) {
                const int r2 = r + dir, c2 = c + 1 - dir;
                if (r2 >= spec.rows || c2 >= spec.cols) continue;
                const double w =
                    uniform(rng, -spec.coupling_strength, spec.coupling_strength);
                Factor f;
                f.id = fg.num_factors();
                f.scope = {node(r, c), node(r2, c2)};
                f.table = {w, -w, -w, w};
                fg.factors.push_back(std::move(f));
            }
        }
    return fg;
}

FactorGraph generate_chain(const ChainSpec& spec) {
    if (spec.num_vars < 2) throw contract_error("generate_chain: need at least 2 variables");
    if (spec.max_clique < 2) throw contract_error("generate_chain: max_clique must be >= 2");
    std::mt19937_64 rng(spec.seed);
    FactorGraph fg;
    for (int v = 0; v < spec.num_vars; ++v) fg.variables.push_back({v, 2, -1, -1});

    for (int v = 0; v < spec.num_vars; ++v) {
        Factor f;
        f.id = fg.num_factors();
        f.scope = {v};
        f.table = {uniform(rng, -spec.unary_strength, spec.unary_strength),
                   uniform(rng, -spec.unary_strength, spec.unary_strength)};
        fg.factors.push_back(std::move(f));
    }

    int start = 0;  // cliques overlap in their boundary variable
    while (start < spec.num_vars - 1) {
        const int max_size =
            std::min<int>(spec.max_clique, spec.num_vars - start);
        const int size =
            2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_size - 1));
        Factor f;
        f.id = fg.num_factors();
        for (int k = 0; k < size; ++k) f.scope.push_back(start + k);
        f.table.resize(std::size_t(1) << size);
        for (double& t : f.table) t = uniform(rng, -spec.table_strength, spec.table_strength);
        fg.factors.push_back(std::move(f));
        start += size - 1;
    }
    return fg;
}

ExperimentTable run_experiment(std::span<const GridSpec> specs, const RecoveryConfig& config,
                               double tolerance, int max_iterations) {
    ExperimentTable table;
    for (const GridSpec& spec : specs) {
        const auto t0 = std::chrono::steady_clock::now();
        FactorGraph fg = generate_grid(spec);
        DecomposedModel base = fully_decompose(fg);
        const long long base_entries = make_plan(base.graph()).total_table_entries;

        SolveResult solved = rcr_solve(fg, config, tolerance, max_iterations);
        const auto t1 = std::chrono::steady_clock::now();

        ExperimentRow row;
        row.seed = spec.seed;
        row.rows = spec.rows;
        row.cols = spec.cols;
        row.total_constraints = static_cast<int>(base.constraints().size());
        row.certified = solved.state.certified;
        row.upper_log = solved.state.upper;
        row.lower_log = solved.state.lower;
        row.base_plan_entries = base_entries;
        if (!solved.trace.rounds.empty()) {
            const TraceRecord& last = solved.trace.rounds.back();
            row.recovered = last.recovered_total;
            row.final_plan_entries = last.plan_total_table_entries;
            row.rounds = static_cast<int>(solved.trace.rounds.size());
        } else {
            row.final_plan_entries = base_entries;
        }
        row.cost_increase_pct =
            (static_cast<double>(row.final_plan_entries) / static_cast<double>(base_entries) -
             1.0) *
            100.0;
        row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        table.rows.push_back(row);
    }
    return table;
}

std::string ExperimentTable::to_csv(bool include_times) const {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "seed,rows,cols,recovered,total_constraints,certified,base_plan_entries,"
           "final_plan_entries,cost_increase_pct,upper_log,lower_log,rounds";
    if (include_times) out << ",wall_seconds";
    out << '\n';
    for (const ExperimentRow& r : rows) {
        out << r.seed << ',' << r.rows << ',' << r.cols << ',' << r.recovered << ','
            << r.total_constraints << ',' << (r.certified ? 1 : 0) << ',' << r.base_plan_entries
            << ',' << r.final_plan_entries << ',' << r.cost_increase_pct << ',' << r.upper_log
            << ',' << r.lower_log << ',' << r.rounds;
        if (include_times) out << ',' << r.wall_seconds;
        out << '\n';
    }
    return out.str();
}

std::string ExperimentTable::bucket_report() const {
    std::ostringstream out;
    if (rows.empty()) {
        out << "no instances\n";
        return out.str();
    }
    const int total = rows.front().total_constraints;
    // Inclusive upper bounds per bucket: 0-90 and then steps of 30 on the
    // 360-constraint grid; scaled proportionally for other totals.
    const int base_upper[] = {90, 120, 150, 180, 210, 240, 270, 300, 330, 360};
    std::vector<int> upper;
    for (int e : base_upper)
        upper.push_back(static_cast<int>(std::llround(static_cast<double>(e) * total / 360.0)));

    const std::size_t nb = upper.size();
    std::vector<int> count(nb, 0);
    std::vector<double> cost(nb, 0.0);
    int uncertified = 0;
    for (const ExperimentRow& r : rows) {
        if (!r.certified) {
            ++uncertified;
            continue;
        }
        for (std::size_t b = 0; b < nb; ++b) {
            if (r.recovered <= upper[b]) {
                ++count[b];
                cost[b] += r.cost_increase_pct;
                break;
            }
        }
    }

    const double denom = static_cast<double>(rows.size());
    out << std::fixed << std::setprecision(2);
    out << "constraints recovered | % instances | avg % increase in cost proxy\n";
    for (std::size_t b = 0; b < nb; ++b) {
        const int lo = b == 0 ? 0 : upper[b - 1] + 1;
        out << lo << "-" << upper[b] << " | " << 100.0 * count[b] / denom << "% | ";
        if (count[b] == 0)
            out << "-\n";
        else
            out << cost[b] / count[b] << "%\n";
    }
    if (uncertified > 0) out << "uncertified: " << 100.0 * uncertified / denom << "%\n";
    return out.str();
}

}  // namespace rcr
