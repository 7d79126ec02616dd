#include "rcr/compensate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rcr {
namespace {

Semiring scheme_semiring(Scheme s) {
    return s == Scheme::MpeDD ? Semiring::MaxProduct : Semiring::SumProduct;
}

// Marginal provider for the update equations.  The stateless variant queries
// the graph directly; the sweep variant caches per-component values so a
// 1000-sweep run does not re-eliminate untouched components.
struct MarginalSource {
    virtual ~MarginalSource() = default;
    virtual std::vector<double> marginal(int var) = 0;
    virtual std::vector<double> pair(int x, int y) = 0;  // [x][y] layout
    virtual bool same_component(int x, int y) = 0;
    virtual void invalidate(int var) {}
};

struct StatelessSource final : MarginalSource {
    const FactorGraph& g;
    Semiring mode;
    StatelessSource(const FactorGraph& g_, Semiring m) : g(g_), mode(m) {}
    std::vector<double> marginal(int var) override { return rcr::marginal(g, mode, var); }
    std::vector<double> pair(int x, int y) override { return rcr::pair_marginal(g, mode, x, y); }
    bool same_component(int x, int y) override {
        Components c = connected_components(g);
        return c.comp_of_var[static_cast<std::size_t>(x)] ==
               c.comp_of_var[static_cast<std::size_t>(y)];
    }
};

class SweepCache final : public MarginalSource {
public:
    SweepCache(const FactorGraph& g, Semiring mode) : g_(g), mode_(mode) {
        comps_ = connected_components(g);
        value_.assign(static_cast<std::size_t>(comps_.count()), 0.0);
        dirty_.assign(static_cast<std::size_t>(comps_.count()), 1);
        constants_ = 0.0;
        for (int fid : comps_.constant_factors)
            constants_ = log_mul(constants_, g_.factors[static_cast<std::size_t>(fid)].table[0]);
    }

    double total() {
        double t = constants_;
        for (int c = 0; c < comps_.count(); ++c) t = log_mul(t, value(c));
        return t;
    }

    std::vector<double> marginal(int var) override {
        const int home = comp_of(var);
        std::vector<double> t = keep_query(home, {&var, 1});
        const double r = rest(home, -1);
        for (double& v : t) v = log_mul(v, r);
        return t;
    }

    std::vector<double> pair(int x, int y) override {
        const int cx = comp_of(x), cy = comp_of(y);
        const std::size_t card_x = static_cast<std::size_t>(g_.cardinality(x));
        const std::size_t card_y = static_cast<std::size_t>(g_.cardinality(y));
        std::vector<double> out;
        if (cx == cy) {
            const int keeps[2] = {x, y};
            out = keep_query(cx, keeps);
            if (x > y) {  // ascending layout back to [x][y]
                std::vector<double> tr(out.size());
                for (std::size_t a = 0; a < card_x; ++a)
                    for (std::size_t b = 0; b < card_y; ++b)
                        tr[a * card_y + b] = out[b * card_x + a];
                out = std::move(tr);
            }
            const double r = rest(cx, -1);
            for (double& v : out) v = log_mul(v, r);
        } else {
            std::vector<double> tx = keep_query(cx, {&x, 1});
            std::vector<double> ty = keep_query(cy, {&y, 1});
            const double r = rest(cx, cy);
            out.resize(card_x * card_y);
            for (std::size_t a = 0; a < card_x; ++a)
                for (std::size_t b = 0; b < card_y; ++b)
                    out[a * card_y + b] = log_mul(log_mul(tx[a], ty[b]), r);
        }
        return out;
    }

    bool same_component(int x, int y) override { return comp_of(x) == comp_of(y); }

    void invalidate(int var) override { dirty_[static_cast<std::size_t>(comp_of(var))] = 1; }

private:
    int comp_of(int var) const { return comps_.comp_of_var[static_cast<std::size_t>(var)]; }

    double value(int c) {
        if (dirty_[static_cast<std::size_t>(c)]) {
            value_[static_cast<std::size_t>(c)] =
                subgraph_value(g_, mode_, comps_.factors[static_cast<std::size_t>(c)],
                               comps_.vars[static_cast<std::size_t>(c)]);
            dirty_[static_cast<std::size_t>(c)] = 0;
        }
        return value_[static_cast<std::size_t>(c)];
    }

    double rest(int excl_a, int excl_b) {
        double t = constants_;
        for (int c = 0; c < comps_.count(); ++c)
            if (c != excl_a && c != excl_b) t = log_mul(t, value(c));
        return t;
    }

    std::vector<double> keep_query(int c, std::span<const int> keeps) {
        if (keeps.size() == 1)
            return subgraph_marginal(g_, mode_, comps_.factors[static_cast<std::size_t>(c)],
                                     comps_.vars[static_cast<std::size_t>(c)], keeps[0]);
        return subgraph_pair_marginal(g_, mode_, comps_.factors[static_cast<std::size_t>(c)],
                                      comps_.vars[static_cast<std::size_t>(c)], keeps[0],
                                      keeps[1]);
    }

    const FactorGraph& g_;
    Semiring mode_;
    Components comps_;
    std::vector<double> value_;
    std::vector<char> dirty_;
    double constants_ = 0.0;
};

double entry_delta(double a, double b) {
    if (is_log_zero(a) && is_log_zero(b)) return 0.0;
    return std::abs(a - b);
}

double log_sum_exp(std::span<const double> t) {
    double m = kLogZero;
    for (double v : t) m = log_max(m, v);
    if (is_log_zero(m)) return kLogZero;
    double s = 0.0;
    for (double v : t)
        if (!is_log_zero(v)) s += std::exp(v - m);
    return m + std::log(s);
}

double apply_split(DecomposedModel& dm, int cid, MarginalSource& src) {
    const EquivalenceConstraint& c = dm.constraint(cid);
    auto t_orig = dm.theta_table(cid, 0);
    auto t_clone = dm.theta_table(cid, 1);
    const std::vector<double> zm_x = src.marginal(c.original);
    const std::vector<double> zm_xi = src.marginal(c.clone);
    const std::size_t card = t_orig.size();

    std::vector<double> new_orig(card), new_clone(card);
    for (std::size_t s = 0; s < card; ++s) {
        new_orig[s] = log_div(zm_xi[s], t_clone[s]);
        new_clone[s] = log_div(zm_x[s], t_orig[s]);
    }
    const double norm_orig = log_sum_exp(new_orig);
    const double norm_clone = log_sum_exp(new_clone);
    if (is_log_zero(norm_orig) || is_log_zero(norm_clone))
        throw unsupported_error("constraint " + std::to_string(cid) +
                                " is degenerate: zero marginal for every state");
    double delta = 0.0;
    for (std::size_t s = 0; s < card; ++s) {
        new_orig[s] = is_log_zero(new_orig[s]) ? kLogZero : new_orig[s] - norm_orig;
        new_clone[s] = is_log_zero(new_clone[s]) ? kLogZero : new_clone[s] - norm_clone;
        delta = std::max(delta, entry_delta(new_orig[s], t_orig[s]));
        delta = std::max(delta, entry_delta(new_clone[s], t_clone[s]));
        t_orig[s] = new_orig[s];
        t_clone[s] = new_clone[s];
    }
    src.invalidate(c.original);
    src.invalidate(c.clone);
    return delta;
}

double apply_dd_decoupled(DecomposedModel& dm, int cid, MarginalSource& src,
                          long long* skips) {
    const EquivalenceConstraint& c = dm.constraint(cid);
    auto t_orig = dm.theta_table(cid, 0);
    auto t_clone = dm.theta_table(cid, 1);
    const std::vector<double> zm_x = src.marginal(c.original);
    const std::vector<double> zm_xi = src.marginal(c.clone);
    const std::size_t card = t_orig.size();

    double delta = 0.0;
    for (std::size_t s = 0; s < card; ++s) {
        const double q_x = log_div(zm_x[s], t_orig[s]);
        const double q_xi = log_div(zm_xi[s], t_clone[s]);
        if (is_log_zero(q_x) || is_log_zero(q_xi)) {
            if (skips) ++*skips;
            continue;
        }
        const double t = 0.5 * (q_xi - q_x);
        delta = std::max(delta, std::abs(t - t_orig[s]));
        t_orig[s] = t;
        t_clone[s] = -t;
    }
    src.invalidate(c.original);
    src.invalidate(c.clone);
    return delta;
}

double apply_dd_binary(DecomposedModel& dm, int cid, MarginalSource& src, long long* skips) {
    const EquivalenceConstraint& c = dm.constraint(cid);
    if (dm.graph().cardinality(c.original) != 2)
        throw unsupported_error("constraint " + std::to_string(cid) + " joins variable " +
                                std::to_string(c.original) +
                                " of cardinality > 2; the coupled update is binary-only");
    auto t_orig = dm.theta_table(cid, 0);
    auto t_clone = dm.theta_table(cid, 1);
    const std::vector<double> p = src.pair(c.original, c.clone);  // [x][x_i]

    // Cross terms with the current theta divided out; state 1 plays x.
    const double a = p[1] - t_orig[0] - t_clone[1];  // (x=0, x_i=1)
    const double b = p[2] - t_orig[1] - t_clone[0];  // (x=1, x_i=0)
    if (is_log_zero(a) || is_log_zero(b)) {
        if (skips) ++*skips;
        return 0.0;
    }
    const double t = 0.5 * (a - b);
    double delta = std::max(entry_delta(0.0, t_orig[0]), std::abs(t - t_orig[1]));
    t_orig[0] = 0.0;
    t_orig[1] = t;
    t_clone[0] = 0.0;
    t_clone[1] = -t;
    src.invalidate(c.original);
    src.invalidate(c.clone);
    return delta;
}

void require_dd(Scheme scheme, const char* who) {
    if (scheme == Scheme::ModelSplit)
        throw contract_error(std::string(who) + ": scheme must be pr-dd or mpe-dd");
}

}  // namespace

void update_split_pair(DecomposedModel& dm, int constraint_id) {
    StatelessSource src(dm.graph(), Semiring::SumProduct);
    apply_split(dm, constraint_id, src);
}

void update_dd_decoupled(DecomposedModel& dm, int constraint_id, Scheme scheme) {
    require_dd(scheme, "update_dd_decoupled");
    const EquivalenceConstraint& c = dm.constraint(constraint_id);
    StatelessSource src(dm.graph(), scheme_semiring(scheme));
    if (src.same_component(c.original, c.clone))
        throw contract_error(
            "update_dd_decoupled: constraint " + std::to_string(constraint_id) +
            " couples its variables through the graph; use update_dd_binary");
    apply_dd_decoupled(dm, constraint_id, src, nullptr);
}

void update_dd_binary(DecomposedModel& dm, int constraint_id, Scheme scheme) {
    require_dd(scheme, "update_dd_binary");
    StatelessSource src(dm.graph(), scheme_semiring(scheme));
    apply_dd_binary(dm, constraint_id, src, nullptr);
}

ConvergenceReport compensate(DecomposedModel& dm, Scheme scheme, double tolerance,
                             int max_iterations) {
    std::vector<int> relaxed;
    for (const auto& c : dm.constraints())
        if (c.status == ConstraintStatus::Relaxed) relaxed.push_back(c.id);

    ConvergenceReport report;
    SweepCache cache(dm.graph(), scheme_semiring(scheme));
    if (relaxed.empty()) {
        report.converged = true;
        report.bound_trajectory.push_back(cache.total());
        return report;
    }

    for (int sweep = 1; sweep <= max_iterations; ++sweep) {
        double max_delta = 0.0;
        for (int cid : relaxed) {
            double d;
            if (scheme == Scheme::ModelSplit) {
                d = apply_split(dm, cid, cache);
            } else {
                const EquivalenceConstraint& c = dm.constraint(cid);
                if (cache.same_component(c.original, c.clone))
                    d = apply_dd_binary(dm, cid, cache, &report.zero_marginal_skips);
                else
                    d = apply_dd_decoupled(dm, cid, cache, &report.zero_marginal_skips);
            }
            max_delta = std::max(max_delta, d);
        }
        report.iterations = sweep;
        report.max_delta = max_delta;
        report.bound_trajectory.push_back(cache.total());
        if (max_delta <= tolerance) {
            report.converged = true;
            break;
        }
    }
    return report;
}

double upper_bound(const DecomposedModel& dm, Task task) {
    for (const auto& c : dm.constraints()) {
        if (c.status != ConstraintStatus::Relaxed) continue;
        auto t_orig = dm.theta_table(c.id, 0);
        auto t_clone = dm.theta_table(c.id, 1);
        for (std::size_t s = 0; s < t_orig.size(); ++s)
            if (std::abs(t_orig[s] + t_clone[s]) > 1e-9)
                throw contract_error(
                    "upper_bound: compensation pair of constraint " + std::to_string(c.id) +
                    " violates theta(x)*theta(x_i)=1; the bound guarantee does not apply");
    }
    EliminationPlan plan = make_plan(dm.graph());
    return query(dm.graph(), task == Task::MPE ? Semiring::MaxProduct : Semiring::SumProduct,
                 plan);
}

double dual_objective_closed_form(const DecomposedModel& dm) {
    for (const auto& c : dm.constraints())
        if (c.status != ConstraintStatus::Relaxed)
            throw contract_error(
                "dual_objective_closed_form: model is not fully decomposed (constraint " +
                std::to_string(c.id) + " is recovered)");

    const FactorGraph& g = dm.graph();
    const int n_source = dm.source().num_variables();

    // Per-variable accumulators: unary potentials plus original-side thetas.
    std::vector<std::vector<double>> var_term(static_cast<std::size_t>(n_source));
    for (int v = 0; v < n_source; ++v)
        var_term[static_cast<std::size_t>(v)].assign(
            static_cast<std::size_t>(g.cardinality(v)), 0.0);

    // Clone -> its clone-side theta table, folded into the factor terms below.
    std::vector<const std::vector<double>*> clone_theta(
        static_cast<std::size_t>(g.num_variables()), nullptr);
    for (const auto& c : dm.constraints())
        clone_theta[static_cast<std::size_t>(c.clone)] =
            &g.factors[static_cast<std::size_t>(c.theta_clone_factor)].table;

    double total = 0.0;
    for (const Factor& f : g.factors) {
        if (f.kind == FactorKind::Compensation) {
            if (f.side == 0) {
                auto& acc = var_term[static_cast<std::size_t>(f.scope[0])];
                for (std::size_t s = 0; s < acc.size(); ++s)
                    acc[s] = log_mul(acc[s], f.table[s]);
            }
            continue;  // clone-side tables are folded into their factor term
        }
        if (f.arity() == 0) {
            total = log_mul(total, f.table[0]);
            continue;
        }
        if (f.arity() == 1 && f.scope[0] < n_source) {
            auto& acc = var_term[static_cast<std::size_t>(f.scope[0])];
            for (std::size_t s = 0; s < acc.size(); ++s)
                acc[s] = log_mul(acc[s], f.table[s]);
            continue;
        }
        // Factor term: max over joint states of psi plus the clone thetas.
        std::vector<int> digit(f.scope.size(), 0);
        double best = kLogZero;
        std::size_t idx = 0;
        for (;;) {
            double v = f.table[idx];
            for (std::size_t p = 0; p < f.scope.size(); ++p) {
                const auto* th = clone_theta[static_cast<std::size_t>(f.scope[p])];
                if (th) v = log_mul(v, (*th)[static_cast<std::size_t>(digit[p])]);
            }
            best = log_max(best, v);
            ++idx;
            int p = static_cast<int>(f.scope.size()) - 1;
            while (p >= 0) {
                if (++digit[static_cast<std::size_t>(p)] < g.cardinality(f.scope[static_cast<std::size_t>(p)])) break;
                digit[static_cast<std::size_t>(p)] = 0;
                --p;
            }
            if (p < 0) break;
        }
        total = log_mul(total, best);
    }

    for (int v = 0; v < n_source; ++v) {
        double best = kLogZero;
        for (double t : var_term[static_cast<std::size_t>(v)]) best = log_max(best, t);
        total = log_mul(total, best);
    }
    return total;
}

}  // namespace rcr
