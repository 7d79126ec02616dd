#include "rcr/exact.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

namespace rcr {
namespace {

constexpr std::size_t kMaxIntermediateEntries = std::size_t(1) << 28;

struct OrderResult {
    std::vector<int> order;
    long long total_entries = 0;
    std::size_t max_entries = 1;
};

// Greedy min-fill over the interaction graph of `factor_ids`, restricted to
// `vars`.  Variables in `keep` join clusters but are never eliminated.  Fill
// counts are updated incrementally: eliminating u only changes the fill of
// vars within two hops of u.
OrderResult min_fill_order(const FactorGraph& fg, std::span<const int> vars,
                           std::span<const int> factor_ids, std::span<const int> keep) {
    const int m = static_cast<int>(vars.size());
    std::vector<int> local(static_cast<std::size_t>(fg.num_variables()), -1);
    for (int i = 0; i < m; ++i) local[static_cast<std::size_t>(vars[i])] = i;

    std::vector<char> adj(static_cast<std::size_t>(m) * m, 0);
    auto at = [&](int a, int b) -> char& { return adj[static_cast<std::size_t>(a) * m + b]; };
    for (int fid : factor_ids) {
        const Factor& f = fg.factors[static_cast<std::size_t>(fid)];
        for (std::size_t i = 0; i < f.scope.size(); ++i)
            for (std::size_t j = i + 1; j < f.scope.size(); ++j) {
                int a = local[static_cast<std::size_t>(f.scope[i])];
                int b = local[static_cast<std::size_t>(f.scope[j])];
                at(a, b) = at(b, a) = 1;
            }
    }

    std::vector<char> eliminable(static_cast<std::size_t>(m), 1);
    for (int k : keep) eliminable[static_cast<std::size_t>(local[static_cast<std::size_t>(k)])] = 0;
    std::vector<char> done(static_cast<std::size_t>(m), 0);

    auto neighbors_of = [&](int i, std::vector<int>& out) {
        out.clear();
        const char* row = adj.data() + static_cast<std::size_t>(i) * m;
        for (int j = 0; j < m; ++j)
            if (row[j] && !done[static_cast<std::size_t>(j)]) out.push_back(j);
    };
    std::vector<int> nbrs, nbrs2;
    auto fill_of = [&](int i) {
        neighbors_of(i, nbrs2);
        long long fill = 0;
        for (std::size_t a = 0; a < nbrs2.size(); ++a)
            for (std::size_t b = a + 1; b < nbrs2.size(); ++b)
                if (!at(nbrs2[a], nbrs2[b])) ++fill;
        return fill;
    };

    std::vector<long long> fill(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < m; ++i)
        if (eliminable[static_cast<std::size_t>(i)]) fill[static_cast<std::size_t>(i)] = fill_of(i);

    int remaining = 0;
    for (int i = 0; i < m; ++i) remaining += eliminable[static_cast<std::size_t>(i)];

    OrderResult res;
    res.order.reserve(static_cast<std::size_t>(remaining));
    std::vector<char> affected(static_cast<std::size_t>(m), 0);
    std::vector<int> affected_list;

    for (int step = 0; step < remaining; ++step) {
        int best = -1;
        long long best_fill = std::numeric_limits<long long>::max();
        for (int i = 0; i < m; ++i) {
            if (done[static_cast<std::size_t>(i)] || !eliminable[static_cast<std::size_t>(i)])
                continue;
            if (fill[static_cast<std::size_t>(i)] < best_fill) {
                best_fill = fill[static_cast<std::size_t>(i)];
                best = i;
            }
        }

        neighbors_of(best, nbrs);
        std::size_t entries = static_cast<std::size_t>(fg.cardinality(vars[best]));
        for (int j : nbrs) entries *= static_cast<std::size_t>(fg.cardinality(vars[j]));
        res.total_entries += static_cast<long long>(entries);
        res.max_entries = std::max(res.max_entries, entries);

        // Fill changes are confined to the eliminated var's neighbors and the
        // common neighbors of each new edge's endpoints.
        affected_list.clear();
        auto mark = [&](int j) {
            if (!affected[static_cast<std::size_t>(j)]) {
                affected[static_cast<std::size_t>(j)] = 1;
                affected_list.push_back(j);
            }
        };
        for (int j : nbrs) mark(j);
        for (std::size_t a = 0; a < nbrs.size(); ++a)
            for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
                if (at(nbrs[a], nbrs[b])) continue;
                at(nbrs[a], nbrs[b]) = at(nbrs[b], nbrs[a]) = 1;
                const char* ra = adj.data() + static_cast<std::size_t>(nbrs[a]) * m;
                const char* rb = adj.data() + static_cast<std::size_t>(nbrs[b]) * m;
                for (int j = 0; j < m; ++j)
                    if (ra[j] && rb[j] && !done[static_cast<std::size_t>(j)]) mark(j);
            }

        done[static_cast<std::size_t>(best)] = 1;
        res.order.push_back(vars[best]);
        for (int j : affected_list) {
            affected[static_cast<std::size_t>(j)] = 0;
            if (!done[static_cast<std::size_t>(j)] && eliminable[static_cast<std::size_t>(j)])
                fill[static_cast<std::size_t>(j)] = fill_of(j);
        }
    }
    return res;
}

struct LiveFactor {
    std::vector<int> scope;
    const double* data = nullptr;
    std::vector<double> owned;
    bool consumed = false;
};

// Product table over `cluster` (row-major, last var fastest) of the given
// live factors.  Walks all joint states with an odometer, tracking one
// linear index per factor.
void build_product(const FactorGraph& fg, std::span<const LiveFactor* const> facs,
                   std::span<const int> cluster, std::vector<double>& out) {
    const int k = static_cast<int>(cluster.size());
    std::vector<int> cards(static_cast<std::size_t>(k));
    std::size_t total = 1;
    for (int p = 0; p < k; ++p) {
        cards[static_cast<std::size_t>(p)] = fg.cardinality(cluster[p]);
        total *= static_cast<std::size_t>(cards[static_cast<std::size_t>(p)]);
    }
    if (total > kMaxIntermediateEntries)
        throw unsupported_error("elimination table of " + std::to_string(total) +
                                " entries exceeds the safety limit");
    out.assign(total, 0.0);

    const int nf = static_cast<int>(facs.size());
    std::vector<std::size_t> stride(static_cast<std::size_t>(nf) * static_cast<std::size_t>(k), 0);
    std::vector<std::size_t> fidx(static_cast<std::size_t>(nf), 0);
    for (int f = 0; f < nf; ++f) {
        const std::vector<int>& scope = facs[static_cast<std::size_t>(f)]->scope;
        std::size_t s = 1;
        for (std::size_t i = scope.size(); i-- > 0;) {
            for (int p = 0; p < k; ++p)
                if (cluster[p] == scope[i])
                    stride[static_cast<std::size_t>(f) * k + static_cast<std::size_t>(p)] = s;
            s *= static_cast<std::size_t>(fg.cardinality(scope[i]));
        }
    }

    std::vector<int> digit(static_cast<std::size_t>(k), 0);
    for (std::size_t lin = 0;; ++lin) {
        double v = 0.0;
        for (int f = 0; f < nf; ++f) v += facs[static_cast<std::size_t>(f)]->data[fidx[static_cast<std::size_t>(f)]];
        out[lin] = v;
        int p = k - 1;
        while (p >= 0) {
            ++digit[static_cast<std::size_t>(p)];
            for (int f = 0; f < nf; ++f)
                fidx[static_cast<std::size_t>(f)] +=
                    stride[static_cast<std::size_t>(f) * k + static_cast<std::size_t>(p)];
            if (digit[static_cast<std::size_t>(p)] < cards[static_cast<std::size_t>(p)]) break;
            digit[static_cast<std::size_t>(p)] = 0;
            for (int f = 0; f < nf; ++f)
                fidx[static_cast<std::size_t>(f)] -=
                    stride[static_cast<std::size_t>(f) * k + static_cast<std::size_t>(p)] *
                    static_cast<std::size_t>(cards[static_cast<std::size_t>(p)]);
            --p;
        }
        if (p < 0) break;
    }
}

double combine(Semiring s, double a, double b) {
    return s == Semiring::MaxProduct ? log_max(a, b) : log_add(a, b);
}

void clamp_sentinels(std::vector<double>& t) {
    for (double& v : t)
        if (is_log_zero(v)) v = kLogZero;
}

// One elimination step's product table, kept for MPE backtracking.
struct DecodeRecord {
    int var;
    std::vector<int> cluster;  // eliminated var first, rest ascending
    std::vector<double> product;
};

// Eliminates `order` from the given factors; returns the table over `keep`
// (ascending layout; scalar when `keep` is empty).
std::vector<double> run_elimination(const FactorGraph& fg, Semiring s,
                                    std::span<const int> factor_ids, std::span<const int> order,
                                    std::span<const int> keep,
                                    std::vector<DecodeRecord>* decode = nullptr) {
    std::vector<LiveFactor> live;
    live.reserve(factor_ids.size() + order.size());
    std::vector<std::vector<int>> by_var(static_cast<std::size_t>(fg.num_variables()));
    auto attach = [&](int idx) {
        for (int v : live[static_cast<std::size_t>(idx)].scope)
            by_var[static_cast<std::size_t>(v)].push_back(idx);
    };
    for (int fid : factor_ids) {
        const Factor& f = fg.factors[static_cast<std::size_t>(fid)];
        live.push_back({f.scope, f.table.data(), {}, false});
        attach(static_cast<int>(live.size()) - 1);
    }

    std::vector<const LiveFactor*> gathered;
    std::vector<double> product;
    for (int v : order) {
        gathered.clear();
        std::vector<int> cluster{v};
        for (int idx : by_var[static_cast<std::size_t>(v)]) {
            LiveFactor& lf = live[static_cast<std::size_t>(idx)];
            if (lf.consumed) continue;
            lf.consumed = true;
            gathered.push_back(&lf);
            for (int u : lf.scope)
                if (u != v && std::find(cluster.begin(), cluster.end(), u) == cluster.end())
                    cluster.push_back(u);
        }
        std::sort(cluster.begin() + 1, cluster.end());

        build_product(fg, gathered, cluster, product);
        const std::size_t card_v = static_cast<std::size_t>(fg.cardinality(v));
        const std::size_t rest_n = product.size() / card_v;

        LiveFactor msg;
        msg.scope.assign(cluster.begin() + 1, cluster.end());
        msg.owned.assign(product.begin(), product.begin() + static_cast<std::ptrdiff_t>(rest_n));
        for (std::size_t b = 1; b < card_v; ++b) {
            const double* block = product.data() + b * rest_n;
            for (std::size_t j = 0; j < rest_n; ++j)
                msg.owned[j] = combine(s, msg.owned[j], block[j]);
        }
        clamp_sentinels(msg.owned);
        msg.data = msg.owned.data();

        if (decode) decode->push_back({v, std::move(cluster), std::move(product)});
        live.push_back(std::move(msg));
        attach(static_cast<int>(live.size()) - 1);
    }

    // Whatever is left has scope within `keep`; combine it into one table.
    gathered.clear();
    for (LiveFactor& lf : live)
        if (!lf.consumed) {
            for (int u : lf.scope)
                if (std::find(keep.begin(), keep.end(), u) == keep.end())
                    throw contract_error("elimination order does not cover all variables");
            gathered.push_back(&lf);
        }
    std::vector<int> keep_sorted(keep.begin(), keep.end());
    std::sort(keep_sorted.begin(), keep_sorted.end());
    std::vector<double> result;
    build_product(fg, gathered, keep_sorted, result);
    clamp_sentinels(result);
    return result;
}

std::vector<int> all_factor_ids(const FactorGraph& fg) {
    std::vector<int> ids(static_cast<std::size_t>(fg.num_factors()));
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

int ceil_log2(std::size_t entries) {
    int bits = 0;
    while ((std::size_t(1) << bits) < entries) ++bits;
    return bits;
}

}  // namespace

EliminationPlan make_plan(const FactorGraph& fg) {
    std::vector<int> vars(static_cast<std::size_t>(fg.num_variables()));
    std::iota(vars.begin(), vars.end(), 0);
    auto ids = all_factor_ids(fg);
    OrderResult r = min_fill_order(fg, vars, ids, {});
    EliminationPlan plan;
    plan.order = std::move(r.order);
    plan.total_table_entries = r.total_entries;
    plan.max_cluster_size = fg.num_variables() == 0 ? 0 : ceil_log2(r.max_entries);
    return plan;
}

double query(const FactorGraph& fg, Semiring s, const EliminationPlan& plan) {
    if (plan.order.size() != static_cast<std::size_t>(fg.num_variables()))
        throw contract_error("query: plan does not cover all variables");
    auto ids = all_factor_ids(fg);
    return run_elimination(fg, s, ids, plan.order, {})[0];
}

Components connected_components(const FactorGraph& fg) {
    const int n = fg.num_variables();
    Components c;
    c.comp_of_var.assign(static_cast<std::size_t>(n), -1);

    std::vector<std::vector<int>> var_factors(static_cast<std::size_t>(n));
    for (int fid = 0; fid < fg.num_factors(); ++fid) {
        const Factor& f = fg.factors[static_cast<std::size_t>(fid)];
        if (f.scope.empty()) {
            c.constant_factors.push_back(fid);
            continue;
        }
        for (int v : f.scope) var_factors[static_cast<std::size_t>(v)].push_back(fid);
    }

    std::vector<char> factor_seen(static_cast<std::size_t>(fg.num_factors()), 0);
    std::vector<int> stack;
    for (int v0 = 0; v0 < n; ++v0) {
        if (c.comp_of_var[static_cast<std::size_t>(v0)] >= 0) continue;
        int comp = c.count();
        c.vars.emplace_back();
        c.factors.emplace_back();
        stack.assign(1, v0);
        c.comp_of_var[static_cast<std::size_t>(v0)] = comp;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            c.vars[static_cast<std::size_t>(comp)].push_back(v);
            for (int fid : var_factors[static_cast<std::size_t>(v)]) {
                if (factor_seen[static_cast<std::size_t>(fid)]) continue;
                factor_seen[static_cast<std::size_t>(fid)] = 1;
                c.factors[static_cast<std::size_t>(comp)].push_back(fid);
                for (int u : fg.factors[static_cast<std::size_t>(fid)].scope) {
                    if (c.comp_of_var[static_cast<std::size_t>(u)] < 0) {
                        c.comp_of_var[static_cast<std::size_t>(u)] = comp;
                        stack.push_back(u);
                    }
                }
            }
        }
        std::sort(c.vars[static_cast<std::size_t>(comp)].begin(),
                  c.vars[static_cast<std::size_t>(comp)].end());
        std::sort(c.factors[static_cast<std::size_t>(comp)].begin(),
                  c.factors[static_cast<std::size_t>(comp)].end());
    }
    return c;
}

double subgraph_value(const FactorGraph& fg, Semiring s, std::span<const int> factor_ids,
                      std::span<const int> vars) {
    OrderResult r = min_fill_order(fg, vars, factor_ids, {});
    return run_elimination(fg, s, factor_ids, r.order, {})[0];
}

std::vector<double> subgraph_marginal(const FactorGraph& fg, Semiring s,
                                      std::span<const int> factor_ids, std::span<const int> vars,
                                      int keep) {
    const int keeps[1] = {keep};
    OrderResult r = min_fill_order(fg, vars, factor_ids, keeps);
    return run_elimination(fg, s, factor_ids, r.order, keeps);
}

std::vector<double> subgraph_pair_marginal(const FactorGraph& fg, Semiring s,
                                           std::span<const int> factor_ids,
                                           std::span<const int> vars, int keep_a, int keep_b) {
    const int keeps[2] = {keep_a, keep_b};
    OrderResult r = min_fill_order(fg, vars, factor_ids, keeps);
    std::vector<double> t = run_elimination(fg, s, factor_ids, r.order, keeps);
    if (keep_a < keep_b) return t;
    // Ascending layout back to [a][b].
    const std::size_t ca = static_cast<std::size_t>(fg.cardinality(keep_a));
    const std::size_t cb = static_cast<std::size_t>(fg.cardinality(keep_b));
    std::vector<double> out(t.size());
    for (std::size_t a = 0; a < ca; ++a)
        for (std::size_t b = 0; b < cb; ++b) out[a * cb + b] = t[b * ca + a];
    return out;
}

std::vector<double> eliminate_in_order(const FactorGraph& fg, Semiring s,
                                       std::span<const int> factor_ids,
                                       std::span<const int> order, std::span<const int> keep) {
    return run_elimination(fg, s, factor_ids, order, keep);
}

namespace {

std::vector<double> component_marginal(const FactorGraph& fg, Semiring s, const Components& comps,
                                       int var) {
    double rest = 0.0;
    for (int fid : comps.constant_factors)
        rest = log_mul(rest, fg.factors[static_cast<std::size_t>(fid)].table[0]);
    const int home = comps.comp_of_var[static_cast<std::size_t>(var)];
    for (int c = 0; c < comps.count(); ++c) {
        if (c == home) continue;
        rest = log_mul(rest, subgraph_value(fg, s, comps.factors[static_cast<std::size_t>(c)],
                                            comps.vars[static_cast<std::size_t>(c)]));
    }
    std::vector<double> t = subgraph_marginal(fg, s, comps.factors[static_cast<std::size_t>(home)],
                                              comps.vars[static_cast<std::size_t>(home)], var);
    for (double& v : t) v = log_mul(v, rest);
    return t;
}

}  // namespace

std::vector<double> marginal(const FactorGraph& fg, Semiring s, int var) {
    if (var < 0 || var >= fg.num_variables())
        throw contract_error("marginal: unknown variable " + std::to_string(var));
    Components comps = connected_components(fg);
    return component_marginal(fg, s, comps, var);
}

std::vector<double> pair_marginal(const FactorGraph& fg, Semiring s, int x, int y) {
    if (x == y) throw contract_error("pair_marginal: variables must differ");
    if (x < 0 || x >= fg.num_variables() || y < 0 || y >= fg.num_variables())
        throw contract_error("pair_marginal: unknown variable");
    Components comps = connected_components(fg);
    const int cx = comps.comp_of_var[static_cast<std::size_t>(x)];
    const int cy = comps.comp_of_var[static_cast<std::size_t>(y)];
    const std::size_t card_x = static_cast<std::size_t>(fg.cardinality(x));
    const std::size_t card_y = static_cast<std::size_t>(fg.cardinality(y));

    double rest = 0.0;
    for (int fid : comps.constant_factors)
        rest = log_mul(rest, fg.factors[static_cast<std::size_t>(fid)].table[0]);
    for (int c = 0; c < comps.count(); ++c) {
        if (c == cx || c == cy) continue;
        rest = log_mul(rest, subgraph_value(fg, s, comps.factors[static_cast<std::size_t>(c)],
                                            comps.vars[static_cast<std::size_t>(c)]));
    }

    std::vector<double> out;
    if (cx == cy) {
        out = subgraph_pair_marginal(fg, s, comps.factors[static_cast<std::size_t>(cx)],
                                     comps.vars[static_cast<std::size_t>(cx)], x, y);
        for (double& v : out) v = log_mul(v, rest);
    } else {
        auto tx = subgraph_marginal(fg, s, comps.factors[static_cast<std::size_t>(cx)],
                                    comps.vars[static_cast<std::size_t>(cx)], x);
        auto ty = subgraph_marginal(fg, s, comps.factors[static_cast<std::size_t>(cy)],
                                    comps.vars[static_cast<std::size_t>(cy)], y);
        out.resize(card_x * card_y);
        for (std::size_t a = 0; a < card_x; ++a)
            for (std::size_t b = 0; b < card_y; ++b)
                out[a * card_y + b] = log_mul(log_mul(tx[a], ty[b]), rest);
    }
    return out;
}

Assignment decode_mpe(const FactorGraph& fg, const EliminationPlan& plan) {
    if (plan.order.size() != static_cast<std::size_t>(fg.num_variables()))
        throw contract_error("decode_mpe: plan does not cover all variables");
    auto ids = all_factor_ids(fg);
    std::vector<DecodeRecord> records;
    records.reserve(plan.order.size());
    run_elimination(fg, Semiring::MaxProduct, ids, plan.order, {}, &records);

    Assignment a(std::vector<int>(static_cast<std::size_t>(fg.num_variables()), -1));
    for (std::size_t i = records.size(); i-- > 0;) {
        const DecodeRecord& rec = records[i];
        // Offset of the already-decoded rest states in the [var][rest] layout.
        std::size_t offset = 0;
        std::size_t rest_n = 1;
        for (std::size_t p = 1; p < rec.cluster.size(); ++p) {
            offset = offset * static_cast<std::size_t>(fg.cardinality(rec.cluster[p])) +
                     static_cast<std::size_t>(a[rec.cluster[p]]);
            rest_n *= static_cast<std::size_t>(fg.cardinality(rec.cluster[p]));
        }
        int best = 0;
        double best_v = rec.product[offset];
        for (int st = 1; st < fg.cardinality(rec.var); ++st) {
            double v = rec.product[static_cast<std::size_t>(st) * rest_n + offset];
            if (v > best_v) {
                best_v = v;
                best = st;
            }
        }
        a[rec.var] = best;
    }
    return a;
}

}  // namespace rcr
