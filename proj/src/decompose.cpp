#include "rcr/decompose.hpp"

#include <algorithm>
#include <string>

namespace rcr {

const EquivalenceConstraint& DecomposedModel::constraint(int id) const {
    if (id < 0 || id >= static_cast<int>(constraints_.size()))
        throw contract_error("unknown constraint id " + std::to_string(id));
    return constraints_[static_cast<std::size_t>(id)];
}

int DecomposedModel::relaxed_count() const {
    int n = 0;
    for (const auto& c : constraints_) n += (c.status == ConstraintStatus::Relaxed);
    return n;
}

CompensationPair DecomposedModel::theta(int constraint_id) const {
    const EquivalenceConstraint& c = constraint(constraint_id);
    if (c.status != ConstraintStatus::Relaxed)
        throw contract_error("constraint " + std::to_string(constraint_id) +
                             " is recovered and has no compensation pair");
    return {graph_.factors[static_cast<std::size_t>(c.theta_original_factor)].table,
            graph_.factors[static_cast<std::size_t>(c.theta_clone_factor)].table};
}

std::span<double> DecomposedModel::theta_table(int constraint_id, int side) {
    const EquivalenceConstraint& c = constraint(constraint_id);
    if (c.status != ConstraintStatus::Relaxed)
        throw contract_error("constraint " + std::to_string(constraint_id) +
                             " is recovered and has no compensation pair");
    int fid = side == 0 ? c.theta_original_factor : c.theta_clone_factor;
    return graph_.factors[static_cast<std::size_t>(fid)].table;
}

std::span<const double> DecomposedModel::theta_table(int constraint_id, int side) const {
    return const_cast<DecomposedModel*>(this)->theta_table(constraint_id, side);
}

void DecomposedModel::set_theta(int constraint_id, const CompensationPair& pair) {
    const EquivalenceConstraint& c = constraint(constraint_id);
    if (c.status != ConstraintStatus::Relaxed)
        throw contract_error("cannot set theta on recovered constraint " +
                             std::to_string(constraint_id));
    std::size_t card = static_cast<std::size_t>(graph_.cardinality(c.original));
    if (pair.on_original.size() != card || pair.on_clone.size() != card)
        throw contract_error("theta table size does not match variable cardinality");
    graph_.factors[static_cast<std::size_t>(c.theta_original_factor)].table = pair.on_original;
    graph_.factors[static_cast<std::size_t>(c.theta_clone_factor)].table = pair.on_clone;
}

void DecomposedModel::recover(int constraint_id) {
    EquivalenceConstraint& c = constraints_[static_cast<std::size_t>(constraint(constraint_id).id)];
    if (c.status != ConstraintStatus::Relaxed)
        throw contract_error("constraint " + std::to_string(constraint_id) +
                             " is already recovered");

    const int clone = c.clone;
    // The clone occurrence goes back to the original variable.
    for (int& v : graph_.factors[static_cast<std::size_t>(c.factor)].scope)
        if (v == clone) v = c.original;

    // Drop both compensation factors, compacting factor ids.
    std::vector<int> factor_map(graph_.factors.size());
    {
        std::vector<Factor> kept;
        kept.reserve(graph_.factors.size() - 2);
        for (std::size_t i = 0; i < graph_.factors.size(); ++i) {
            int fi = static_cast<int>(i);
            if (fi == c.theta_original_factor || fi == c.theta_clone_factor) {
                factor_map[i] = -1;
                continue;
            }
            factor_map[i] = static_cast<int>(kept.size());
            Factor f = std::move(graph_.factors[i]);
            f.id = factor_map[i];
            kept.push_back(std::move(f));
        }
        graph_.factors = std::move(kept);
    }

    // Drop the clone variable, shifting every id above it down by one.
    graph_.variables.erase(graph_.variables.begin() + clone);
    for (std::size_t i = 0; i < graph_.variables.size(); ++i) {
        Variable& v = graph_.variables[i];
        v.id = static_cast<int>(i);
        if (v.origin_factor >= 0) v.origin_factor = factor_map[static_cast<std::size_t>(v.origin_factor)];
    }
    for (Factor& f : graph_.factors)
        for (int& v : f.scope)
            if (v > clone) --v;

    for (EquivalenceConstraint& k : constraints_) {
        if (k.factor >= 0) k.factor = factor_map[static_cast<std::size_t>(k.factor)];
        if (k.status != ConstraintStatus::Relaxed) continue;
        if (k.id == c.id) continue;
        k.theta_original_factor = factor_map[static_cast<std::size_t>(k.theta_original_factor)];
        k.theta_clone_factor = factor_map[static_cast<std::size_t>(k.theta_clone_factor)];
        if (k.clone > clone) --k.clone;
    }

    c.status = ConstraintStatus::Recovered;
    c.clone = -1;
    c.theta_original_factor = -1;
    c.theta_clone_factor = -1;
}

std::vector<int> DecomposedModel::violated_constraints(const Assignment& a) const {
    if (a.size() != static_cast<std::size_t>(graph_.num_variables()))
        throw contract_error("violated_constraints: assignment does not cover the graph");
    std::vector<int> out;
    for (const EquivalenceConstraint& c : constraints_)
        if (c.status == ConstraintStatus::Relaxed && a[c.original] != a[c.clone])
            out.push_back(c.id);
    return out;
}

Assignment DecomposedModel::project(const Assignment& a) const {
    if (a.size() != static_cast<std::size_t>(graph_.num_variables()))
        throw contract_error("project: assignment does not cover the graph");
    Assignment out;
    out.values.assign(a.values.begin(),
                      a.values.begin() + source_.num_variables());
    return out;
}

DecomposedModel fully_decompose(const FactorGraph& fg) {
    fg.validate();
    DecomposedModel dm;
    dm.source_ = fg;
    dm.graph_ = fg;

    const int num_potentials = fg.num_factors();
    for (int fid = 0; fid < num_potentials; ++fid) {
        Factor& f = dm.graph_.factors[static_cast<std::size_t>(fid)];
        if (f.kind != FactorKind::Potential || f.arity() < 2) continue;
        for (std::size_t pos = 0; pos < f.scope.size(); ++pos) {
            const int original = f.scope[pos];
            const int clone = dm.graph_.num_variables();
            dm.graph_.variables.push_back(
                {clone, dm.graph_.cardinality(original), original, fid});
            f.scope[pos] = clone;

            EquivalenceConstraint c;
            c.id = static_cast<int>(dm.constraints_.size());
            c.original = original;
            c.clone = clone;
            c.factor = fid;
            c.status = ConstraintStatus::Relaxed;

            const std::size_t card = static_cast<std::size_t>(dm.graph_.cardinality(original));
            Factor on_original;
            on_original.id = dm.graph_.num_factors();
            on_original.scope = {original};
            on_original.table.assign(card, 0.0);
            on_original.kind = FactorKind::Compensation;
            on_original.constraint = c.id;
            on_original.side = 0;
            c.theta_original_factor = on_original.id;
            dm.graph_.factors.push_back(std::move(on_original));

            Factor on_clone;
            on_clone.id = dm.graph_.num_factors();
            on_clone.scope = {clone};
            on_clone.table.assign(card, 0.0);
            on_clone.kind = FactorKind::Compensation;
            on_clone.constraint = c.id;
            on_clone.side = 1;
            c.theta_clone_factor = on_clone.id;
            dm.graph_.factors.push_back(std::move(on_clone));

            dm.constraints_.push_back(c);
        }
    }
    return dm;
}

}  // namespace rcr
