#include "espkit/decomposition.hpp"

#include <algorithm>
#include <cmath>

#include "espkit/offline.hpp"
#include "espkit/online.hpp"

namespace espkit {

namespace {

double positive(double v) { return std::max(0.0, v); }

struct TruncationSplit {
    Decomposition kept;
    std::vector<std::pair<int, double>> covered;  // (demand_slot, amount served by stock)
};

TruncationSplit truncate_split(const Decomposition& decomp, double level0,
                               const StorageSpec& spec) {
    TruncationSplit out;
    double budget = level0 / spec.discharge_eff;
    const double eps = 1e-12 * std::max(1.0, budget);
    for (const auto& atom : decomp.atoms) {
        if (budget >= atom.amount - eps) {
            out.covered.emplace_back(atom.demand_slot, atom.amount);
            budget -= atom.amount;
        } else if (budget > eps) {
            out.covered.emplace_back(atom.demand_slot, budget);
            OneShotDemand rest = atom;
            rest.amount = atom.amount - budget;
            out.kept.atoms.push_back(rest);
            budget = 0.0;
        } else {
            out.kept.atoms.push_back(atom);
        }
    }
    return out;
}

}  // namespace

std::vector<double> accumulate_demand(const std::vector<double>& demand) {
    std::vector<double> acc(demand.size() + 1, 0.0);
    for (std::size_t i = 0; i < demand.size(); ++i) acc[i + 1] = acc[i] + demand[i];
    return acc;
}

Decomposition one_shot_decompose(const std::vector<double>& demand, const StorageSpec& spec) {
    spec.validate();
    const int horizon = static_cast<int>(demand.size());
    const double block = spec.capacity / spec.discharge_eff;
    double total = 0.0;
    for (double a : demand) {
        if (a < 0.0) throw std::invalid_argument("one_shot_decompose: negative demand");
        total += a;
    }
    const double eps = 1e-12 * std::max(1.0, std::max(total, block));

    Decomposition out;
    std::vector<double> eq15;          // per atom: amount of atom i plus its overlap set
    std::vector<double> bucket(static_cast<std::size_t>(horizon) + 1, 0.0);  // held amounts by demand slot
    int last_start = 1;

    for (int t = 1; t <= horizon; ++t) {
        double rest = demand[static_cast<std::size_t>(t - 1)];
        while (rest > eps) {
            // Suffix sums of held (non-spot) atom amounts: used[ts] = how much
            // the storage already carries across [ts, t].
            std::vector<double> used(static_cast<std::size_t>(t) + 2, 0.0);
            for (int ts = t; ts >= 1; --ts)
                used[static_cast<std::size_t>(ts)] =
                    used[static_cast<std::size_t>(ts) + 1] + bucket[static_cast<std::size_t>(ts)];

            // Earlier atoms with this same demand slot also absorb the new
            // atom into their capacity bound.
            double sibling_cap = block;
            for (std::size_t k = 0; k < out.atoms.size(); ++k) {
                const auto& a = out.atoms[k];
                if (a.start_slot < a.demand_slot && a.demand_slot == t)
                    sibling_cap = std::min(sibling_cap, block - eq15[k]);
            }

            bool placed = false;
            for (int ts = last_start; ts < t; ++ts) {
                const double cap =
                    std::min(block - used[static_cast<std::size_t>(ts)], sibling_cap);
                if (cap > eps) {
                    const double mass = std::min(rest, cap);
                    out.atoms.push_back({ts, t, mass});
                    eq15.push_back(used[static_cast<std::size_t>(ts)] + mass);
                    for (std::size_t k = 0; k + 1 < out.atoms.size(); ++k) {
                        const auto& a = out.atoms[k];
                        if (a.start_slot < a.demand_slot && a.demand_slot == t) eq15[k] += mass;
                    }
                    bucket[static_cast<std::size_t>(t)] += mass;
                    last_start = ts;
                    rest -= mass;
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                out.atoms.push_back({t, t, rest});
                eq15.push_back(rest);
                last_start = t;
                rest = 0.0;
            }
        }
    }
    return out;
}

Decomposition truncate(const Decomposition& decomp, double level0, const StorageSpec& spec) {
    spec.validate();
    if (level0 < 0.0 || level0 > spec.capacity + 1e-12 * std::max(1.0, spec.capacity))
        throw std::invalid_argument("truncate: initial level outside [0, capacity]");
    return truncate_split(decomp, level0, spec).kept;
}

Schedule run_decomposed_offline(const Trace& trace, const StorageSpec& spec) {
    trace.validate();
    spec.validate();
    const int horizon = trace.horizon();

    std::vector<double> demand(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) demand[static_cast<std::size_t>(t - 1)] = trace.at(t).demand;
    const TruncationSplit split =
        truncate_split(one_shot_decompose(demand, spec), spec.level_start, spec);

    std::vector<double> renew_left(static_cast<std::size_t>(horizon));
    std::vector<double> charge_left(static_cast<std::size_t>(horizon), spec.charge_rate);
    std::vector<double> discharge_left(static_cast<std::size_t>(horizon), spec.discharge_rate);
    for (int t = 1; t <= horizon; ++t)
        renew_left[static_cast<std::size_t>(t - 1)] = trace.at(t).renewable;

    std::vector<Decision> total(static_cast<std::size_t>(horizon));
    double legacy = spec.level_start;
    for (const auto& [slot, amount] : split.covered) {
        const std::size_t i = static_cast<std::size_t>(slot - 1);
        const double d =
            std::min({amount, discharge_left[i], legacy / spec.discharge_eff});
        total[i].discharge += d;
        total[i].grid_serve += amount - d;
        discharge_left[i] -= d;
        legacy -= spec.discharge_eff * d;
    }

    for (const auto& atom : split.kept.atoms) {
        const int len = atom.demand_slot - atom.start_slot + 1;
        WindowProblem prob;
        prob.level_init = 0.0;
        prob.slots.resize(static_cast<std::size_t>(len));
        prob.charge_cap_override.resize(static_cast<std::size_t>(len));
        prob.discharge_cap_override.resize(static_cast<std::size_t>(len));
        for (int k = 0; k < len; ++k) {
            const int slot = atom.start_slot + k;
            const std::size_t i = static_cast<std::size_t>(slot - 1);
            prob.slots[static_cast<std::size_t>(k)] = {
                slot == atom.demand_slot ? atom.amount : 0.0, trace.at(slot).price,
                renew_left[i]};
            prob.charge_cap_override[static_cast<std::size_t>(k)] = charge_left[i];
            prob.discharge_cap_override[static_cast<std::size_t>(k)] = discharge_left[i];
        }
        StorageSpec atom_spec = spec;
        atom_spec.capacity = std::min(spec.capacity, spec.discharge_eff * atom.amount);
        atom_spec.level_start = 0.0;
        atom_spec.level_end = 0.0;
        const Schedule frag = solve_window(prob, atom_spec);
        for (int k = 0; k < len; ++k) {
            const int slot = atom.start_slot + k;
            const std::size_t i = static_cast<std::size_t>(slot - 1);
            const Decision& dec = frag.decisions[static_cast<std::size_t>(k)];
            total[i].discharge += dec.discharge;
            total[i].renew_charge += dec.renew_charge;
            total[i].grid_serve += dec.grid_serve;
            total[i].grid_charge += dec.grid_charge;
            renew_left[i] = positive(renew_left[i] - dec.renew_charge);
            charge_left[i] = positive(charge_left[i] - dec.renew_charge - dec.grid_charge);
            discharge_left[i] = positive(discharge_left[i] - dec.discharge);
        }
    }

    Schedule out;
    out.decisions = std::move(total);
    out.level.resize(static_cast<std::size_t>(horizon) + 1);
    out.level[0] = spec.level_start;
    for (int t = 1; t <= horizon; ++t)
        out.level[static_cast<std::size_t>(t)] = step_state(
            out.level[static_cast<std::size_t>(t - 1)],
            out.decisions[static_cast<std::size_t>(t - 1)], spec);

    const double tol = 1e-9 * std::max(1.0, spec.capacity);
    double gap = spec.level_end - out.level[static_cast<std::size_t>(horizon)];
    if (gap > tol) {
        const std::size_t last = static_cast<std::size_t>(horizon - 1);
        const double extra = std::min(gap / spec.charge_eff, charge_left[last]);
        out.decisions[last].grid_charge += extra;
        out.level[static_cast<std::size_t>(horizon)] = step_state(
            out.level[last], out.decisions[last], spec);
    }
    if (std::abs(out.level[static_cast<std::size_t>(horizon)] - spec.level_end) > tol)
        throw InfeasibleError(horizon, "decomposed offline run cannot meet the end level");
    out.cost = schedule_cost(trace, out);
    return out;
}

Schedule run_decomposed_threshold(const Trace& trace, const StorageSpec& spec,
                                  const MarketStats& stats) {
    MarketStats adjusted = stats;
    adjusted.renew_ratio = terminal_adjusted_ratio(trace, spec, stats.renew_ratio);
    return run_decomposed_threshold_with_policy(trace, spec, make_policy(adjusted, spec));
}

Schedule run_decomposed_threshold_with_policy(const Trace& trace, const StorageSpec& spec,
                                              const ThresholdPolicy& policy) {
    trace.validate();
    spec.validate();
    const int horizon = trace.horizon();
    const double rho_eff = std::clamp(policy.stats.renew_ratio, 0.0, 1.0);

    std::vector<double> demand(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) demand[static_cast<std::size_t>(t - 1)] = trace.at(t).demand;
    const TruncationSplit split =
        truncate_split(one_shot_decompose(demand, spec), spec.level_start, spec);

    std::vector<double> covered_at(static_cast<std::size_t>(horizon) + 1, 0.0);
    for (const auto& [slot, amount] : split.covered)
        covered_at[static_cast<std::size_t>(slot)] += amount;

    const auto& atoms = split.kept.atoms;
    std::vector<double> stock(atoms.size(), 0.0);
    double legacy = spec.level_start;
    double combined = spec.level_start;

    std::vector<Decision> total(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) {
        const SlotInput& in = trace.at(t);
        const bool charging = in.price <= policy.threshold;
        double renew_left = in.renewable;
        double charge_left = spec.charge_rate;
        double discharge_left = spec.discharge_rate;
        Decision& slot_total = total[static_cast<std::size_t>(t - 1)];

        const double cov = covered_at[static_cast<std::size_t>(t)];
        if (cov > 0.0) {
            if (charging) {
                slot_total.grid_serve += cov;
            } else {
                const double d = std::min({cov, discharge_left, legacy / spec.discharge_eff});
                slot_total.discharge += d;
                slot_total.grid_serve += cov - d;
                discharge_left -= d;
                legacy -= spec.discharge_eff * d;
                combined -= spec.discharge_eff * d;
            }
        }

        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const OneShotDemand& atom = atoms[i];
            if (t < atom.start_slot || t > atom.demand_slot) continue;
            const double own_demand = (t == atom.demand_slot) ? atom.amount : 0.0;
            const double cap_i = std::min(spec.capacity, spec.discharge_eff * atom.amount);
            const double target_i = spec.discharge_eff * atom.amount * (1.0 - rho_eff);

            double d = 0.0, vb = 0.0;
            if (!charging) {
                d = std::min({own_demand, discharge_left, stock[i] / spec.discharge_eff});
            }
            double headroom = (spec.capacity - (combined - spec.discharge_eff * d));
            if (t == horizon)
                headroom = std::min(headroom, spec.level_end - (combined - spec.discharge_eff * d));
            double rb = positive(std::min({renew_left,
                                           (cap_i - stock[i]) / spec.charge_eff,
                                           headroom / spec.charge_eff, charge_left}));
            if (charging) {
                vb = std::min({positive((target_i - stock[i]) / spec.charge_eff - rb),
                               positive(charge_left - rb),
                               positive(headroom / spec.charge_eff - rb)});
            }

            const double delta = spec.charge_eff * (rb + vb) - spec.discharge_eff * d;
            stock[i] += delta;
            combined += delta;
            renew_left -= rb;
            charge_left -= rb + vb;
            discharge_left -= d;

            slot_total.discharge += d;
            slot_total.renew_charge += rb;
            slot_total.grid_serve += own_demand - d;
            slot_total.grid_charge += vb;
        }

        if (t == horizon) {
            const double gap = spec.level_end - combined;
            const double tol = 1e-9 * std::max(1.0, spec.capacity);
            if (gap > tol) {
                const double extra = std::min(gap / spec.charge_eff, positive(charge_left));
                slot_total.grid_charge += extra;
                combined += spec.charge_eff * extra;
            }
            if (std::abs(combined - spec.level_end) > tol)
                throw InfeasibleError(horizon,
                                      "decomposed threshold run cannot meet the end level");
        }
    }

    Schedule out;
    out.decisions = std::move(total);
    out.level.resize(static_cast<std::size_t>(horizon) + 1);
    out.level[0] = spec.level_start;
    for (int t = 1; t <= horizon; ++t)
        out.level[static_cast<std::size_t>(t)] = step_state(
            out.level[static_cast<std::size_t>(t - 1)],
            out.decisions[static_cast<std::size_t>(t - 1)], spec);
    out.cost = schedule_cost(trace, out);
    return out;
}

}  // namespace espkit
