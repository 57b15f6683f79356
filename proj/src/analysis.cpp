#include "espkit/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "espkit/offline.hpp"

namespace espkit {

namespace {
constexpr double kZeroCost = 1e-12;
}

double competitive_ratio(double phi, double rho) {
    if (!(phi >= 1.0)) throw std::invalid_argument("competitive_ratio: phi must be >= 1");
    rho = std::clamp(rho, 0.0, 1.0);
    const double spread = phi - 1.0;
    return 0.5 * (rho * phi + rho + std::sqrt(4.0 * phi + rho * rho * spread * spread));
}

double lower_bound_no_renewable(double phi) {
    if (!(phi >= 1.0)) throw std::invalid_argument("lower bound: phi must be >= 1");
    return 0.5 * (1.0 + std::sqrt(phi));
}

double lower_bound_full_renewable(double phi) {
    if (!(phi >= 1.0)) throw std::invalid_argument("lower bound: phi must be >= 1");
    return phi;
}

std::pair<Trace, Trace> adversary_no_renewable(double price_max, double price_min,
                                               double capacity, const StorageSpec& spec) {
    if (!(price_min > 0.0 && price_max >= price_min))
        throw std::invalid_argument("adversary: need 0 < m <= M");
    const double mid = std::sqrt(price_max * price_min);
    const double shot = capacity / spec.discharge_eff;
    Trace low, high;
    low.slots = {{shot, price_max, 0.0}, {0.0, mid, 0.0}, {0.0, price_min, 0.0}};
    high.slots = {{shot, price_max, 0.0}, {0.0, mid, 0.0}, {0.0, price_max, 0.0}};
    return {low, high};
}

Schedule recharge_response(const Trace& trace, const StorageSpec& spec, double z) {
    if (trace.horizon() != 3)
        throw std::invalid_argument("recharge_response: expects the three-slot instances");
    if (z < 0.0 || z > spec.capacity + 1e-12)
        throw std::invalid_argument("recharge_response: z outside [0, B]");
    Schedule out;
    out.decisions.resize(3);
    Decision& first = out.decisions[0];
    first.discharge = std::min({trace.at(1).demand, spec.discharge_rate,
                                spec.level_start / spec.discharge_eff});
    first.grid_serve = trace.at(1).demand - first.discharge;
    out.decisions[1].grid_charge = z / spec.charge_eff;
    out.decisions[2].grid_charge = std::max(0.0, spec.level_end - z) / spec.charge_eff;
    out.level.resize(4);
    out.level[0] = spec.level_start;
    for (int t = 1; t <= 3; ++t)
        out.level[static_cast<std::size_t>(t)] =
            step_state(out.level[static_cast<std::size_t>(t - 1)],
                       out.decisions[static_cast<std::size_t>(t - 1)], spec);
    out.cost = schedule_cost(trace, out);
    return out;
}

MinMaxSearch adversary_minmax_search(double price_max, double price_min, double capacity,
                                     const StorageSpec& spec, int grid_points) {
    if (grid_points < 1) throw std::invalid_argument("adversary search: need >= 1 grid point");
    auto [low, high] = adversary_no_renewable(price_max, price_min, capacity, spec);
    const double opt_low = solve_offline(low, spec).cost;
    const double opt_high = solve_offline(high, spec).cost;
    MinMaxSearch result;
    result.best_ratio = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= grid_points; ++k) {
        const double z = capacity * k / grid_points;
        const double cost_low = recharge_response(low, spec, z).cost;
        const double cost_high = recharge_response(high, spec, z).cost;
        const double worst = std::max(cost_low / opt_low, cost_high / opt_high);
        if (worst < result.best_ratio) {
            result.best_ratio = worst;
            result.best_z = z;
        }
    }
    return result;
}

OnlinePolicy threshold_as_policy(const ThresholdPolicy& policy) {
    return [policy](const std::vector<SlotInput>& seen, double level,
                    const StorageSpec& spec) -> Decision {
        OnlineState state;
        state.level = level;
        state.slot = static_cast<int>(seen.size());
        return threshold_step(policy, state, seen.back(), spec).first;
    };
}

OnlinePolicy never_buy_policy() {
    return [](const std::vector<SlotInput>& seen, double level,
              const StorageSpec& spec) -> Decision {
        const SlotInput& in = seen.back();
        Decision dec;
        dec.renew_charge = std::max(
            0.0, std::min({in.renewable, (spec.capacity - level) / spec.charge_eff,
                           spec.charge_rate}));
        dec.discharge =
            std::min({in.demand, spec.discharge_rate, level / spec.discharge_eff});
        dec.grid_serve = in.demand - dec.discharge;
        return dec;
    };
}

AdaptiveAdversaryResult adversary_full_renewable(const OnlinePolicy& policy, double price_max,
                                                 double price_min, double capacity,
                                                 const StorageSpec& spec, int max_slots) {
    if (max_slots < 1) throw std::invalid_argument("adversary: max_slots must be >= 1");
    AdaptiveAdversaryResult result;
    std::vector<SlotInput> seen;
    double level = spec.level_start;
    double online_cost = 0.0;

    auto play = [&](const SlotInput& in) {
        seen.push_back(in);
        const Decision dec = policy(seen, level, spec);
        online_cost += in.price * (dec.grid_serve + dec.grid_charge);
        level = step_state(level, dec, spec);
        return dec;
    };

    int bought_at = 0;
    for (int t = 1; t <= max_slots; ++t) {
        const Decision dec = play({0.0, price_min, 0.0});
        if (dec.grid_charge > kZeroCost) {
            bought_at = t;
            break;
        }
    }

    if (bought_at > 0) {
        // Free energy, then peak-price demand: the offline run pays nothing.
        play({0.0, price_min, capacity / spec.charge_eff});
        play({capacity / spec.discharge_eff, price_max, 0.0});
        result.bought = true;
        result.buy_slot = bought_at;
        result.unbounded = true;
    } else {
        play({capacity / spec.discharge_eff, price_max, 0.0});
    }

    result.trace.slots = seen;
    result.online_cost = online_cost;
    result.offline_cost = solve_offline(result.trace, spec).cost;
    if (!result.unbounded) {
        if (result.offline_cost <= kZeroCost)
            result.ratio = online_cost <= kZeroCost ? 1.0
                                                    : std::numeric_limits<double>::infinity();
        else
            result.ratio = online_cost / result.offline_cost;
    }
    return result;
}

bool in_feasible_set(const AggregatePoint& pt, double rho, double total) {
    const double eps = 1e-12 * std::max(1.0, total);
    const double a3 = total - pt.a1 - pt.a2;
    const double b3 = rho * total - pt.b1 - pt.b2;
    return pt.a1 >= -eps && pt.a2 >= -eps && a3 >= -eps && pt.b1 >= -eps && pt.b2 >= -eps &&
           pt.b1 <= pt.a1 + eps && pt.b2 <= rho * pt.a2 + eps && b3 >= rho * a3 - eps &&
           b3 <= a3 + eps;
}

double boundary_ratio(const AggregatePoint& pt, double price_max, double price_min,
                      double theta_eff, double rho, double total) {
    const double a3 = total - pt.a1 - pt.a2;
    const double b3 = rho * total - pt.b1 - pt.b2;
    const double zeta1 = (pt.a1 - pt.b1) * price_max;
    const double xi1 = (pt.a1 - pt.b1) * theta_eff;
    const double zeta2 = (1.0 - rho) * pt.a2 * theta_eff + (rho * pt.a2 - pt.b2) * price_max;
    const double xi2 = (pt.a2 - pt.b2) * price_min;
    const double zeta3 = (1.0 - rho) * a3 * theta_eff;
    const double xi3 = (a3 - b3) * price_min;
    const double den = xi1 + xi2 + xi3;
    if (!(den > 1e-15 * std::max(1.0, total * price_max)))
        throw std::domain_error("boundary_ratio: offline side is zero at this point");
    return (zeta1 + zeta2 + zeta3) / den;
}

double boundary_ratio_bound(double price_max, double price_min, double theta_eff, double rho) {
    return std::max((theta_eff + rho * price_max) / price_min,
                    (price_max + rho * theta_eff) / theta_eff);
}

double boundary_ratio_grid_max(double price_max, double price_min, double theta_eff, double rho,
                               int steps_per_axis) {
    if (steps_per_axis < 1) throw std::invalid_argument("grid max: need >= 1 step");
    const double total = 1.0;
    const double h = total / steps_per_axis;
    double best = 0.0;
    for (int ia1 = 0; ia1 <= steps_per_axis; ++ia1) {
        const double a1 = ia1 * h;
        for (int ib1 = 0; ib1 <= ia1; ++ib1) {
            const double b1 = ib1 * h;
            for (int ia2 = 0; ia2 + ia1 <= steps_per_axis; ++ia2) {
                const double a2 = ia2 * h;
                for (int ib2 = 0; ib2 <= steps_per_axis; ++ib2) {
                    const double b2 = ib2 * h;
                    if (b2 > rho * a2 + 1e-12) break;
                    const AggregatePoint pt{a1, b1, a2, b2};
                    if (!in_feasible_set(pt, rho, total)) continue;
                    try {
                        best = std::max(best,
                                        boundary_ratio(pt, price_max, price_min, theta_eff,
                                                       rho, total));
                    } catch (const std::domain_error&) {
                    }
                }
            }
        }
    }
    return best;
}

RatioReport empirical_ratio(const ScheduleRunner& runner, const std::vector<Trace>& instances,
                            const StorageSpec& spec, double bound) {
    RatioReport report;
    report.bound = bound;
    bool any = false;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const Schedule online = runner(instances[i], spec);
        const double online_cost = schedule_cost(instances[i], online);
        const double offline_cost = solve_offline(instances[i], spec).cost;
        double ratio;
        if (offline_cost <= kZeroCost && online_cost <= kZeroCost) {
            ratio = 1.0;
        } else if (offline_cost <= kZeroCost) {
            report.unbounded = true;
            report.witness = i;
            report.empirical = std::numeric_limits<double>::infinity();
            return report;
        } else {
            ratio = online_cost / offline_cost;
        }
        if (!any || ratio > report.empirical) {
            report.empirical = ratio;
            report.witness = i;
            any = true;
        }
    }
    return report;
}

}  // namespace espkit
