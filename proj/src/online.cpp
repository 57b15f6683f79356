#include "espkit/online.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "espkit/offline.hpp"

namespace espkit {

namespace {

double positive(double v) { return std::max(0.0, v); }

// Last-slot decision: regular branch logic with charging clamped to the
// required end level, then any remaining gap bought from the grid.
Decision close_terminal(const SlotInput& in, double level, const ThresholdPolicy& policy,
                        const StorageSpec& spec, int slot, double* forced_cost) {
    const double target = spec.level_end;
    Decision dec;
    // Whatever the branch, stock above the end level may serve the final
    // demand; stock at or below it must stay.
    dec.discharge = std::min({in.demand, spec.discharge_rate,
                              positive(level - target) / spec.discharge_eff});
    dec.grid_serve = in.demand - dec.discharge;
    const double after_d = level - spec.discharge_eff * dec.discharge;
    dec.renew_charge =
        std::min({in.renewable, positive(target - after_d) / spec.charge_eff, spec.charge_rate});

    if (in.price <= policy.threshold) {
        const double goal = std::min(policy.charge_target, target);
        dec.grid_charge = std::min(positive((goal - level) / spec.charge_eff - dec.renew_charge),
                                   positive(spec.charge_rate - dec.renew_charge));
    }

    double now = step_state(level, dec, spec);
    const double tol = 1e-9 * std::max(1.0, spec.capacity);
    if (now < target - tol) {
        const double extra =
            std::min((target - now) / spec.charge_eff,
                     positive(spec.charge_rate - dec.renew_charge - dec.grid_charge));
        dec.grid_charge += extra;
        if (forced_cost) *forced_cost += in.price * extra;
        now = step_state(level, dec, spec);
    }
    if (std::abs(now - target) > tol)
        throw InfeasibleError(slot, "end level unreachable at the final slot");
    return dec;
}

Schedule finish_run(const Trace& trace, const StorageSpec& spec,
                    std::vector<Decision> decisions) {
    Schedule out;
    out.decisions = std::move(decisions);
    out.level.resize(out.decisions.size() + 1);
    out.level[0] = spec.level_start;
    for (std::size_t k = 0; k < out.decisions.size(); ++k)
        out.level[k + 1] = step_state(out.level[k], out.decisions[k], spec);
    out.cost = schedule_cost(trace, out);
    return out;
}

}  // namespace

ThresholdPolicy make_policy(const MarketStats& stats, const StorageSpec& spec) {
    stats.validate();
    const double rho = std::clamp(stats.renew_ratio, 0.0, 1.0);
    const double hi = stats.price_max;
    const double lo = stats.price_min;
    const double gap = rho * (hi - lo);
    const double theta = 0.5 * (std::sqrt(gap * gap + 4.0 * hi * lo) - gap) * spec.eff_ratio();
    ThresholdPolicy policy;
    policy.threshold = theta;
    policy.charge_target = spec.capacity * (1.0 - rho);
    policy.stats = stats;
    return policy;
}

std::pair<Decision, OnlineState> threshold_step(const ThresholdPolicy& policy,
                                                const OnlineState& state, const SlotInput& input,
                                                const StorageSpec& spec) {
    const double x = state.level;
    Decision dec;
    dec.renew_charge = positive(std::min(
        {input.renewable, (spec.capacity - x) / spec.charge_eff, spec.charge_rate}));
    if (input.price <= policy.threshold) {
        dec.discharge = 0.0;
        dec.grid_serve = input.demand;
        dec.grid_charge =
            std::min(positive((policy.charge_target - x) / spec.charge_eff - dec.renew_charge),
                     positive(spec.charge_rate - dec.renew_charge));
    } else {
        dec.discharge =
            std::min({input.demand, spec.discharge_rate, x / spec.discharge_eff});
        dec.grid_serve = input.demand - dec.discharge;
        dec.grid_charge = 0.0;
    }
    OnlineState next = state;
    next.level = step_state(x, dec, spec);
    next.slot = state.slot + 1;
    return {dec, next};
}

std::pair<Decision, OnlineState> lookahead_step(const ThresholdPolicy& policy,
                                                const OnlineState& state,
                                                std::span<const SlotInput> window,
                                                const StorageSpec& spec) {
    const int len = static_cast<int>(window.size());
    if (len < 1) throw std::invalid_argument("lookahead_step: empty window");
    const double x0 = state.level;

    // Greedily pre-store renewable across the window.
    std::vector<double> prestore(static_cast<std::size_t>(len), 0.0);
    double x = x0;
    for (int k = 0; k < len; ++k) {
        const double rb = positive(std::min({window[static_cast<std::size_t>(k)].renewable,
                                             (spec.capacity - x) / spec.charge_eff,
                                             spec.charge_rate}));
        prestore[static_cast<std::size_t>(k)] = rb;
        x += spec.charge_eff * rb;
    }

    // Plan the rest of the window around the committed renewable.
    WindowProblem prob;
    prob.level_init = x0;
    prob.slots.assign(window.begin(), window.end());
    prob.injected_level.resize(static_cast<std::size_t>(len));
    prob.charge_cap_override.resize(static_cast<std::size_t>(len));
    for (int k = 0; k < len; ++k) {
        prob.slots[static_cast<std::size_t>(k)].renewable = 0.0;
        prob.injected_level[static_cast<std::size_t>(k)] =
            spec.charge_eff * prestore[static_cast<std::size_t>(k)];
        prob.charge_cap_override[static_cast<std::size_t>(k)] =
            positive(spec.charge_rate - prestore[static_cast<std::size_t>(k)]);
    }
    const Schedule plan = solve_window(prob, spec);

    Decision dec = plan.decisions[0];
    dec.renew_charge = prestore[0];

    // Charge at the cheapest-in-window slot if it is now and below threshold.
    int argmin = 0;
    for (int k = 1; k < len; ++k)
        if (window[static_cast<std::size_t>(k)].price <
            window[static_cast<std::size_t>(argmin)].price)
            argmin = k;
    if (argmin == 0 && window[0].price <= policy.threshold) {
        double peak = 0.0;
        for (int k = 1; k <= len; ++k)
            peak = std::max(peak, plan.level[static_cast<std::size_t>(k)]);
        const double room =
            std::min(spec.capacity - peak,
                     positive(policy.charge_target - plan.level[static_cast<std::size_t>(len)]));
        // Top up beyond the planned purchase, never past capacity once the
        // whole window shifts up by the extra charge.
        const double extra = std::min(
            {positive(room / spec.charge_eff - prestore[0] + dec.discharge),
             positive(spec.charge_rate - prestore[0] - dec.grid_charge),
             positive((spec.capacity - peak) / spec.charge_eff)});
        dec.grid_charge += extra;
    }

    OnlineState next = state;
    next.level = step_state(x0, dec, spec);
    next.slot = state.slot + 1;
    return {dec, next};
}

double terminal_adjusted_ratio(const Trace& trace, const StorageSpec& spec, double rho) {
    const double total = trace.total_demand();
    const double surplus = spec.capacity - spec.level_end + trace.total_renewable();
    if (!(total > 0.0))
        // Limit of the adjustment as demand vanishes: any surplus capacity
        // or free energy already covers everything worth storing for.
        return surplus > 0.0 ? std::max(rho, 1.0) : rho;
    return rho + spec.eff_ratio() * (spec.capacity - spec.level_end) / total;
}

Schedule run_threshold_with_policy(const Trace& trace, const StorageSpec& spec,
                                   const ThresholdPolicy& policy, OnlineRunInfo* info) {
    trace.validate();
    spec.validate();
    const int horizon = trace.horizon();
    std::vector<Decision> decisions;
    decisions.reserve(static_cast<std::size_t>(horizon));
    OnlineState state;
    state.level = spec.level_start;
    double forced = 0.0;
    for (int t = 1; t < horizon; ++t) {
        auto [dec, next] = threshold_step(policy, state, trace.at(t), spec);
        decisions.push_back(dec);
        state = next;
    }
    Decision last = close_terminal(trace.at(horizon), state.level, policy, spec, horizon, &forced);
    decisions.push_back(last);
    state.level = step_state(state.level, last, spec);
    state.slot = horizon + 1;
    if (info) {
        info->forced_terminal_cost = forced;
        info->final_state = state;
    }
    return finish_run(trace, spec, std::move(decisions));
}

Schedule run_threshold(const Trace& trace, const StorageSpec& spec, const MarketStats& stats,
                       OnlineRunInfo* info) {
    MarketStats adjusted = stats;
    adjusted.renew_ratio = terminal_adjusted_ratio(trace, spec, stats.renew_ratio);
    return run_threshold_with_policy(trace, spec, make_policy(adjusted, spec), info);
}

Schedule run_threshold_adaptive(const Trace& trace, const StorageSpec& spec,
                                OnlineRunInfo* info) {
    trace.validate();
    spec.validate();
    const int horizon = trace.horizon();
    std::vector<Decision> decisions;
    decisions.reserve(static_cast<std::size_t>(horizon));
    OnlineState state;
    state.level = spec.level_start;
    double forced = 0.0;
    ThresholdPolicy policy;
    for (int t = 1; t <= horizon; ++t) {
        const SlotInput& in = trace.at(t);
        if (!state.price_seen) {
            state.price_seen = true;
            state.seen_price_max = state.seen_price_min = in.price;
        } else {
            state.seen_price_max = std::max(state.seen_price_max, in.price);
            state.seen_price_min = std::min(state.seen_price_min, in.price);
        }
        state.seen_demand += in.demand;
        state.seen_renewable += in.renewable;

        MarketStats est;
        est.price_max = state.seen_price_max;
        est.price_min = state.seen_price_min;
        est.renew_ratio = state.seen_demand > 0.0
                              ? spec.eff_ratio() * state.seen_renewable / state.seen_demand
                              : 0.0;
        if (state.seen_demand > 0.0)
            est.renew_ratio +=
                spec.eff_ratio() * (spec.capacity - spec.level_end) / state.seen_demand;
        policy = make_policy(est, spec);

        if (t < horizon) {
            auto [dec, next] = threshold_step(policy, state, in, spec);
            decisions.push_back(dec);
            state = next;
        } else {
            Decision last = close_terminal(in, state.level, policy, spec, horizon, &forced);
            decisions.push_back(last);
            state.level = step_state(state.level, last, spec);
            state.slot = horizon + 1;
        }
    }
    if (info) {
        info->forced_terminal_cost = forced;
        info->final_state = state;
    }
    return finish_run(trace, spec, std::move(decisions));
}

Schedule run_lookahead_with_policy(const Trace& trace, const StorageSpec& spec,
                                   const ThresholdPolicy& policy, int window,
                                   OnlineRunInfo* info) {
    trace.validate();
    spec.validate();
    if (window < 0) throw std::invalid_argument("run_lookahead: window must be >= 0");
    const int horizon = trace.horizon();
    std::vector<Decision> decisions;
    decisions.reserve(static_cast<std::size_t>(horizon));
    OnlineState state;
    state.level = spec.level_start;
    double forced = 0.0;
    for (int t = 1; t < horizon; ++t) {
        const int len = std::min(window + 1, horizon - t + 1);
        std::span<const SlotInput> view(trace.slots.data() + (t - 1),
                                        static_cast<std::size_t>(len));
        auto [dec, next] = lookahead_step(policy, state, view, spec);
        decisions.push_back(dec);
        state = next;
    }
    Decision last = close_terminal(trace.at(horizon), state.level, policy, spec, horizon, &forced);
    decisions.push_back(last);
    state.level = step_state(state.level, last, spec);
    if (info) {
        info->forced_terminal_cost = forced;
        info->final_state = state;
    }
    return finish_run(trace, spec, std::move(decisions));
}

Schedule run_lookahead(const Trace& trace, const StorageSpec& spec, const MarketStats& stats,
                       int window, OnlineRunInfo* info) {
    MarketStats adjusted = stats;
    adjusted.renew_ratio = terminal_adjusted_ratio(trace, spec, stats.renew_ratio);
    return run_lookahead_with_policy(trace, spec, make_policy(adjusted, spec), window, info);
}

Schedule run_receding_horizon(const Trace& trace, const StorageSpec& spec, int window) {
    trace.validate();
    spec.validate();
    if (window < 0) throw std::invalid_argument("run_receding_horizon: window must be >= 0");
    const int horizon = trace.horizon();
    std::vector<Decision> decisions;
    decisions.reserve(static_cast<std::size_t>(horizon));
    double level = spec.level_start;
    for (int t = 1; t <= horizon; ++t) {
        const int end = std::min(t + window, horizon);
        WindowProblem prob;
        prob.level_init = level;
        prob.slots.assign(trace.slots.begin() + (t - 1), trace.slots.begin() + end);
        if (end == horizon) prob.level_final = spec.level_end;
        Schedule plan;
        try {
            plan = solve_window(prob, spec);
        } catch (const InfeasibleError& e) {
            throw InfeasibleError(t + e.slot() - 1, e.what());
        }
        decisions.push_back(plan.decisions[0]);
        level = step_state(level, plan.decisions[0], spec);
    }
    return finish_run(trace, spec, std::move(decisions));
}

}  // namespace espkit
