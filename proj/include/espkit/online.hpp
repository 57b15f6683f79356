#ifndef ESPKIT_ONLINE_HPP
#define ESPKIT_ONLINE_HPP

#include <span>
#include <utility>

#include "espkit/model.hpp"

namespace espkit {

// Threshold policy: charge from the grid up to charge_target whenever the
// price is at or below threshold, otherwise discharge to serve demand.
struct ThresholdPolicy {
    double threshold = 0.0;      // theta ($/MWh)
    double charge_target = 0.0;  // B_hat (MWh)
    MarketStats stats;           // statistics the policy was derived from
};

struct OnlineState {
    double level = 0.0;
    int slot = 1;  // next slot to decide
    // Running statistics for the adaptive variant.
    bool price_seen = false;
    double seen_price_max = 0.0;
    double seen_price_min = 0.0;
    double seen_demand = 0.0;
    double seen_renewable = 0.0;
};

// Optional diagnostics from a full online run.
struct OnlineRunInfo {
    double forced_terminal_cost = 0.0;  // money spent closing the end-level gap
    OnlineState final_state;
};

// theta and B_hat per the optimal-threshold rule; rho is clamped to [0, 1].
ThresholdPolicy make_policy(const MarketStats& stats, const StorageSpec& spec);

// One slot of the threshold algorithm.  Pure; depends only on current input.
std::pair<Decision, OnlineState> threshold_step(const ThresholdPolicy& policy,
                                                const OnlineState& state, const SlotInput& input,
                                                const StorageSpec& spec);

// One slot of the lookahead variant.  `window` starts at the current slot and
// holds at most W+1 entries (truncated near the horizon end).
std::pair<Decision, OnlineState> lookahead_step(const ThresholdPolicy& policy,
                                                const OnlineState& state,
                                                std::span<const SlotInput> window,
                                                const StorageSpec& spec);

// Full runs.  The end-level constraint is closed at the last slot: charging
// is clamped so the level never passes B_e and any shortfall is bought at the
// final price (reported via info->forced_terminal_cost).
Schedule run_threshold_with_policy(const Trace& trace, const StorageSpec& spec,
                                   const ThresholdPolicy& policy, OnlineRunInfo* info = nullptr);

// Derives the policy from the given statistics, with the end-level
// adjustment folded into rho when B_e < B.
Schedule run_threshold(const Trace& trace, const StorageSpec& spec, const MarketStats& stats,
                       OnlineRunInfo* info = nullptr);

// No prior statistics: price extremes and the renewable ratio are estimated
// from what has been seen so far and the policy is re-derived every slot.
Schedule run_threshold_adaptive(const Trace& trace, const StorageSpec& spec,
                                OnlineRunInfo* info = nullptr);

Schedule run_lookahead_with_policy(const Trace& trace, const StorageSpec& spec,
                                   const ThresholdPolicy& policy, int window,
                                   OnlineRunInfo* info = nullptr);

Schedule run_lookahead(const Trace& trace, const StorageSpec& spec, const MarketStats& stats,
                       int window, OnlineRunInfo* info = nullptr);

// Receding horizon control: optimise [t, min(t+W, T)] each slot (end-level
// constrained once the window reaches T) and keep only slot t's decision.
Schedule run_receding_horizon(const Trace& trace, const StorageSpec& spec, int window);

// The rho actually fed into make_policy by run_threshold: the caller's value
// plus the end-level term (eta_c/eta_d)*(B - B_e)/total demand.
double terminal_adjusted_ratio(const Trace& trace, const StorageSpec& spec, double rho);

}  // namespace espkit

#endif
