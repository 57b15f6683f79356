#ifndef ESPKIT_DECOMPOSITION_HPP
#define ESPKIT_DECOMPOSITION_HPP

#include <vector>

#include "espkit/model.hpp"
#include "espkit/online.hpp"

namespace espkit {

// A demand atom: `amount` MWh due at demand_slot, pre-buyable from start_slot
// on.  start_slot == demand_slot means the atom must buy on the spot.
struct OneShotDemand {
    int start_slot = 1;   // t_s
    int demand_slot = 1;  // t_nz
    double amount = 0.0;  // a_bar, > 0
};

struct Decomposition {
    std::vector<OneShotDemand> atoms;  // ordered: demand_slot then start_slot ascending
};

// Running demand totals: result[0] = 0, result[t] = sum of demand[0..t-1].
std::vector<double> accumulate_demand(const std::vector<double>& demand);

// Splits a demand sequence into one-shot atoms.  Each atom's start slot is
// as early as the shared-capacity rule allows: for every atom i with
// start < demand slot, the amounts of atoms whose demand slot falls inside
// [start_i, demand_i] sum to at most B/eta_d.  Demand beyond that bound
// becomes spot atoms.
Decomposition one_shot_decompose(const std::vector<double>& demand, const StorageSpec& spec);

// Removes leading atoms worth level0/eta_d of demand (the part the initial
// stock can serve); a partially covered atom keeps its slots and loses only
// the covered amount.
Decomposition truncate(const Decomposition& decomp, double level0, const StorageSpec& spec);

// Per-atom offline solve: decompose, truncate by the start level, then plan
// each atom over [start_slot, demand_slot] against the renewable and rate
// budget left by earlier atoms.
Schedule run_decomposed_offline(const Trace& trace, const StorageSpec& spec);

// Per-atom threshold run: every active atom executes the threshold step
// against its own stock, with target eta_d*amount*(1-rho), sharing renewable
// and rate budgets in atom order.
Schedule run_decomposed_threshold(const Trace& trace, const StorageSpec& spec,
                                  const MarketStats& stats);

// Same run with the policy supplied directly (rho for the per-atom targets
// comes from policy.stats).
Schedule run_decomposed_threshold_with_policy(const Trace& trace, const StorageSpec& spec,
                                              const ThresholdPolicy& policy);

}  // namespace espkit

#endif
