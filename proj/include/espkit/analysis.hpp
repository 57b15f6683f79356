#ifndef ESPKIT_ANALYSIS_HPP
#define ESPKIT_ANALYSIS_HPP

#include <functional>
#include <utility>
#include <vector>

#include "espkit/model.hpp"
#include "espkit/online.hpp"

namespace espkit {

// Worst-case cost ratio of the threshold policy:
// (rho*phi + rho + sqrt(4*phi + rho^2*(phi-1)^2)) / 2, rho clamped to [0,1].
double competitive_ratio(double phi, double rho);

// Deterministic lower bound without renewable: (1 + sqrt(phi)) / 2.
double lower_bound_no_renewable(double phi);

// Deterministic lower bound with abundant renewable: phi.
double lower_bound_full_renewable(double phi);

// The two three-slot instances that force the no-renewable bound: demand
// B/eta_d at slot 1, prices (M, sqrt(Mm), m) and (M, sqrt(Mm), M).
// Intended with level_start = level_end = B and rates >= B.
std::pair<Trace, Trace> adversary_no_renewable(double price_max, double price_min,
                                               double capacity, const StorageSpec& spec);

// The canonical online response on those instances: discharge for the slot-1
// demand, recharge `z` at slot 2, fill the rest at slot 3.
Schedule recharge_response(const Trace& trace, const StorageSpec& spec, double z);

struct MinMaxSearch {
    double best_ratio = 0.0;  // min over z of the worse of the two cost ratios
    double best_z = 0.0;
};

// Grid search over the recharge choice z in [0, B].
MinMaxSearch adversary_minmax_search(double price_max, double price_min, double capacity,
                                     const StorageSpec& spec, int grid_points = 1000);

// An online policy under adversarial play: sees everything revealed so far
// plus its current level, returns the slot decision.
using OnlinePolicy =
    std::function<Decision(const std::vector<SlotInput>& seen, double level,
                           const StorageSpec& spec)>;

struct AdaptiveAdversaryResult {
    Trace trace;          // the realised input sequence
    bool bought = false;  // policy charged from the grid at some point
    int buy_slot = 0;
    bool unbounded = false;  // offline cost zero with positive online cost
    double ratio = 1.0;      // meaningful when !unbounded
    double online_cost = 0.0;
    double offline_cost = 0.0;
};

// Abundant-renewable adversary: feeds (p=m, a=0, r=0) until the policy buys
// into storage, then presents free energy followed by peak-price demand
// (offline cost zero).  A policy that never buys instead faces the demand
// without renewable and pays the full spread.
AdaptiveAdversaryResult adversary_full_renewable(const OnlinePolicy& policy, double price_max,
                                                 double price_min, double capacity,
                                                 const StorageSpec& spec, int max_slots);

// Adapters for adversarial play.
OnlinePolicy threshold_as_policy(const ThresholdPolicy& policy);
OnlinePolicy never_buy_policy();

// Aggregated case-split point for the worst-case ratio function.
struct AggregatePoint {
    double a1 = 0.0, b1 = 0.0;  // no-cheap-slot atoms: demand, renewable-served
    double a2 = 0.0, b2 = 0.0;  // cheap-slot atoms short on renewable
};

bool in_feasible_set(const AggregatePoint& pt, double rho, double total);

// Ratio of bounded online cost to offline cost at an aggregate point; throws
// std::domain_error when the offline side is zero.
double boundary_ratio(const AggregatePoint& pt, double price_max, double price_min,
                      double theta_eff, double rho, double total);

// max{(theta_eff + rho*M)/m, (M + rho*theta_eff)/theta_eff}.
double boundary_ratio_bound(double price_max, double price_min, double theta_eff, double rho);

// Brute-force maximum of boundary_ratio over a grid of the feasible set.
double boundary_ratio_grid_max(double price_max, double price_min, double theta_eff, double rho,
                               int steps_per_axis);

struct RatioReport {
    double empirical = 1.0;  // max observed cost ratio (1 when all costs zero)
    double bound = 0.0;      // the closed-form bound for the instance class
    bool unbounded = false;  // some instance had zero offline cost, positive online cost
    std::size_t witness = 0; // index of the instance attaining the maximum
};

using ScheduleRunner = std::function<Schedule(const Trace&, const StorageSpec&)>;

RatioReport empirical_ratio(const ScheduleRunner& runner, const std::vector<Trace>& instances,
                            const StorageSpec& spec, double bound);

}  // namespace espkit

#endif
