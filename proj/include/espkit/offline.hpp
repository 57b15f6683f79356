#ifndef ESPKIT_OFFLINE_HPP
#define ESPKIT_OFFLINE_HPP

#include <optional>
#include <vector>

#include "espkit/model.hpp"

namespace espkit {

// A contiguous sub-horizon to optimise.  Renewable in `slots` is a decision
// input (store any amount up to r); callers that have already committed
// renewable zero it out and describe the committed energy via
// `injected_level` / `charge_cap_override` instead.
struct WindowProblem {
    double level_init = 0.0;
    std::vector<SlotInput> slots;
    std::optional<double> level_final;           // exact end-of-window level
    std::vector<double> injected_level;          // fixed level added during each slot
    std::vector<double> charge_cap_override;     // per-slot mu_c replacement
    std::vector<double> discharge_cap_override;  // per-slot mu_d replacement
};

// Cost-minimal plan for the window.  The result's level sequence starts at
// level_init.  Throws InfeasibleError (slot index local to the window) when
// the terminal level cannot be met.
Schedule solve_window(const WindowProblem& prob, const StorageSpec& spec);

// Full-horizon optimum with boundary levels taken from the spec.
Schedule solve_offline(const Trace& trace, const StorageSpec& spec);

// Dynamic program over storage levels {0, B/grid_steps, ..., B}; exact
// optimum among grid-restricted policies.  Verification oracle only:
// refuses horizon > 12 or grid_steps > 64.
Schedule brute_force_offline(const Trace& trace, const StorageSpec& spec, int grid_steps);

}  // namespace espkit

#endif
