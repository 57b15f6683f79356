#ifndef ESPKIT_MODEL_HPP
#define ESPKIT_MODEL_HPP

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace espkit {

// One hour per slot; energies in MWh, prices in $/MWh.

struct SlotInput {
    double demand = 0.0;     // excess demand a(t), >= 0
    double price = 0.0;      // market price p(t), > 0
    double renewable = 0.0;  // excess renewable r(t), >= 0
};

struct Trace {
    std::vector<SlotInput> slots;  // slot t lives at slots[t-1], t = 1..T

    int horizon() const { return static_cast<int>(slots.size()); }
    const SlotInput& at(int t) const { return slots[static_cast<std::size_t>(t - 1)]; }

    double total_demand() const;
    double total_renewable() const;
    double peak_demand() const;
    double min_price() const;
    double max_price() const;

    // Throws std::invalid_argument naming the offending slot.
    void validate() const;
};

struct StorageSpec {
    double capacity = 0.0;                                     // B
    double charge_eff = 1.0;                                   // eta_c, 0 < eta_c <= 1
    double discharge_eff = 1.0;                                // eta_d, >= 1
    double charge_rate = std::numeric_limits<double>::infinity();     // mu_c per slot
    double discharge_rate = std::numeric_limits<double>::infinity();  // mu_d per slot
    double level_start = 0.0;                                  // B_s
    double level_end = 0.0;                                    // B_e

    double eff_ratio() const { return charge_eff / discharge_eff; }

    void validate() const;
};

struct Decision {
    double discharge = 0.0;     // d, storage to demand (demand units)
    double renew_charge = 0.0;  // r_b, renewable to storage
    double grid_serve = 0.0;    // v_a, grid to demand
    double grid_charge = 0.0;   // v_b, grid to storage
};

struct Schedule {
    std::vector<Decision> decisions;  // length T
    std::vector<double> level;        // length T+1, level[0] = B_s, level[t] = end of slot t
    double cost = 0.0;
};

struct MarketStats {
    double price_max = 1.0;   // M
    double price_min = 1.0;   // m
    double renew_ratio = 0.0; // rho, efficiency-normalised renewable/demand ratio

    double spread() const { return price_max / price_min; }  // phi

    void validate() const;
};

struct Violation {
    int slot = 0;  // 0 marks whole-schedule constraints (boundary at start)
    std::string constraint;
    double slack = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Terminal level unreachable, or a solver certified infeasibility.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(int slot, const std::string& what)
        : std::runtime_error(what), slot_(slot) {}
    int slot() const { return slot_; }

private:
    int slot_;
};

// rho requested on a trace with zero total demand.
class UndefinedRatioError : public std::runtime_error {
public:
    explicit UndefinedRatioError(const std::string& what) : std::runtime_error(what) {}
};

// Storage transition: level + eta_c*(r_b + v_b) - eta_d*d.  No clamping.
double step_state(double level_prev, const Decision& dec, const StorageSpec& spec);

// Checks every problem constraint at relative tolerance `tol`.  Empty report
// means the schedule is feasible.  Structural mismatches (wrong lengths)
// throw std::invalid_argument instead of being reported.
ValidationReport validate_schedule(const Trace& trace, const StorageSpec& spec,
                                   const Schedule& sched, double tol = 1e-9);

double schedule_cost(const Trace& trace, const Schedule& sched);

// (eta_c/eta_d) * sum r / sum a.  Throws UndefinedRatioError when sum a = 0.
double renew_ratio(const Trace& trace, const StorageSpec& spec);

// Terminal-adjusted ratio (eta_c/eta_d) * (B - B_e + sum r) / sum a, the
// ratio to use when the run must end at level B_e < B.
double effective_renew_ratio(const Trace& trace, const StorageSpec& spec);

}  // namespace espkit

#endif
