#include "espkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace espkit {

namespace {

double rel_tol(double tol, double scale) { return tol * std::max(1.0, std::abs(scale)); }

}  // namespace

double Trace::total_demand() const {
    double s = 0.0;
    for (const auto& in : slots) s += in.demand;
    return s;
}

double Trace::total_renewable() const {
    double s = 0.0;
    for (const auto& in : slots) s += in.renewable;
    return s;
}

double Trace::peak_demand() const {
    double s = 0.0;
    for (const auto& in : slots) s = std::max(s, in.demand);
    return s;
}

double Trace::min_price() const {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& in : slots) s = std::min(s, in.price);
    return s;
}

double Trace::max_price() const {
    double s = 0.0;
    for (const auto& in : slots) s = std::max(s, in.price);
    return s;
}

void Trace::validate() const {
    if (slots.empty()) throw std::invalid_argument("trace: horizon must be at least 1");
    for (int t = 1; t <= horizon(); ++t) {
        const SlotInput& in = at(t);
        if (!(in.demand >= 0.0))
            throw std::invalid_argument("trace: negative demand at slot " + std::to_string(t));
        if (!(in.renewable >= 0.0))
            throw std::invalid_argument("trace: negative renewable at slot " + std::to_string(t));
        if (!(in.price > 0.0))
            throw std::invalid_argument("trace: non-positive price at slot " + std::to_string(t));
    }
}

void StorageSpec::validate() const {
    if (!(capacity >= 0.0)) throw std::invalid_argument("storage: capacity must be >= 0");
    if (!(charge_eff > 0.0 && charge_eff <= 1.0))
        throw std::invalid_argument("storage: charge efficiency must be in (0, 1]");
    if (!(discharge_eff >= 1.0))
        throw std::invalid_argument("storage: discharge efficiency must be >= 1");
    if (!(charge_rate >= 0.0)) throw std::invalid_argument("storage: charge rate must be >= 0");
    if (!(discharge_rate >= 0.0))
        throw std::invalid_argument("storage: discharge rate must be >= 0");
    if (!(level_start >= 0.0 && level_start <= capacity))
        throw std::invalid_argument("storage: start level outside [0, capacity]");
    if (!(level_end >= 0.0 && level_end <= capacity))
        throw std::invalid_argument("storage: end level outside [0, capacity]");
}

void MarketStats::validate() const {
    if (!(price_min > 0.0)) throw std::invalid_argument("stats: min price must be > 0");
    if (!(price_max >= price_min))
        throw std::invalid_argument("stats: max price must be >= min price");
    if (!(renew_ratio >= 0.0)) throw std::invalid_argument("stats: renewable ratio must be >= 0");
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& v : violations)
        out << "slot " << v.slot << ": " << v.constraint << " (slack " << v.slack << ")\n";
    return out.str();
}

double step_state(double level_prev, const Decision& dec, const StorageSpec& spec) {
    return level_prev + spec.charge_eff * (dec.renew_charge + dec.grid_charge) -
           spec.discharge_eff * dec.discharge;
}

ValidationReport validate_schedule(const Trace& trace, const StorageSpec& spec,
                                   const Schedule& sched, double tol) {
    const int horizon = trace.horizon();
    if (static_cast<int>(sched.decisions.size()) != horizon)
        throw std::invalid_argument("validate_schedule: decision count does not match trace");
    if (static_cast<int>(sched.level.size()) != horizon + 1)
        throw std::invalid_argument("validate_schedule: level sequence must have T+1 entries");

    ValidationReport report;
    auto flag = [&report](int slot, const char* what, double slack) {
        report.violations.push_back({slot, what, slack});
    };

    const double cap_tol = rel_tol(tol, spec.capacity);

    if (std::abs(sched.level[0] - spec.level_start) > cap_tol)
        flag(0, "start level != B_s", sched.level[0] - spec.level_start);

    for (int t = 1; t <= horizon; ++t) {
        const SlotInput& in = trace.at(t);
        const Decision& dec = sched.decisions[static_cast<std::size_t>(t - 1)];
        const double x_prev = sched.level[static_cast<std::size_t>(t - 1)];
        const double x_now = sched.level[static_cast<std::size_t>(t)];

        const double neg_tol = rel_tol(tol, 1.0);
        if (dec.discharge < -neg_tol) flag(t, "discharge negative", dec.discharge);
        if (dec.renew_charge < -neg_tol) flag(t, "renewable charge negative", dec.renew_charge);
        if (dec.grid_serve < -neg_tol) flag(t, "grid-to-demand negative", dec.grid_serve);
        if (dec.grid_charge < -neg_tol) flag(t, "grid-to-storage negative", dec.grid_charge);

        const double balance = dec.discharge + dec.grid_serve - in.demand;
        if (std::abs(balance) > rel_tol(tol, in.demand))
            flag(t, "demand balance d + v_a != a", balance);

        if (dec.renew_charge - in.renewable > rel_tol(tol, in.renewable))
            flag(t, "renewable charge exceeds supply", dec.renew_charge - in.renewable);

        if (x_now < -cap_tol) flag(t, "level below zero", x_now);
        if (x_now - spec.capacity > cap_tol) flag(t, "level above capacity", x_now - spec.capacity);

        if (std::isfinite(spec.charge_rate)) {
            const double over = dec.renew_charge + dec.grid_charge - spec.charge_rate;
            if (over > rel_tol(tol, spec.charge_rate)) flag(t, "charge rate exceeded", over);
        }
        if (std::isfinite(spec.discharge_rate)) {
            const double over = dec.discharge - spec.discharge_rate;
            if (over > rel_tol(tol, spec.discharge_rate)) flag(t, "discharge rate exceeded", over);
        }

        const double recon = step_state(x_prev, dec, spec);
        if (std::abs(recon - x_now) > cap_tol) flag(t, "level recurrence broken", recon - x_now);
    }

    if (std::abs(sched.level[static_cast<std::size_t>(horizon)] - spec.level_end) > cap_tol)
        flag(horizon, "end level != B_e",
             sched.level[static_cast<std::size_t>(horizon)] - spec.level_end);

    return report;
}

double schedule_cost(const Trace& trace, const Schedule& sched) {
    const int horizon = trace.horizon();
    if (static_cast<int>(sched.decisions.size()) != horizon)
        throw std::invalid_argument("schedule_cost: decision count does not match trace");
    double cost = 0.0;
    for (int t = 1; t <= horizon; ++t) {
        const Decision& dec = sched.decisions[static_cast<std::size_t>(t - 1)];
        cost += trace.at(t).price * (dec.grid_serve + dec.grid_charge);
    }
    return cost;
}

double renew_ratio(const Trace& trace, const StorageSpec& spec) {
    const double total = trace.total_demand();
    if (!(total > 0.0))
        throw UndefinedRatioError("renewable ratio undefined: total demand is zero");
    return spec.eff_ratio() * trace.total_renewable() / total;
}

double effective_renew_ratio(const Trace& trace, const StorageSpec& spec) {
    const double total = trace.total_demand();
    if (!(total > 0.0))
        throw UndefinedRatioError("renewable ratio undefined: total demand is zero");
    return spec.eff_ratio() * (spec.capacity - spec.level_end + trace.total_renewable()) / total;
}

}  // namespace espkit
