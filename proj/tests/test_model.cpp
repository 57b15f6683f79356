#include <doctest.h>

#include <random>

#include "espkit/model.hpp"

using namespace espkit;

namespace {

Trace make_trace(std::initializer_list<SlotInput> slots) {
    Trace t;
    t.slots = slots;
    return t;
}

StorageSpec ideal_spec(double capacity) {
    StorageSpec s;
    s.capacity = capacity;
    return s;
}

}  // namespace

TEST_CASE("step_state follows the storage recurrence") {
    StorageSpec spec = ideal_spec(10.0);
    CHECK(step_state(0.0, {0, 0, 0, 0}, spec) == 0.0);

    spec.charge_eff = 0.9;
    spec.discharge_eff = 1.1;
    CHECK(step_state(0.0, {0.0, 2.0, 1.0, 3.0}, spec) == doctest::Approx(4.5).epsilon(1e-12));

    StorageSpec unit = ideal_spec(10.0);
    CHECK(step_state(2.0, {2.0, 0.0, 0.0, 0.0}, unit) == doctest::Approx(0.0));
}

TEST_CASE("validate_schedule approves the all-zero schedule on a zero trace") {
    const Trace trace = make_trace({{0, 1, 0}, {0, 1, 0}});
    const StorageSpec spec = ideal_spec(5.0);
    Schedule sched;
    sched.decisions.resize(2);
    sched.level = {0, 0, 0};
    CHECK(validate_schedule(trace, spec, sched).ok());
}

TEST_CASE("validate_schedule flags a demand-balance violation") {
    const Trace trace = make_trace({{1.0, 1.0, 0.0}});
    const StorageSpec spec = ideal_spec(5.0);
    Schedule sched;
    sched.decisions.resize(1);
    sched.level = {0, 0};
    const auto report = validate_schedule(trace, spec, sched);
    REQUIRE_FALSE(report.ok());
    bool found = false;
    for (const auto& v : report.violations)
        if (v.slot == 1 && v.constraint.find("demand balance") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validate_schedule rejects structural length mismatch") {
    const Trace trace = make_trace({{0, 1, 0}, {0, 1, 0}});
    Schedule sched;
    sched.decisions.resize(1);
    sched.level = {0, 0};
    CHECK_THROWS_AS(validate_schedule(trace, ideal_spec(1.0), sched), std::invalid_argument);
}

TEST_CASE("schedule_cost sums grid purchases only") {
    const Trace trace = make_trace({{0, 1, 0}, {0, 4, 0}});
    Schedule sched;
    sched.decisions.resize(2);
    sched.level = {0, 2, 2};

    SUBCASE("all-zero schedule costs nothing") {
        sched.level = {0, 0, 0};
        CHECK(schedule_cost(trace, sched) == 0.0);
    }
    SUBCASE("charging purchase") {
        sched.decisions[0].grid_charge = 2.0;
        CHECK(schedule_cost(trace, sched) == doctest::Approx(2.0));
    }
    SUBCASE("charging plus demand purchase") {
        sched.decisions[0].grid_charge = 2.0;
        sched.decisions[1].grid_serve = 2.0;
        CHECK(schedule_cost(trace, sched) == doctest::Approx(10.0));
    }
}

TEST_CASE("renewable ratio") {
    StorageSpec spec = ideal_spec(10.0);

    const Trace none = make_trace({{5, 1, 0}, {5, 1, 0}});
    CHECK(renew_ratio(none, spec) == 0.0);

    const Trace even = make_trace({{5, 1, 5}, {5, 1, 5}});
    CHECK(renew_ratio(even, spec) == doctest::Approx(1.0));

    spec.charge_eff = 0.9;
    spec.discharge_eff = 1.1;
    CHECK(renew_ratio(even, spec) == doctest::Approx(0.9 / 1.1).epsilon(1e-12));

    const Trace empty = make_trace({{0, 1, 3}});
    CHECK_THROWS_AS(renew_ratio(empty, spec), UndefinedRatioError);
}

TEST_CASE("effective renewable ratio folds in the end-level gap") {
    StorageSpec spec = ideal_spec(10.0);
    spec.level_end = 10.0;
    const Trace trace = make_trace({{5, 1, 2}, {5, 1, 3}});
    CHECK(effective_renew_ratio(trace, spec) == doctest::Approx(renew_ratio(trace, spec)));

    spec.level_end = 0.0;
    const Trace dry = make_trace({{5, 1, 0}, {5, 1, 0}});
    CHECK(effective_renew_ratio(dry, spec) == doctest::Approx(1.0));

    spec.level_end = 5.0;
    const Trace half = make_trace({{5, 1, 2}, {5, 1, 3}});
    CHECK(effective_renew_ratio(half, spec) == doctest::Approx(1.0));
}

TEST_CASE("cost is linear and step_state reproduces stored levels") {
    std::mt19937_64 rng(7);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    StorageSpec spec = ideal_spec(20.0);
    spec.charge_eff = 0.9;
    spec.discharge_eff = 1.1;

    for (int round = 0; round < 50; ++round) {
        const int horizon = 1 + static_cast<int>(rng() % 10);
        Trace trace;
        Schedule a, b;
        a.level = {0.0};
        b.level = {0.0};
        for (int t = 0; t < horizon; ++t) {
            trace.slots.push_back({uniform(0, 3), uniform(1, 5), uniform(0, 2)});
            Decision da{uniform(0, 1), uniform(0, 1), uniform(0, 2), uniform(0, 2)};
            Decision db{uniform(0, 1), uniform(0, 1), uniform(0, 2), uniform(0, 2)};
            a.decisions.push_back(da);
            b.decisions.push_back(db);
            a.level.push_back(step_state(a.level.back(), da, spec));
            b.level.push_back(step_state(b.level.back(), db, spec));
        }
        Schedule sum;
        sum.level = {0.0};
        for (int t = 0; t < horizon; ++t) {
            Decision d;
            d.discharge = a.decisions[t].discharge + b.decisions[t].discharge;
            d.renew_charge = a.decisions[t].renew_charge + b.decisions[t].renew_charge;
            d.grid_serve = a.decisions[t].grid_serve + b.decisions[t].grid_serve;
            d.grid_charge = a.decisions[t].grid_charge + b.decisions[t].grid_charge;
            sum.decisions.push_back(d);
            sum.level.push_back(step_state(sum.level.back(), d, spec));
        }
        CHECK(schedule_cost(trace, sum) ==
              doctest::Approx(schedule_cost(trace, a) + schedule_cost(trace, b)).epsilon(1e-12));

        // The stored level sequence is exactly the step_state fold.
        for (int t = 1; t <= horizon; ++t) {
            const double recon =
                step_state(a.level[static_cast<std::size_t>(t - 1)],
                           a.decisions[static_cast<std::size_t>(t - 1)], spec);
            CHECK(recon == doctest::Approx(a.level[static_cast<std::size_t>(t)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("trace and spec invariants are enforced") {
    Trace bad = make_trace({{1, 0, 0}});
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    StorageSpec spec;
    spec.capacity = 5.0;
    spec.charge_eff = 1.2;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.charge_eff = 0.9;
    spec.discharge_eff = 0.8;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.discharge_eff = 1.1;
    spec.level_start = 7.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("validate_schedule flags rate-cap and capacity violations") {
    const Trace trace = make_trace({{2, 1, 0}, {0, 1, 1}});
    StorageSpec spec = ideal_spec(1.0);
    spec.charge_rate = 0.5;
    spec.discharge_rate = 0.5;
    Schedule sched;
    sched.decisions.resize(2);
    sched.decisions[0].discharge = 1.0;   // above the discharge cap
    sched.decisions[0].grid_serve = 1.0;
    sched.decisions[1].renew_charge = 1.0;  // above the charge cap, above capacity
    sched.level = {1.0, 0.0, 1.0};
    const auto report = validate_schedule(trace, spec, sched);
    bool discharge_cap = false, charge_cap = false;
    for (const auto& v : report.violations) {
        if (v.constraint.find("discharge rate") != std::string::npos) discharge_cap = true;
        if (v.constraint.find("charge rate") != std::string::npos) charge_cap = true;
    }
    CHECK(discharge_cap);
    CHECK(charge_cap);
}
