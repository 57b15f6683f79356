// espkit command line: experiments, single solves, adversarial instances,
// demand decomposition and synthetic trace generation.
//
// Exit codes: 0 ok, 1 infeasible instance, 2 bad input, 3 internal error.
#include <cmath>
#include <iostream>

#include <CLI11.hpp>

#include "espkit/analysis.hpp"
#include "espkit/decomposition.hpp"
#include "espkit/experiment.hpp"
#include "espkit/offline.hpp"
#include "espkit/online.hpp"
#include "espkit/trace_io.hpp"

namespace {

using namespace espkit;

struct StorageFlags {
    StorageSpec spec;
    void attach(CLI::App* cmd) {
        cmd->add_option("--capacity,-B", spec.capacity, "storage capacity (MWh)");
        cmd->add_option("--charge-eff", spec.charge_eff, "charging efficiency (0,1]");
        cmd->add_option("--discharge-eff", spec.discharge_eff, "discharging efficiency >= 1");
        cmd->add_option("--charge-rate", spec.charge_rate, "charge rate cap (MWh/slot)");
        cmd->add_option("--discharge-rate", spec.discharge_rate, "discharge rate cap (MWh/slot)");
        cmd->add_option("--level-start", spec.level_start, "initial level (MWh)");
        cmd->add_option("--level-end", spec.level_end, "required end level (MWh)");
    }
};

int cmd_gen(const SyntheticTraceParams& params, const std::string& out) {
    const Trace trace = generate_trace(params);
    write_trace_csv(trace, out);
    std::cout << "wrote " << trace.horizon() << " slots to " << out << "\n";
    return 0;
}

int cmd_solve(const std::string& trace_path, const std::string& alg, const StorageSpec& spec,
              int window, double stats_max, double stats_min, double stats_rho,
              bool auto_stats) {
    const Trace trace = read_trace_csv(trace_path);
    MarketStats stats;
    if (auto_stats) {
        stats.price_max = trace.max_price();
        stats.price_min = trace.min_price();
        stats.renew_ratio = trace.total_demand() > 0.0 ? renew_ratio(trace, spec) : 0.0;
    } else {
        stats.price_max = stats_max;
        stats.price_min = stats_min;
        stats.renew_ratio = stats_rho;
    }

    OnlineRunInfo info;
    Schedule sched;
    if (alg == "ofl") sched = solve_offline(trace, spec);
    else if (alg == "thb") sched = run_threshold(trace, spec, stats, &info);
    else if (alg == "thb_adaptive") sched = run_threshold_adaptive(trace, spec, &info);
    else if (alg == "lka") sched = run_lookahead(trace, spec, stats, window, &info);
    else if (alg == "rhc") sched = run_receding_horizon(trace, spec, window);
    else throw ParseError("unknown algorithm '" + alg + "'");

    const auto report = validate_schedule(trace, spec, sched);
    if (!report.ok()) {
        std::cerr << "internal error: schedule failed validation\n" << report.to_string();
        return 3;
    }
    std::cout << "algorithm: " << alg << "\n";
    std::cout << "total cost: " << sched.cost << "\n";
    std::cout << "avg cost per slot: " << sched.cost / trace.horizon() << "\n";
    if (info.forced_terminal_cost > 0.0)
        std::cout << "forced end-level purchase: " << info.forced_terminal_cost << "\n";
    if (alg != "ofl") {
        const double opt = solve_offline(trace, spec).cost;
        std::cout << "offline optimal cost: " << opt << "\n";
        if (opt > 1e-12) std::cout << "ratio: " << sched.cost / opt << "\n";
        else if (sched.cost <= 1e-12) std::cout << "ratio: 1\n";
        else std::cout << "ratio: inf\n";
    }
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& plot_kind,
            const std::string& plot_path) {
    const ExperimentConfig cfg = parse_config(config_path);
    const ResultTable table = run_experiment(cfg);
    write_table_csv(table, cfg.output);
    std::cout << "wrote " << table.axis_values.size() << " rows to " << cfg.output << "\n";
    if (!cfg.output_json.empty()) {
        write_table_json(table, cfg.output_json);
        std::cout << "wrote " << cfg.output_json << "\n";
    }
    if (!plot_kind.empty()) {
        emit_plot_data(table, plot_kind, plot_path);
        std::cout << "wrote plot data (" << plot_kind << ") to " << plot_path << "\n";
    }
    return 0;
}

int cmd_adversary_spread(double price_max, double price_min, const StorageSpec& user_spec,
                         const std::string& prefix, int grid_points) {
    StorageSpec spec = user_spec;
    spec.level_start = spec.level_end = spec.capacity;
    if (spec.charge_rate < spec.capacity || spec.discharge_rate < spec.capacity)
        std::cerr << "note: rate caps below capacity; the canonical instances assume "
                     "rates >= capacity\n";
    auto [low, high] = adversary_no_renewable(price_max, price_min, spec.capacity, spec);
    write_trace_csv(low, prefix + "_low.csv");
    write_trace_csv(high, prefix + "_high.csv");
    const double opt_low = solve_offline(low, spec).cost;
    const double opt_high = solve_offline(high, spec).cost;
    const auto search = adversary_minmax_search(price_max, price_min, spec.capacity, spec,
                                                grid_points);
    const double phi = price_max / price_min;
    std::cout << "wrote " << prefix << "_low.csv and " << prefix << "_high.csv\n";
    std::cout << "offline cost (low tail): " << opt_low << "\n";
    std::cout << "offline cost (high tail): " << opt_high << "\n";
    std::cout << "min-max ratio over recharge choice: " << search.best_ratio << " at z = "
              << search.best_z << "\n";
    std::cout << "deterministic lower bound (1+sqrt(phi))/2: "
              << lower_bound_no_renewable(phi) << "\n";
    return 0;
}

int cmd_adversary_renewable(const std::string& policy_name, double price_max, double price_min,
                            const StorageSpec& user_spec, double policy_rho, int max_slots,
                            const std::string& out) {
    StorageSpec spec = user_spec;
    spec.level_start = spec.level_end = 0.0;
    OnlinePolicy policy;
    if (policy_name == "never-buy") {
        policy = never_buy_policy();
    } else if (policy_name == "thb") {
        MarketStats stats{price_max, price_min, policy_rho};
        policy = threshold_as_policy(make_policy(stats, spec));
    } else {
        throw ParseError("unknown adversary policy '" + policy_name + "'");
    }
    const auto result = adversary_full_renewable(policy, price_max, price_min, spec.capacity,
                                                 spec, max_slots);
    if (!out.empty()) {
        write_trace_csv(result.trace, out);
        std::cout << "wrote realised trace to " << out << "\n";
    }
    std::cout << "policy bought from grid: " << (result.bought ? "yes" : "no") << "\n";
    if (result.bought) std::cout << "first purchase at slot " << result.buy_slot << "\n";
    std::cout << "online cost: " << result.online_cost << "\n";
    std::cout << "offline cost: " << result.offline_cost << "\n";
    if (result.unbounded) std::cout << "ratio: inf\n";
    else std::cout << "ratio: " << result.ratio << "\n";
    std::cout << "deterministic lower bound phi: "
              << lower_bound_full_renewable(price_max / price_min) << "\n";
    return 0;
}

int cmd_decompose(const std::string& trace_path, const StorageSpec& spec, double level0) {
    const Trace trace = read_trace_csv(trace_path);
    std::vector<double> demand;
    demand.reserve(trace.slots.size());
    for (const auto& in : trace.slots) demand.push_back(in.demand);
    Decomposition decomp = one_shot_decompose(demand, spec);
    if (level0 > 0.0) decomp = truncate(decomp, level0, spec);
    std::cout << "atoms: " << decomp.atoms.size() << "\n";
    std::cout << "start_slot,demand_slot,amount_mwh\n";
    for (const auto& atom : decomp.atoms)
        std::cout << atom.start_slot << ',' << atom.demand_slot << ',' << atom.amount << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy storage scheduling toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "write a synthetic trace CSV");
    SyntheticTraceParams params;
    std::string gen_out = "trace.csv";
    gen->add_option("--horizon,-T", params.horizon, "number of hourly slots");
    gen->add_option("--seed", params.seed, "generator seed");
    gen->add_option("--demand-base", params.demand_base, "mean demand (MWh)");
    gen->add_option("--demand-amplitude", params.demand_amplitude, "diurnal demand swing");
    gen->add_option("--price-base", params.price_base, "mean price ($/MWh)");
    gen->add_option("--price-amplitude", params.price_amplitude, "diurnal price swing");
    gen->add_option("--price-min", params.price_min, "price floor");
    gen->add_option("--price-max", params.price_max, "price cap");
    gen->add_option("--renew-fraction", params.renew_fraction, "mean renewable share of demand");
    gen->add_option("--noise", params.noise, "relative noise amplitude");
    gen->add_option("--out,-o", gen_out, "output CSV path");

    // solve
    auto* solve = app.add_subcommand("solve", "run one algorithm on one trace");
    std::string solve_trace, solve_alg = "ofl";
    StorageFlags solve_storage;
    int solve_window = 4;
    double stats_max = 0.0, stats_min = 0.0, stats_rho = 0.0;
    solve->add_option("--trace,-t", solve_trace, "trace CSV path")->required();
    solve->add_option("--alg,-a", solve_alg, "ofl|thb|thb_adaptive|lka|rhc");
    solve_storage.attach(solve);
    solve->add_option("--window,-W", solve_window, "lookahead window (lka/rhc)");
    auto* opt_max = solve->add_option("--price-max", stats_max, "known max price (thb/lka)");
    auto* opt_min = solve->add_option("--price-min", stats_min, "known min price (thb/lka)");
    solve->add_option("--rho", stats_rho, "known renewable ratio (thb/lka)");

    // run
    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    std::string run_config, run_plot_kind, run_plot_path = "plot.dat";
    run->add_option("--config,-c", run_config, "config file")->required();
    run->add_option("--plot-kind", run_plot_kind, "cost_vs_axis|ratio_vs_axis|trajectory");
    run->add_option("--plot-out", run_plot_path, "plot data output path");

    // adversary
    auto* adv = app.add_subcommand("adversary", "emit worst-case instances");
    std::string adv_kind = "spread", adv_prefix = "adversary", adv_policy = "thb";
    std::string adv_out;
    StorageFlags adv_storage;
    double adv_max = 4.0, adv_min = 1.0, adv_rho = 0.0;
    int adv_grid = 1000, adv_tmax = 16;
    adv->add_option("--kind,-k", adv_kind, "spread (no renewable) | renewable");
    adv->add_option("--price-max,-M", adv_max, "maximum price");
    adv->add_option("--price-min,-m", adv_min, "minimum price");
    adv_storage.attach(adv);
    adv->add_option("--out-prefix", adv_prefix, "prefix for emitted instance CSVs");
    adv->add_option("--grid-points", adv_grid, "recharge grid resolution");
    adv->add_option("--policy", adv_policy, "renewable kind: thb | never-buy");
    adv->add_option("--rho", adv_rho, "rho fed to the thb policy");
    adv->add_option("--t-max", adv_tmax, "max probing slots before the demand arrives");
    adv->add_option("--out", adv_out, "write the realised trace here");

    // decompose
    auto* dec = app.add_subcommand("decompose", "print the one-shot demand decomposition");
    std::string dec_trace;
    StorageFlags dec_storage;
    double dec_level0 = 0.0;
    dec->add_option("--trace,-t", dec_trace, "trace CSV path")->required();
    dec_storage.attach(dec);
    dec->add_option("--x0", dec_level0, "initial stock to truncate by (MWh)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(params, gen_out);
        if (solve->parsed()) {
            const bool auto_stats = !(opt_max->count() && opt_min->count());
            solve_storage.spec.validate();
            return cmd_solve(solve_trace, solve_alg, solve_storage.spec, solve_window,
                             stats_max, stats_min, stats_rho, auto_stats);
        }
        if (run->parsed()) return cmd_run(run_config, run_plot_kind, run_plot_path);
        if (adv->parsed()) {
            adv_storage.spec.validate();
            if (adv_kind == "spread")
                return cmd_adversary_spread(adv_max, adv_min, adv_storage.spec, adv_prefix,
                                            adv_grid);
            if (adv_kind == "renewable")
                return cmd_adversary_renewable(adv_policy, adv_max, adv_min, adv_storage.spec,
                                               adv_rho, adv_tmax, adv_out);
            throw ParseError("unknown adversary kind '" + adv_kind + "'");
        }
        if (dec->parsed()) {
            dec_storage.spec.validate();
            return cmd_decompose(dec_trace, dec_storage.spec, dec_level0);
        }
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible (slot " << e.slot() << "): " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const UndefinedRatioError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
