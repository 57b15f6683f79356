#include "espkit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "espkit/decomposition.hpp"
#include "espkit/offline.hpp"
#include "espkit/online.hpp"

namespace espkit {

const std::vector<std::string> kKnownAlgorithms = {"ofl", "thb", "thb_adaptive", "lka", "rhc"};

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_number(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ParseError("config: bad number for '" + key + "': " + v);
    }
}

int worker_count() {
    if (const char* env = std::getenv("ESPKIT_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

struct GridPoint {
    double axis = 0.0;
    std::string label;
    StorageSpec spec;
    int window = 0;
};

void apply_boundary(StorageSpec& spec, const std::string& preset) {
    if (preset == "keep") return;
    if (preset == "full") {
        spec.level_start = spec.level_end = spec.capacity;
    } else if (preset == "empty") {
        spec.level_start = spec.level_end = 0.0;
    } else if (preset == "half") {
        spec.level_start = spec.level_end = 0.5 * spec.capacity;
    } else {
        throw ParseError("config: unknown boundary preset '" + preset + "'");
    }
}

std::string format_number(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace

void ExperimentConfig::validate() const {
    if (source != "generate" && source != "csv")
        throw ParseError("config: trace source must be 'generate' or 'csv'");
    if (source == "csv" && trace_path.empty())
        throw ParseError("config: csv source needs 'path'");
    if (algorithms.empty()) throw ParseError("config: no algorithms selected");
    for (const auto& a : algorithms)
        if (std::find(kKnownAlgorithms.begin(), kKnownAlgorithms.end(), a) ==
            kKnownAlgorithms.end())
            throw ParseError("config: unknown algorithm '" + a + "'");
    if (sweep != "capacity" && sweep != "window" && sweep != "rate" && sweep != "efficiency" &&
        sweep != "boundary")
        throw ParseError("config: unknown sweep '" + sweep + "'");
    if (sweep == "boundary") {
        if (boundary_presets.empty()) throw ParseError("config: boundary sweep needs presets");
    } else if (grid.empty()) {
        throw ParseError("config: sweep grid is empty");
    }
    if (normalize != "none" && normalize != "max_a")
        throw ParseError("config: normalize must be 'none' or 'max_a'");
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    ExperimentConfig cfg;
    std::vector<std::string> raw_grid;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (section == "trace") {
            if (key == "source") cfg.source = value;
            else if (key == "path") cfg.trace_path = value;
            else if (key == "seed") cfg.synth.seed = static_cast<std::uint64_t>(to_number(value, key));
            else if (key == "horizon") cfg.synth.horizon = static_cast<int>(to_number(value, key));
            else if (key == "demand_base") cfg.synth.demand_base = to_number(value, key);
            else if (key == "demand_amplitude") cfg.synth.demand_amplitude = to_number(value, key);
            else if (key == "price_base") cfg.synth.price_base = to_number(value, key);
            else if (key == "price_amplitude") cfg.synth.price_amplitude = to_number(value, key);
            else if (key == "price_min") cfg.synth.price_min = to_number(value, key);
            else if (key == "price_max") cfg.synth.price_max = to_number(value, key);
            else if (key == "renew_fraction") cfg.synth.renew_fraction = to_number(value, key);
            else if (key == "noise") cfg.synth.noise = to_number(value, key);
            else throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        } else if (section == "storage") {
            if (key == "capacity") cfg.storage.capacity = to_number(value, key);
            else if (key == "charge_eff") cfg.storage.charge_eff = to_number(value, key);
            else if (key == "discharge_eff") cfg.storage.discharge_eff = to_number(value, key);
            else if (key == "charge_rate") cfg.storage.charge_rate = to_number(value, key);
            else if (key == "discharge_rate") cfg.storage.discharge_rate = to_number(value, key);
            else if (key == "level_start") cfg.storage.level_start = to_number(value, key);
            else if (key == "level_end") cfg.storage.level_end = to_number(value, key);
            else throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        } else if (section == "run") {
            if (key == "algorithms") cfg.algorithms = split_list(value);
            else if (key == "sweep") cfg.sweep = value;
            else if (key == "grid") raw_grid = split_list(value);
            else if (key == "boundary") cfg.boundary = value;
            else if (key == "window") cfg.window = static_cast<int>(to_number(value, key));
            else if (key == "output") cfg.output = value;
            else if (key == "output_json") cfg.output_json = value;
            else if (key == "tolerance") cfg.tolerance = to_number(value, key);
            else if (key == "normalize") cfg.normalize = value;
            else if (key == "record_trajectory") cfg.record_trajectory = (value == "true" || value == "1");
            else if (key == "stats_price_max") cfg.stats_price_max = to_number(value, key);
            else if (key == "stats_price_min") cfg.stats_price_min = to_number(value, key);
            else if (key == "stats_renew_ratio") cfg.stats_renew_ratio = to_number(value, key);
            else throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        } else {
            throw ParseError("config line " + std::to_string(line_no) + ": key outside a section");
        }
    }
    if (cfg.sweep == "boundary") {
        cfg.boundary_presets = raw_grid;
    } else {
        for (const auto& item : raw_grid) cfg.grid.push_back(to_number(item, "grid"));
    }
    cfg.validate();
    return cfg;
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    Trace base_trace = cfg.source == "csv" ? read_trace_csv(cfg.trace_path)
                                           : generate_trace(cfg.synth);
    base_trace.validate();

    // Expand grid points.
    std::vector<GridPoint> points;
    if (cfg.sweep == "boundary") {
        for (const auto& preset : cfg.boundary_presets) {
            GridPoint p;
            p.spec = cfg.storage;
            apply_boundary(p.spec, preset);
            p.window = cfg.window;
            p.axis = p.spec.level_start;
            p.label = preset;
            points.push_back(p);
        }
    } else {
        for (double v : cfg.grid) {
            GridPoint p;
            p.spec = cfg.storage;
            p.window = cfg.window;
            if (cfg.sweep == "capacity") {
                p.spec.capacity = v;
                p.spec.level_start = std::min(p.spec.level_start, v);
                p.spec.level_end = std::min(p.spec.level_end, v);
                apply_boundary(p.spec, cfg.boundary);
            } else if (cfg.sweep == "window") {
                p.window = static_cast<int>(v);
                apply_boundary(p.spec, cfg.boundary);
            } else if (cfg.sweep == "rate") {
                p.spec.charge_rate = v;
                p.spec.discharge_rate = v;
                apply_boundary(p.spec, cfg.boundary);
            } else if (cfg.sweep == "efficiency") {
                // v = eta_d/eta_c, split symmetrically.
                if (!(v >= 1.0)) throw ParseError("config: efficiency ratio must be >= 1");
                p.spec.charge_eff = 1.0 / std::sqrt(v);
                p.spec.discharge_eff = std::sqrt(v);
                apply_boundary(p.spec, cfg.boundary);
            }
            p.axis = v;
            p.label = format_number(v);
            points.push_back(p);
        }
    }

    const double peak = base_trace.peak_demand();
    ResultTable table;
    table.axis_name = cfg.sweep == "capacity" && cfg.normalize == "max_a"
                          ? "capacity_over_peak_demand"
                          : cfg.sweep;
    table.algorithms = cfg.algorithms;
    table.has_ratio = std::find(cfg.algorithms.begin(), cfg.algorithms.end(), "ofl") !=
                      cfg.algorithms.end();
    const std::size_t rows = points.size();
    const std::size_t algs = cfg.algorithms.size();
    table.axis_values.resize(rows);
    table.axis_labels.resize(rows);
    table.avg_cost.assign(rows, std::vector<double>(algs, 0.0));
    table.ratio.assign(rows, std::vector<double>(algs, std::numeric_limits<double>::quiet_NaN()));
    table.feasible.assign(rows, std::vector<char>(algs, 0));
    if (cfg.record_trajectory) {
        table.trajectory.assign(algs, {});
        table.trajectory_len = base_trace.horizon() + 1;
    }

    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t row = cursor.fetch_add(1);
            if (row >= rows) return;
            const GridPoint& pt = points[row];
            table.axis_values[row] =
                cfg.sweep == "capacity" && cfg.normalize == "max_a" && peak > 0.0
                    ? pt.axis / peak
                    : pt.axis;
            table.axis_labels[row] = pt.label;

            MarketStats stats;
            stats.price_max = cfg.stats_price_max.value_or(base_trace.max_price());
            stats.price_min = cfg.stats_price_min.value_or(base_trace.min_price());
            if (cfg.stats_renew_ratio) {
                stats.renew_ratio = *cfg.stats_renew_ratio;
            } else {
                const double total = base_trace.total_demand();
                stats.renew_ratio = total > 0.0 ? renew_ratio(base_trace, pt.spec) : 0.0;
            }

            double ofl_cost = std::numeric_limits<double>::quiet_NaN();
            std::vector<double> costs(algs, std::numeric_limits<double>::quiet_NaN());
            for (std::size_t a = 0; a < algs; ++a) {
                const std::string& name = cfg.algorithms[a];
                try {
                    Schedule sched;
                    if (name == "ofl") sched = solve_offline(base_trace, pt.spec);
                    else if (name == "thb") sched = run_threshold(base_trace, pt.spec, stats);
                    else if (name == "thb_adaptive")
                        sched = run_threshold_adaptive(base_trace, pt.spec);
                    else if (name == "lka")
                        sched = run_lookahead(base_trace, pt.spec, stats, pt.window);
                    else if (name == "rhc")
                        sched = run_receding_horizon(base_trace, pt.spec, pt.window);
                    const auto report = validate_schedule(base_trace, pt.spec, sched, cfg.tolerance);
                    if (!report.ok())
                        throw InfeasibleError(report.violations.front().slot,
                                              "schedule failed validation: " +
                                                  report.to_string());
                    costs[a] = sched.cost;
                    table.avg_cost[row][a] = sched.cost / base_trace.horizon();
                    table.feasible[row][a] = 1;
                    if (name == "ofl") ofl_cost = sched.cost;
                    if (cfg.record_trajectory && row == 0) table.trajectory[a] = sched.level;
                } catch (const InfeasibleError&) {
                    table.feasible[row][a] = 0;
                }
            }
            if (table.has_ratio && std::isfinite(ofl_cost)) {
                for (std::size_t a = 0; a < algs; ++a) {
                    if (!table.feasible[row][a]) continue;
                    if (ofl_cost > 1e-12) table.ratio[row][a] = costs[a] / ofl_cost;
                    else if (costs[a] <= 1e-12) table.ratio[row][a] = 1.0;
                    else table.ratio[row][a] = std::numeric_limits<double>::infinity();
                }
            }
        }
    };

    const std::size_t workers = std::min(static_cast<std::size_t>(worker_count()),
                                         std::max<std::size_t>(rows, 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return table;
}

namespace {

void print_value(std::ostream& out, double v) {
    if (std::isnan(v)) out << "nan";
    else if (std::isinf(v)) out << "inf";
    else out << v;
}

}  // namespace

void write_table_csv(const ResultTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write results file: " + path);
    out.precision(10);
    out << table.axis_name << ",label";
    for (const auto& a : table.algorithms) out << ",avg_cost_" << a;
    if (table.has_ratio)
        for (const auto& a : table.algorithms) out << ",ratio_" << a;
    for (const auto& a : table.algorithms) out << ",feasible_" << a;
    out << "\n";
    for (std::size_t r = 0; r < table.axis_values.size(); ++r) {
        out << table.axis_values[r] << ',' << table.axis_labels[r];
        for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
            out << ',';
            if (table.feasible[r][a]) print_value(out, table.avg_cost[r][a]);
            else out << "nan";
        }
        if (table.has_ratio)
            for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
                out << ',';
                print_value(out, table.ratio[r][a]);
            }
        for (std::size_t a = 0; a < table.algorithms.size(); ++a)
            out << ',' << (table.feasible[r][a] ? 1 : 0);
        out << "\n";
    }
}

void write_table_json(const ResultTable& table, const std::string& path) {
    nlohmann::json doc;
    doc["axis"] = table.axis_name;
    doc["algorithms"] = table.algorithms;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < table.axis_values.size(); ++r) {
        nlohmann::json row;
        row["axis"] = table.axis_values[r];
        row["label"] = table.axis_labels[r];
        for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
            nlohmann::json cell;
            cell["feasible"] = static_cast<bool>(table.feasible[r][a]);
            if (table.feasible[r][a]) cell["avg_cost"] = table.avg_cost[r][a];
            if (table.has_ratio && table.feasible[r][a]) {
                const double ratio = table.ratio[r][a];
                if (std::isinf(ratio)) cell["ratio"] = "inf";
                else if (!std::isnan(ratio)) cell["ratio"] = ratio;
            }
            row[table.algorithms[a]] = cell;
        }
        rows.push_back(row);
    }
    doc["rows"] = rows;
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write results file: " + path);
    out << doc.dump(2) << "\n";
}

void emit_plot_data(const ResultTable& table, const std::string& kind, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write plot file: " + path);
    out.precision(10);
    if (kind == "cost_vs_axis" || kind == "ratio_vs_axis") {
        const bool ratio = kind == "ratio_vs_axis";
        if (ratio && !table.has_ratio)
            throw ParseError("plot data: table has no offline baseline for ratios");
        out << "# " << table.axis_name;
        for (const auto& a : table.algorithms) out << ' ' << a;
        out << "\n";
        for (std::size_t r = 0; r < table.axis_values.size(); ++r) {
            out << table.axis_values[r];
            for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
                out << ' ';
                print_value(out, ratio ? table.ratio[r][a]
                                       : (table.feasible[r][a]
                                              ? table.avg_cost[r][a]
                                              : std::numeric_limits<double>::quiet_NaN()));
            }
            out << "\n";
        }
    } else if (kind == "trajectory") {
        out << "# t";
        for (const auto& a : table.algorithms) out << " level_" << a;
        out << "\n";
        for (int t = 0; t < table.trajectory_len; ++t) {
            out << t;
            for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
                out << ' ';
                if (a < table.trajectory.size() &&
                    static_cast<std::size_t>(t) < table.trajectory[a].size())
                    print_value(out, table.trajectory[a][static_cast<std::size_t>(t)]);
                else
                    out << "nan";
            }
            out << "\n";
        }
    } else {
        throw ParseError("plot data: unknown kind '" + kind + "'");
    }
}

}  // namespace espkit
