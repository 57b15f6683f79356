#ifndef ESPKIT_EXPERIMENT_HPP
#define ESPKIT_EXPERIMENT_HPP

#include <optional>
#include <string>
#include <vector>

#include "espkit/model.hpp"
#include "espkit/trace_io.hpp"

namespace espkit {

// Algorithm identifiers accepted by configs and the CLI:
//   ofl, thb, thb_adaptive, lka, rhc
extern const std::vector<std::string> kKnownAlgorithms;

struct ExperimentConfig {
    // [trace]
    std::string source = "generate";  // "generate" | "csv"
    std::string trace_path;
    SyntheticTraceParams synth;

    // [storage]
    StorageSpec storage;

    // [run]
    std::vector<std::string> algorithms;
    std::string sweep = "capacity";  // capacity|window|rate|efficiency|boundary
    std::vector<double> grid;        // numeric sweep values
    std::vector<std::string> boundary_presets;  // full|empty|half (boundary sweep)
    std::string boundary = "keep";   // preset applied on non-boundary sweeps; "keep" = storage section as-is
    int window = 4;                  // W for lka/rhc outside window sweeps
    std::string output = "results.csv";
    std::string output_json;         // optional JSON copy
    double tolerance = 1e-9;
    std::string normalize = "none";  // capacity axis: "max_a" or "none"
    bool record_trajectory = false;
    std::optional<double> stats_price_max, stats_price_min, stats_renew_ratio;

    void validate() const;
};

ExperimentConfig parse_config(const std::string& path);

struct ResultTable {
    std::string axis_name;
    std::vector<std::string> algorithms;
    std::vector<double> axis_values;          // normalized when requested
    std::vector<std::string> axis_labels;
    std::vector<std::vector<double>> avg_cost;  // [row][alg]
    std::vector<std::vector<double>> ratio;     // [row][alg], vs ofl
    std::vector<std::vector<char>> feasible;    // [row][alg]
    bool has_ratio = false;

    // Level trajectories for the first grid point (when recorded).
    std::vector<std::vector<double>> trajectory;  // [alg][0..T]
    int trajectory_len = 0;
};

// Runs every selected algorithm at every grid point.  Grid points are
// distributed over a worker pool (ESPKIT_WORKERS, default hardware
// concurrency); rows are emitted in grid order regardless of scheduling.
ResultTable run_experiment(const ExperimentConfig& cfg);

void write_table_csv(const ResultTable& table, const std::string& path);
void write_table_json(const ResultTable& table, const std::string& path);

// kind: cost_vs_axis | ratio_vs_axis | trajectory.  Whitespace-separated
// columns with a header line; stable column order.
void emit_plot_data(const ResultTable& table, const std::string& kind, const std::string& path);

}  // namespace espkit

#endif
