#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apk/config.hpp"
#include "apk/micromacro.hpp"

namespace apk {

/// Snapshots of one configured run, whatever the solver.
struct RunOutcome {
    RunConfig cfg;
    std::vector<double> xs;
    std::vector<double> times;
    std::vector<std::vector<double>> phi;
    std::vector<std::vector<double>> rho;
    std::vector<PhaseSpaceArray> eta;  // micro-macro only
    RunStats stats;                    // micro-macro only
    std::vector<StepSummary> per_step; // micro-macro only
    double wall_time = 0.0;
    std::vector<std::string> warnings;
};

/// Validates cfg and runs the selected solver.
RunOutcome run_single(const RunConfig& cfg);

/// Writes per-snapshot field files, a long-format fields.csv, Newton step
/// statistics (micro-macro) and manifest.txt into dir. Returns the file names.
std::vector<std::string> write_run(const RunOutcome& run, const std::filesystem::path& dir);

struct ExperimentReport {
    std::string name;
    RunConfig base;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    RunStats stats;  // merged over every micro-macro run in the experiment
    double wall_time = 0.0;

    /// Throws std::out_of_range for an unknown metric.
    double metric(std::string_view key) const;
    bool has_metric(std::string_view key) const;
};

std::vector<std::string> experiment_names();

/// Base configuration of an experiment before overrides.
RunConfig experiment_base(std::string_view name);

/**
 * Runs one of the named studies. Overrides are "key=value" strings applied to
 * the base configuration. When out_dir is non-empty, CSVs and a manifest are
 * written to out_dir / name. Throws ConfigError listing valid names for an
 * unknown experiment; solver errors are rethrown with the experiment name.
 */
ExperimentReport run_experiment(std::string_view name, const std::vector<std::string>& overrides,
                                const std::filesystem::path& out_dir);

/// Front position over time for a micro-macro run (phase level eps ln 2),
/// sampled every step.
struct FrontRun {
    std::vector<double> times;
    std::vector<double> positions;
    RunStats stats;
    std::vector<double> final_phi;
    std::vector<double> xs;
};

FrontRun track_front(const RunConfig& cfg);

/// Grid count 2 round(x_max / dx) used by the dx sweeps.
int sweep_count(double x_max, double dx);

}  // namespace apk
