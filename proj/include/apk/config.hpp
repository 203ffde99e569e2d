#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apk/discretization.hpp"
#include "apk/micromacro.hpp"

namespace apk {

enum class SolverKind { MicroMacro, ExplicitRef, HJLimit };

std::string to_string(SolverKind s);

/**
 * Everything a single run needs. Grid resolution is given by counts; the
 * config parser also accepts dx / dv / dt and converts them to counts.
 *
 * eps_list, dx_list and levels only matter to the sweep experiments.
 */
struct RunConfig {
    SolverKind solver = SolverKind::MicroMacro;
    std::string preset;  // name of the preset the config started from, if any

    double x_max = 1.0;
    int n_x = 200;
    double v_max = 1.0;
    int n_v = 160;
    double t_final = 1.0;
    int n_t = 400;
    Boundary boundary = Boundary::Periodic;

    double eps = 1.0;
    double r = 0.0;
    EquilibriumKind equilibrium = EquilibriumKind::Uniform;
    std::vector<double> equilibrium_values;  // custom M, one per velocity node

    // quadratic | two_minima | left_step | tabulated
    std::string initial = "quadratic";
    std::vector<double> initial_values;  // tabulated phi_in (inf allowed, capped)
    double step_position = -0.8;        // left_step: rho = 1 for x < step_position
    double phi_cap = 10.0;

    std::vector<double> snapshot_times;

    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    bool damping = true;
    bool polish = true;
    HInit h_init = HInit::Limit;
    bool project_h_guess = true;
    double ham_tol = 1e-12;
    bool check_invariants = false;

    std::vector<double> eps_list;
    std::vector<double> dx_list;
    int levels = 2;

    std::string output_dir = "out";

    double dx() const { return 2.0 * x_max / n_x; }
    double dt() const { return n_t > 0 ? t_final / n_t : 0.0; }
    SchemeConfig scheme() const;
};

/// Flat "key = value" text, '#' starts a comment. A `preset = name` line is
/// applied first wherever it appears. Throws ConfigError naming the key and line.
RunConfig parse_config(std::string_view text);

/// Sets one key. dx / dv / dt are converted with the current box and T; use
/// apply_overrides for several keys so they are resolved together.
void set_option(RunConfig& cfg, std::string_view key, std::string_view value);

/// "key=value" strings, e.g. from --set. A preset override is applied first.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments);

/// Throws ConfigError unless the grid builds (even counts, CFL) and the model
/// parameters are admissible for the chosen solver.
void validate(const RunConfig& cfg);

Grid build_grid(const RunConfig& cfg);
Equilibrium build_equilibrium(const RunConfig& cfg, const Grid& grid);

RunConfig preset_config(std::string_view name);
std::vector<std::string> preset_names();
std::vector<std::string> config_keys();

/// Every parameter that affects a run, as ordered key/value text.
std::vector<std::pair<std::string, std::string>> manifest_entries(const RunConfig& cfg);

}  // namespace apk
