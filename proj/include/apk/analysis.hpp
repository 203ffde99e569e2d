#pragma once

#include <span>
#include <string>
#include <vector>

#include "apk/discretization.hpp"

namespace apk {

/// ||a - b||_inf / ||a||_inf. The first argument is the normaliser (reference).
/// Throws ValidationError when ||a||_inf == 0 or the sizes differ.
double sup_error(std::span<const double> a, std::span<const double> b);

/// Values of a fine-grid field at the nodes of a coarse grid on the same box.
/// Nodes coincide when n_fine / n_coarse is an odd integer and are copied; any
/// other ratio falls back to linear interpolation between the bracketing fine
/// nodes (exact == false).
struct Restriction {
    std::vector<double> values;
    bool exact = true;
};

Restriction restrict_to(std::span<const double> fine, const Grid& fine_grid, const Grid& coarse_grid);

/// Least-squares line y = slope x + intercept; residual is the RMS misfit.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    int samples = 0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// First crossing of rho below threshold scanning left to right, refined by
/// linear interpolation between the bracketing nodes. Throws DomainExhausted
/// when rho never drops below threshold or already starts below it.
double front_position(std::span<const double> rho, std::span<const double> xs, double threshold = 0.5);

/// Same crossing in phase form: first x where phi rises above level. With
/// level = eps ln 2 this is the rho = 1/2 crossing, but stays resolvable when
/// rho underflows.
double phase_front_position(std::span<const double> phi, std::span<const double> xs, double level);

struct FrontTrack {
    std::vector<double> times;
    std::vector<double> positions;
};

/// Slope of position against time, skipping the leading skip_fraction of
/// samples. Needs at least 5 samples in the window.
LinearFit fit_front_speed(const FrontTrack& track, double skip_fraction = 0.1);

/// c(p) = (H(p) + r) / p.
double speed_function(double p, double r, const Equilibrium& eq);

struct SpeedOracle {
    double c_star = 0.0;
    double p_star = 0.0;
    std::vector<double> p;  // coarse scan
    std::vector<double> c;
};

/// c* = inf_{p>0} c(p): log-spaced scan over [p_min, p_max] with n points, then
/// golden-section refinement around the best scan point down to p_tol.
/// Throws ConfigError for r <= 0 and when the scan minimum sits on the grid edge.
SpeedOracle speed_oracle(double r, const Equilibrium& eq, double p_min = 1e-2, double p_max = 1e2,
                         int n = 200, double p_tol = 1e-10);

struct ConvergenceRow {
    double eps = 0.0;
    double dx = 0.0;
    double error = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
};

struct OrderFit {
    double eps = 0.0;
    LinearFit fit;                      // log E against log dx
    std::vector<std::string> warnings;  // excluded rows
};

/// One slope per distinct eps (in order of first appearance). Rows with E <= 0
/// are dropped with a warning; fewer than 3 usable rows throws ValidationError.
std::vector<OrderFit> order_fit(const ConvergenceTable& table);

}  // namespace apk
