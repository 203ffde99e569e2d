#pragma once

#include <vector>

#include "apk/config.hpp"
#include "apk/discretization.hpp"

namespace apk {

/// phi_in(x) = min((x + 0.5)^2, 0.5 (x - 0.5)^2 + 0.05): two wells, unequal depth.
double two_minima(double x);

/// Initial phase on the grid nodes for the configured preset, capped at
/// cfg.phi_cap (left_step uses 0 left of step_position and phi_cap elsewhere).
std::vector<double> initial_phase(const RunConfig& cfg, const Grid& grid);

}  // namespace apk
