#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apk/discretization.hpp"

namespace apk {

/// Kinetic density f_{i,j} and its velocity average rho_i at one time level.
struct DistributionField {
    PhaseSpaceArray f;
    std::vector<double> rho;
    double eps = 1.0;
    double r = 0.0;
    int n = 0;
    double time = 0.0;
};

/// rho_i = dv sum_j f_{i,j} for every row of f.
std::vector<double> densities(const PhaseSpaceArray& f, double dv);

/// Stability advisory for the explicit scheme:
/// dt <= 0.9 min(dx / v_max, eps / (1 + 2r)).
struct StabilityAdvice {
    bool ok = true;
    double dt_limit = 0.0;
    std::string message;  // empty when ok
};

StabilityAdvice explicit_stability(const Grid& grid, double eps, double r);

/**
 * One explicit upwind step of
 *   f_t + v f_x = (rho M - f + r rho (M - f)) / eps,
 * i.e.  f^{n+1} = f - dt [v d_x f]^n + dt/eps (rho M - f + r rho (M - f)).
 * Throws OverflowError (with the step index) on non-finite output.
 */
DistributionField explicit_step(const DistributionField& field, const Grid& grid,
                                const Equilibrium& eq);

/// Hopf-Cole variables of a distribution. eta is NaN at nodes where M_j = 0
/// (mask[j] == 0); log arguments below kLogFloor are raised to it and reported.
struct HopfColeField {
    std::vector<double> phi;
    PhaseSpaceArray eta;
    std::vector<std::uint8_t> mask;
    bool capped = false;
};

inline constexpr double kLogFloor = 1e-300;

/// phi_i = -eps ln rho_i, eta_{i,j} = -eps ln(f_{i,j} / (rho_i M_j)).
HopfColeField to_hopf_cole(const DistributionField& field, const Equilibrium& eq);

/// f_{i,j} = M_j exp(-(phi_i + eta_{i,j}) / eps) with the exponent clamped to +-exp_clamp;
/// rho by quadrature. Nodes with M_j = 0 get f = 0 whatever eta holds there.
DistributionField from_hopf_cole(std::span<const double> phi, const PhaseSpaceArray& eta,
                                 double eps, double r, const Equilibrium& eq,
                                 double exp_clamp = 700.0);

struct ExplicitResult {
    std::vector<DistributionField> snapshots;
    StabilityAdvice advice;
    double min_f = 0.0;       // smallest f seen over the run
    long negative_entries = 0;  // count of f < 0 over all steps
};

/// Explicit run from f = M e^{-phi_in/eps} (eta = 0). Does not refuse an
/// unstable dt; the advisory is returned with the result.
ExplicitResult run_explicit(std::span<const double> phi_in, const Grid& grid,
                            const Equilibrium& eq, double eps, double r,
                            std::span<const double> snapshot_times = {});

}  // namespace apk
