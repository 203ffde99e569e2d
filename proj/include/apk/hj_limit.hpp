#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "apk/discretization.hpp"

namespace apk {

enum class HamiltonianBranch { Implicit, SingularBoundary };

std::string to_string(HamiltonianBranch b);

struct HamiltonianEval {
    double value = 0.0;
    HamiltonianBranch branch = HamiltonianBranch::Implicit;
    int iterations = 0;
    double p = 0.0;  // backward (v > 0) slope
    double q = 0.0;  // forward (v < 0) slope
};

inline constexpr double kDefaultHamTol = 1e-12;

/**
 * Two-sided numerical Hamiltonian h(p, q): the root H of
 *
 *   < M / (1 + r + H - v+ p - v- q) >_{N_v} = 1 / (1 + r)
 *
 * with every denominator positive. Found by Newton on the reciprocal of the
 * quadrature (concave and increasing, so iterates started left of the root
 * stay left of it) with a bisection safeguard.
 *
 * When the equilibrium vanishes at the node(s) that make a denominator
 * vanish first, the quadrature stays bounded at that edge and the root may
 * not exist. For r = 0 the result is then the edge value itself
 * (SingularBoundary, equal to mu(p) - 1 when p == q). For r > 0 that case
 * throws UnsupportedError.
 */
HamiltonianEval eval_hamiltonian(double p, double q, double r, const Equilibrium& eq,
                                 double tol = kDefaultHamTol);

/// One-sided Hamiltonian H(p) = h(p, p).
inline HamiltonianEval eval_hamiltonian(double p, double r, const Equilibrium& eq,
                                        double tol = kDefaultHamTol) {
    return eval_hamiltonian(p, p, r, eq, tol);
}

/// mu(p) = v_ext * |p|, where v_ext is the outermost velocity node (the edge of
/// the support of M on the grid).
double mu(double p, const Equilibrium& eq);

/// < M / (mu(p) - v p) >_{N_v}. A node with zero denominator contributes 0 when
/// M vanishes there and +inf otherwise.
double sing_quantity(double p, const Equilibrium& eq);

/// p in Sing(M) iff sing_quantity(p) <= 1. p == 0 is never in the set.
bool in_sing_set(double p, const Equilibrium& eq);

/// Limit-scheme state: phase and the Hamiltonian used to reach it.
struct HJField {
    std::vector<double> phi;
    std::vector<double> H;
    double r = 0.0;
    int n = 0;
    double time = 0.0;
};

/// Per-cell h(backward slope, forward slope) on phi. Throws SolverError annotated
/// with the cell when a root solve fails.
std::vector<HamiltonianEval> cell_hamiltonians(std::span<const double> phi, const Grid& grid,
                                               const Equilibrium& eq, double r,
                                               double tol = kDefaultHamTol);

/// One step of the limit scheme. r == 0: phi - dt H; r > 0: max(0, phi - dt (H + r)).
HJField limit_step(const HJField& field, const Grid& grid, const Equilibrium& eq, double r,
                   double tol = kDefaultHamTol);

/// Runs grid.nt() steps from phi_in and returns the snapshots closest to the
/// requested times (time 0 is included when requested; an empty request returns
/// only the final state).
std::vector<HJField> run_limit(std::span<const double> phi_in, const Grid& grid,
                               const Equilibrium& eq, double r,
                               std::span<const double> snapshot_times = {},
                               double tol = kDefaultHamTol);

/// Central finite-difference estimates of the partial derivatives of the
/// differenced-form scheme map F(phi_{i-1}, phi_i, phi_{i+1}).
struct MonotonicityEstimate {
    double d_left = 0.0;
    double d_center = 0.0;
    double d_right = 0.0;
    double cfl = 0.0;  // v_max dt / dx

    /// 0 <= d_left, d_right <= cfl and 1 - cfl <= d_center <= 1, each with slack tol.
    bool within_bounds(double tol) const;
};

MonotonicityEstimate monotonicity_check(const std::array<double, 3>& phi, double r,
                                        const Equilibrium& eq, const Grid& grid,
                                        double fd_step = 1e-6);

}  // namespace apk
