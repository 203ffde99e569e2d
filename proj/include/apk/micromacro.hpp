#pragma once

#include <span>
#include <vector>

#include "apk/discretization.hpp"

namespace apk {

/// How H at t = 0 (the first Newton initial guess) is obtained.
enum class HInit { Limit, Zero };

struct SchemeConfig {
    double eps = 1.0;
    double r = 0.0;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    /// Halve a Newton step (up to 10 times) when it increases the residual.
    bool damping = true;
    /// After the residual test passes, apply one further Newton correction
    /// (not counted as an iteration) and keep it if the residual does not grow.
    bool polish = true;
    HInit h_init = HInit::Limit;
    /// For r > 0, lower the Newton start H to phi^n/dt - r where it would
    /// otherwise predict phi^{n+1} < 0 (the root always has phi^{n+1} >= 0).
    bool project_h_guess = true;
    /// Exponent arguments z/eps are clamped to +-exp_clamp before exponentiation.
    double exp_clamp = 700.0;
    /// |S| below this aborts the cell solve.
    double s_floor = 1e-300;
    /// Check the discrete maximum principle after every step (only meaningful for
    /// eta^0 = 0 and phi^0 >= 0; see check_maximum_principle).
    bool check_invariants = false;
};

/// Micro-macro state at one time level: phi_i, eta_{i,j}, H_i.
struct KineticField {
    std::vector<double> phi;
    PhaseSpaceArray eta;
    std::vector<double> H;
    double eps = 1.0;
    double r = 0.0;
    int n = 0;
    double time = 0.0;
};

struct NewtonReport {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/**
 * Upwind transport term of phi + eta at node (i, j):
 *   v+ [(phi_i - phi_{i-1}) + (eta_{i,j} - eta_{i-1,j})] / dx
 * + v- [(phi_{i+1} - phi_i) + (eta_{i+1,j} - eta_{i,j})] / dx
 * with ghost values from the grid's boundary rule.
 */
double upwind_transport(std::span<const double> phi, const PhaseSpaceArray& eta, int i, int j,
                        const Grid& grid);

/// Level-n data entering one cell's nonlinear system.
struct CellInputs {
    std::span<const double> eta_prev;   // eta^n_{i,.}
    double phi_prev = 0.0;              // phi^n_i
    std::span<const double> transport;  // [v d_x(phi + eta)]^n_{i,.}
    std::span<const double> m;          // M_j
    double dv = 0.0;
    double eps = 1.0;
    double r = 0.0;
    double dt = 0.0;
    double exp_clamp = 700.0;
};

/// exp(z / eps) with z / eps clamped to +-clamp.
double guarded_exp(double z, double eps, double clamp);

/**
 * Residual of the per-cell system. out has n_v + 1 entries:
 *   out_j   = 1 + H + r - (eta_j - eta^n_j)/dt - T_j
 *             + r e^{(r dt - phi^n)/eps} e^{dt H/eps} - (1 + r) e^{eta_j/eps}
 *   out_n_v = < M e^{-eta/eps} >_{N_v} - 1
 * Throws OverflowError on a non-finite entry.
 */
void cell_residual(std::span<const double> eta_row, double H, const CellInputs& in,
                   std::span<double> out);

/**
 * Arrowhead matrix [diag(alpha) delta; gamma^T 0] with its closed-form inverse
 * applied in O(n) from the ratios 1/alpha, gamma/alpha and delta/alpha.
 */
class ArrowheadSystem {
public:
    /// From explicit entries (alpha_j != 0).
    static ArrowheadSystem from_entries(std::span<const double> alpha, std::span<const double> gamma,
                                        std::span<const double> delta);

    /// Jacobian of cell_residual at (eta_row, H), assembled directly in the
    /// eps-bounded ratio form:
    ///   1/alpha_j     = -eps dt / (eps + (1+r) dt e^{eta_j/eps})
    ///   gamma_j/alpha =  dt dv M_j e^{-eta_j/eps} / (eps + (1+r) dt e^{eta_j/eps})
    ///   delta_j/alpha = -(eps dt + r dt^2 e^{-phi^{n+1}/eps}) / (eps + (1+r) dt e^{eta_j/eps})
    static ArrowheadSystem jacobian(std::span<const double> eta_row, double H, const CellInputs& in);

    int size() const { return static_cast<int>(inv_alpha_.size()); }
    double S() const { return s_; }
    std::span<const double> inv_alpha() const { return inv_alpha_; }
    std::span<const double> gamma_over_alpha() const { return g_over_a_; }
    std::span<const double> delta_over_alpha() const { return d_over_a_; }

    /// out = DF^{-1} rhs (both of length n + 1). Throws SolverError when
    /// |S| < s_floor. When delta is the same in every row (always the case for
    /// jacobian()) it cancels from the eta part, which keeps the solve finite
    /// even if delta overflows.
    void apply_inverse(std::span<const double> rhs, std::span<double> out,
                       double s_floor = 1e-300) const;

private:
    std::vector<double> inv_alpha_;
    std::vector<double> g_over_a_;
    std::vector<double> d_over_a_;
    double s_ = 0.0;
    double g_sum_ = 0.0;        // sum_j gamma_j / alpha_j
    double common_delta_ = 0.0; // 0 when delta varies with j
};

struct CellSolution {
    std::vector<double> eta;
    double H = 0.0;
    NewtonReport report;
};

/**
 * Newton solve of one cell from the initial guess (eta_guess, H_guess),
 * iterating [eta, H] <- [eta, H] - DF^{-1} F until max|F| <= newton_tol.
 * Throws SolverError (carrying the report in the message) on non-convergence or
 * a singular S.
 */
CellSolution solve_cell(std::span<const double> eta_guess, double H_guess, const CellInputs& in,
                        const SchemeConfig& config);

/// Aggregate Newton and exponent statistics for one or more steps.
struct RunStats {
    std::vector<long> iteration_histogram;  // index = iterations per cell solve
    long cell_solves = 0;
    int max_iterations = 0;
    double max_residual = 0.0;
    double max_exp_eta = 0.0;      // max e^{eta/eps}
    double max_exp_neg_eta = 0.0;  // max e^{-eta/eps}
    double max_conservation_defect = 0.0;

    void merge(const RunStats& other);
    double median_iterations() const;
    double mean_iterations() const;
};

struct StepSummary {
    double median_iterations = 0.0;
    int max_iterations = 0;
    double max_residual = 0.0;
};

/// Worst violations (positive = violated) of the three discrete maximum-principle
/// bounds for one step, relative to the interval [0, m].
struct MaxPrincipleReport {
    double phi = 0.0;        // 0 <= phi^{n+1} <= m
    double psi = 0.0;        // 0 <= phi^{n+1} + eta^{n+1} <= m
    double stability = 0.0;  // third bound (convex-combination identity)
    double worst() const;
};

MaxPrincipleReport check_maximum_principle(const KineticField& next, double m, const Grid& grid);

/// Sign structure of a converged cell: some eta_j <= slack and some eta_j >= -slack.
bool has_sign_change(std::span<const double> eta_row, double slack);

class MicroMacroSolver {
public:
    MicroMacroSolver(Grid grid, Equilibrium eq, SchemeConfig config);

    const Grid& grid() const { return grid_; }
    const Equilibrium& equilibrium() const { return eq_; }
    const SchemeConfig& config() const { return config_; }

    /// phi^0 = phi_in, eta^0 = 0, H^0 per config.h_init. HInit::Limit falls back
    /// to zero where the limit Hamiltonian is undefined (singular M with r > 0).
    KineticField initial(std::span<const double> phi_in) const;

    /// Advances one step in place and returns the step's statistics. Throws
    /// SolverError annotated with cell and time index.
    RunStats step(KineticField& state) const;

    struct Result {
        std::vector<KineticField> snapshots;
        RunStats stats;
        std::vector<StepSummary> per_step;
        double phi_bound = 0.0;          // m = max phi^0 used for invariant checks
    };

    /// Runs grid.nt() steps from phi_in, keeping snapshots at the requested times
    /// (empty = final state only).
    Result run(std::span<const double> phi_in, std::span<const double> snapshot_times = {}) const;

private:
    Grid grid_;
    Equilibrium eq_;
    SchemeConfig config_;
};

}  // namespace apk
