#include "apk/micromacro.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apk/errors.hpp"
#include "apk/hj_limit.hpp"

namespace apk {

double upwind_transport(std::span<const double> phi, const PhaseSpaceArray& eta, int i, int j,
                        const Grid& grid) {
    const double vj = grid.v(j);
    const double inv_dx = 1.0 / grid.dx();
    if (vj > 0.0) {
        const int im = grid.resolve(i - 1);
        return vj * ((phi[static_cast<std::size_t>(i)] - phi[static_cast<std::size_t>(im)]) * inv_dx +
                     (eta(i, j) - eta(im, j)) * inv_dx);
    }
    const int ip = grid.resolve(i + 1);
    return vj * ((phi[static_cast<std::size_t>(ip)] - phi[static_cast<std::size_t>(i)]) * inv_dx +
                 (eta(ip, j) - eta(i, j)) * inv_dx);
}

double guarded_exp(double z, double eps, double clamp) {
    return std::exp(std::clamp(z / eps, -clamp, clamp));
}

namespace {

// e^{-phi^{n+1}/eps} with phi^{n+1} = phi^n - dt (H + r).
double reaction_factor(double H, const CellInputs& in) {
    return guarded_exp(in.r * in.dt - in.phi_prev + in.dt * H, in.eps, in.exp_clamp);
}

double max_abs(std::span<const double> values) {
    double out = 0.0;
    for (double value : values) out = std::max(out, std::abs(value));
    return out;
}

}  // namespace

void cell_residual(std::span<const double> eta_row, double H, const CellInputs& in,
                   std::span<double> out) {
    const std::size_t nv = eta_row.size();
    const double source = 1.0 + H + in.r + in.r * reaction_factor(H, in);
    double mass = 0.0;
    for (std::size_t j = 0; j < nv; ++j) {
        const double e = guarded_exp(eta_row[j], in.eps, in.exp_clamp);
        out[j] = source - (eta_row[j] - in.eta_prev[j]) / in.dt - in.transport[j] - (1.0 + in.r) * e;
        mass += in.m[j] / e;
    }
    out[nv] = in.dv * mass - 1.0;
    for (std::size_t k = 0; k <= nv; ++k) {
        if (!std::isfinite(out[k])) {
            std::ostringstream os;
            os << "non-finite residual component " << k << " (H = " << H << ", phi^n = " << in.phi_prev
               << ")";
            throw OverflowError(os.str());
        }
    }
}

ArrowheadSystem ArrowheadSystem::from_entries(std::span<const double> alpha,
                                              std::span<const double> gamma,
                                              std::span<const double> delta) {
    ArrowheadSystem sys;
    const std::size_t n = alpha.size();
    sys.inv_alpha_.resize(n);
    sys.g_over_a_.resize(n);
    sys.d_over_a_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (alpha[j] == 0.0) throw SolverError("arrowhead system with zero diagonal entry");
        sys.inv_alpha_[j] = 1.0 / alpha[j];
        sys.g_over_a_[j] = gamma[j] / alpha[j];
        sys.d_over_a_[j] = delta[j] / alpha[j];
        sys.s_ += sys.g_over_a_[j] * delta[j];
        sys.g_sum_ += sys.g_over_a_[j];
    }
    const bool uniform = n > 0 && std::all_of(delta.begin(), delta.end(), [&](double d) { return d == delta[0]; });
    sys.common_delta_ = uniform ? delta[0] : 0.0;
    return sys;
}

ArrowheadSystem ArrowheadSystem::jacobian(std::span<const double> eta_row, double H,
                                          const CellInputs& in) {
    ArrowheadSystem sys;
    const std::size_t n = eta_row.size();
    sys.inv_alpha_.resize(n);
    sys.g_over_a_.resize(n);
    sys.d_over_a_.resize(n);

    const double reaction = reaction_factor(H, in);
    const double delta = 1.0 + in.r * in.dt / in.eps * reaction;
    const double delta_num = in.eps * in.dt + in.r * in.dt * in.dt * reaction;
    for (std::size_t j = 0; j < n; ++j) {
        const double e = guarded_exp(eta_row[j], in.eps, in.exp_clamp);
        const double denom = in.eps + (1.0 + in.r) * in.dt * e;
        sys.inv_alpha_[j] = -in.eps * in.dt / denom;
        sys.g_over_a_[j] = in.dt * in.dv * in.m[j] / e / denom;
        sys.d_over_a_[j] = -delta_num / denom;
        sys.g_sum_ += sys.g_over_a_[j];
    }
    sys.common_delta_ = delta;
    sys.s_ = delta * sys.g_sum_;
    return sys;
}

void ArrowheadSystem::apply_inverse(std::span<const double> rhs, std::span<double> out,
                                    double s_floor) const {
    const std::size_t n = inv_alpha_.size();
    if (!(std::abs(s_) >= s_floor)) {
        std::ostringstream os;
        os << "singular arrowhead Schur complement S = " << s_;
        throw SolverError(os.str());
    }
    // Last row of the inverse: (sum_j (gamma_j/alpha_j) b_j - c) / S.
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += g_over_a_[j] * rhs[j];
    const double z = (acc - rhs[n]) / s_;
    if (common_delta_ != 0.0) {
        // delta z = (acc - c) / sum(gamma/alpha), free of delta.
        const double w = (acc - rhs[n]) / g_sum_;
        for (std::size_t j = 0; j < n; ++j) out[j] = inv_alpha_[j] * (rhs[j] - w);
    } else {
        for (std::size_t j = 0; j < n; ++j) out[j] = rhs[j] * inv_alpha_[j] - d_over_a_[j] * z;
    }
    out[n] = z;
}

CellSolution solve_cell(std::span<const double> eta_guess, double H_guess, const CellInputs& in,
                        const SchemeConfig& config) {
    const std::size_t nv = eta_guess.size();
    CellSolution sol;
    sol.eta.assign(eta_guess.begin(), eta_guess.end());
    sol.H = H_guess;

    std::vector<double> residual(nv + 1);
    std::vector<double> step(nv + 1);
    std::vector<double> trial_eta(nv);
    std::vector<double> trial_residual(nv + 1);

    cell_residual(sol.eta, sol.H, in, residual);
    double norm = max_abs(residual);
    int k = 0;
    for (;; ++k) {
        if (norm <= config.newton_tol) {
            if (config.polish && norm > 0.0) {
                // One more correction, kept only if it does not raise the residual.
                try {
                    const ArrowheadSystem jac = ArrowheadSystem::jacobian(sol.eta, sol.H, in);
                    jac.apply_inverse(residual, step, config.s_floor);
                    for (std::size_t j = 0; j < nv; ++j) trial_eta[j] = sol.eta[j] - step[j];
                    const double trial_H = sol.H - step[nv];
                    cell_residual(trial_eta, trial_H, in, trial_residual);
                    const double trial_norm = max_abs(trial_residual);
                    if (trial_norm <= norm) {
                        sol.eta.swap(trial_eta);
                        sol.H = trial_H;
                        norm = trial_norm;
                    }
                } catch (const std::runtime_error&) {
                }
            }
            sol.report = {k, norm, true};
            return sol;
        }
        if (k == config.newton_max_iter) break;

        const ArrowheadSystem jac = ArrowheadSystem::jacobian(sol.eta, sol.H, in);
        jac.apply_inverse(residual, step, config.s_floor);

        double lambda = 1.0;
        double trial_H = 0.0;
        double trial_norm = 0.0;
        for (int halvings = 0;; ++halvings) {
            for (std::size_t j = 0; j < nv; ++j) trial_eta[j] = sol.eta[j] - lambda * step[j];
            trial_H = sol.H - lambda * step[nv];
            cell_residual(trial_eta, trial_H, in, trial_residual);
            trial_norm = max_abs(trial_residual);
            if (!config.damping || trial_norm <= norm || halvings == 10) break;
            lambda *= 0.5;
        }
        sol.eta.swap(trial_eta);
        sol.H = trial_H;
        residual.swap(trial_residual);
        norm = trial_norm;
    }
    sol.report = {k, norm, false};
    std::ostringstream os;
    os << "Newton did not converge: " << k << " iterations, residual " << norm;
    throw SolverError(os.str());
}

void RunStats::merge(const RunStats& other) {
    if (iteration_histogram.size() < other.iteration_histogram.size()) {
        iteration_histogram.resize(other.iteration_histogram.size(), 0);
    }
    for (std::size_t k = 0; k < other.iteration_histogram.size(); ++k) {
        iteration_histogram[k] += other.iteration_histogram[k];
    }
    cell_solves += other.cell_solves;
    max_iterations = std::max(max_iterations, other.max_iterations);
    max_residual = std::max(max_residual, other.max_residual);
    max_exp_eta = std::max(max_exp_eta, other.max_exp_eta);
    max_exp_neg_eta = std::max(max_exp_neg_eta, other.max_exp_neg_eta);
    max_conservation_defect = std::max(max_conservation_defect, other.max_conservation_defect);
}

double RunStats::median_iterations() const {
    if (cell_solves == 0) return 0.0;
    // Lower and upper middle elements of the sorted iteration counts.
    const long lower_rank = (cell_solves - 1) / 2;
    const long upper_rank = cell_solves / 2;
    long seen = 0;
    double lower = -1.0;
    for (std::size_t k = 0; k < iteration_histogram.size(); ++k) {
        seen += iteration_histogram[k];
        if (lower < 0.0 && seen > lower_rank) lower = static_cast<double>(k);
        if (seen > upper_rank) return 0.5 * (lower + static_cast<double>(k));
    }
    return lower;
}

double RunStats::mean_iterations() const {
    if (cell_solves == 0) return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < iteration_histogram.size(); ++k) {
        total += static_cast<double>(k) * static_cast<double>(iteration_histogram[k]);
    }
    return total / static_cast<double>(cell_solves);
}

double MaxPrincipleReport::worst() const {
    return std::max({phi, psi, stability});
}

MaxPrincipleReport check_maximum_principle(const KineticField& next, double m, const Grid& grid) {
    auto excess = [m](double value) { return std::max({0.0, -value, value - m}); };
    MaxPrincipleReport rep;
    const double eps = next.eps;
    const double r = next.r;
    const double dt = grid.dt();
    for (int i = 0; i < grid.nx(); ++i) {
        const double phi = next.phi[static_cast<std::size_t>(i)];
        rep.phi = std::max(rep.phi, excess(phi));
        const double reaction = std::exp(-phi / eps);
        for (int j = 0; j < grid.nv(); ++j) {
            const double eta = next.eta(i, j);
            const double psi = phi + eta;
            rep.psi = std::max(rep.psi, excess(psi));
            const double e = std::exp(eta / eps);
            // e^{eta/eps} (1 - e^{-(phi+eta)/eps}) written as e^{eta/eps} - e^{-phi/eps}.
            const double third = psi - dt * (1.0 - e) + r * dt * (e - reaction);
            rep.stability = std::max(rep.stability, excess(third));
        }
    }
    return rep;
}

bool has_sign_change(std::span<const double> eta_row, double slack) {
    const auto [lo, hi] = std::minmax_element(eta_row.begin(), eta_row.end());
    return *lo <= slack && *hi >= -slack;
}

MicroMacroSolver::MicroMacroSolver(Grid grid, Equilibrium eq, SchemeConfig config)
    : grid_(std::move(grid)), eq_(std::move(eq)), config_(config) {
    if (!(config_.eps > 0.0)) throw ConfigError("epsilon must be positive");
    if (config_.r < 0.0) throw ConfigError("reaction rate r must be nonnegative");
    if (eq_.size() != grid_.nv()) throw ConfigError("equilibrium does not match the velocity grid");
    if (config_.newton_max_iter < 1) throw ConfigError("newton_max_iter must be positive");
}

KineticField MicroMacroSolver::initial(std::span<const double> phi_in) const {
    if (static_cast<int>(phi_in.size()) != grid_.nx()) {
        throw ConfigError("initial phase must have one value per space node");
    }
    for (double value : phi_in) {
        if (!std::isfinite(value)) throw ConfigError("initial phase must be finite (cap infinite data)");
    }
    KineticField state;
    state.phi.assign(phi_in.begin(), phi_in.end());
    state.eta = PhaseSpaceArray(grid_.nx(), grid_.nv(), 0.0);
    state.H.assign(phi_in.size(), 0.0);
    state.eps = config_.eps;
    state.r = config_.r;
    if (config_.h_init == HInit::Limit) {
        try {
            const auto hams = cell_hamiltonians(state.phi, grid_, eq_, config_.r);
            for (std::size_t i = 0; i < hams.size(); ++i) state.H[i] = hams[i].value;
        } catch (const UnsupportedError&) {
            std::fill(state.H.begin(), state.H.end(), 0.0);
        }
    }
    return state;
}

RunStats MicroMacroSolver::step(KineticField& state) const {
    const int nx = grid_.nx();
    const int nv = grid_.nv();
    const double dt = grid_.dt();
    const double eps = config_.eps;

    PhaseSpaceArray transport(nx, nv);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nv; ++j) transport(i, j) = upwind_transport(state.phi, state.eta, i, j, grid_);
    }

    PhaseSpaceArray eta_next(nx, nv);
    std::vector<double> H_next(static_cast<std::size_t>(nx));
    RunStats stats;
    stats.iteration_histogram.assign(static_cast<std::size_t>(config_.newton_max_iter) + 1, 0);

    CellInputs in;
    in.m = eq_.values();
    in.dv = eq_.dv();
    in.eps = eps;
    in.r = config_.r;
    in.dt = dt;
    in.exp_clamp = config_.exp_clamp;

    for (int i = 0; i < nx; ++i) {
        in.eta_prev = state.eta.row(i);
        in.phi_prev = state.phi[static_cast<std::size_t>(i)];
        in.transport = transport.row(i);
        double H_guess = state.H[static_cast<std::size_t>(i)];
        if (config_.project_h_guess && config_.r > 0.0) {
            H_guess = std::min(H_guess, in.phi_prev / dt - config_.r);
        }
        CellSolution sol;
        try {
            sol = solve_cell(state.eta.row(i), H_guess, in, config_);
        } catch (const SolverError& e) {
            std::ostringstream os;
            os << e.what() << " [cell " << i << ", step " << state.n << "]";
            throw SolverError(os.str(), i, state.n);
        } catch (const OverflowError& e) {
            std::ostringstream os;
            os << e.what() << " [cell " << i << ", step " << state.n << "]";
            throw OverflowError(os.str());
        }
        std::copy(sol.eta.begin(), sol.eta.end(), eta_next.row(i).begin());
        H_next[static_cast<std::size_t>(i)] = sol.H;

        ++stats.iteration_histogram[static_cast<std::size_t>(sol.report.iterations)];
        ++stats.cell_solves;
        stats.max_iterations = std::max(stats.max_iterations, sol.report.iterations);
        stats.max_residual = std::max(stats.max_residual, sol.report.residual);
        double mass = 0.0;
        for (int j = 0; j < nv; ++j) {
            const double e = std::exp(sol.eta[static_cast<std::size_t>(j)] / eps);
            stats.max_exp_eta = std::max(stats.max_exp_eta, e);
            stats.max_exp_neg_eta = std::max(stats.max_exp_neg_eta, 1.0 / e);
            mass += eq_[j] / e;
        }
        stats.max_conservation_defect =
            std::max(stats.max_conservation_defect, std::abs(eq_.dv() * mass - 1.0));
    }

    for (int i = 0; i < nx; ++i) {
        const auto k = static_cast<std::size_t>(i);
        state.phi[k] -= dt * (H_next[k] + config_.r);
    }
    state.eta = std::move(eta_next);
    state.H = std::move(H_next);
    ++state.n;
    state.time = state.n * dt;
    return stats;
}

MicroMacroSolver::Result MicroMacroSolver::run(std::span<const double> phi_in,
                                               std::span<const double> snapshot_times) const {
    const std::vector<int> wanted = snapshot_steps(grid_, snapshot_times);
    Result result;
    KineticField state = initial(phi_in);
    result.phi_bound = *std::max_element(state.phi.begin(), state.phi.end());
    result.stats.iteration_histogram.assign(static_cast<std::size_t>(config_.newton_max_iter) + 1, 0);
    result.per_step.reserve(static_cast<std::size_t>(grid_.nt()));

    auto next_wanted = wanted.begin();
    auto record = [&]() {
        while (next_wanted != wanted.end() && *next_wanted == state.n) {
            result.snapshots.push_back(state);
            ++next_wanted;
        }
    };
    record();
    for (int n = 0; n < grid_.nt(); ++n) {
        const RunStats stats = step(state);
        result.per_step.push_back({stats.median_iterations(), stats.max_iterations, stats.max_residual});
        result.stats.merge(stats);
        if (config_.check_invariants) {
            const MaxPrincipleReport rep = check_maximum_principle(state, result.phi_bound, grid_);
            if (rep.worst() > 1e-10) {
                std::ostringstream os;
                os.precision(3);
                os << "discrete maximum principle violated at step " << state.n << ": phi " << rep.phi
                   << ", phi+eta " << rep.psi << ", stability " << rep.stability;
                throw InvariantViolation(os.str());
            }
        }
        record();
    }
    return result;
}

}  // namespace apk
