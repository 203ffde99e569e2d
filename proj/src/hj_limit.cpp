#include "apk/hj_limit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "apk/errors.hpp"

namespace apk {

std::string to_string(HamiltonianBranch b) {
    return b == HamiltonianBranch::Implicit ? "implicit" : "singular_boundary";
}

namespace {

constexpr int kMaxRootIterations = 200;

// Quadrature G(s) = dv * sum_j M_j / (s + c_j) and its s-derivative, where
// s = H - H_edge and c_j >= 0 is the offset of node j from the edge.
struct QuadratureValue {
    double g = 0.0;
    double dg = 0.0;
};

QuadratureValue shifted_quadrature(double s, std::span<const double> m, std::span<const double> c,
                                   double dv) {
    QuadratureValue out;
    for (std::size_t j = 0; j < m.size(); ++j) {
        if (m[j] == 0.0) continue;
        const double inv = 1.0 / (s + c[j]);
        out.g += m[j] * inv;
        out.dg -= m[j] * inv * inv;
    }
    out.g *= dv;
    out.dg *= dv;
    return out;
}

}  // namespace

HamiltonianEval eval_hamiltonian(double p, double q, double r, const Equilibrium& eq, double tol) {
    if (!std::isfinite(p) || !std::isfinite(q)) {
        throw OverflowError("non-finite slope passed to eval_hamiltonian");
    }
    const std::span<const double> v = eq.velocities();
    const std::span<const double> m = eq.values();
    const std::size_t n = v.size();

    // a_j = v+ p + v- q; denominators are 1 + r + H - a_j.
    std::vector<double> a(n);
    double a_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        a[j] = v[j] > 0.0 ? v[j] * p : v[j] * q;
        a_max = std::max(a_max, a[j]);
    }
    const double edge = a_max - (1.0 + r);
    std::vector<double> c(n);
    bool divergent_edge = false;
    double edge_weight = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        c[j] = a_max - a[j];
        if (c[j] == 0.0 && m[j] > 0.0) {
            divergent_edge = true;
            edge_weight += m[j];
        }
    }
    edge_weight *= eq.dv();

    const double target = 1.0 / (1.0 + r);
    HamiltonianEval out;
    out.p = p;
    out.q = q;

    double s = 0.0;
    if (divergent_edge) {
        // G(s) >= edge_weight / s, so this start lies left of the root.
        s = edge_weight / target;
    } else {
        const QuadratureValue at_edge = shifted_quadrature(0.0, m, c, eq.dv());
        if (at_edge.g <= target) {
            if (r > 0.0) {
                std::ostringstream os;
                os << "no admissible Hamiltonian root for r = " << r << " at (p, q) = (" << p << ", "
                   << q << "); singular equilibria are supported for r = 0 only";
                throw UnsupportedError(os.str());
            }
            out.value = edge;
            out.branch = HamiltonianBranch::SingularBoundary;
            return out;
        }
    }

    // Newton on f(s) = 1/G(s) - 1/target: f is concave increasing, so iterates
    // started left of the root approach it monotonically. The bracket guards
    // against round-off driving an iterate outside (lo, hi).
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= kMaxRootIterations; ++it) {
        const QuadratureValue gv = shifted_quadrature(s, m, c, eq.dv());
        out.iterations = it;
        const double residual = gv.g - target;
        if (std::abs(residual) <= tol) {
            // Final Newton correction: the error left by the residual test is
            // residual / G', well above round-off when G' is small.
            const double corrected = s - (1.0 / gv.g - 1.0 / target) * (gv.g * gv.g) / -gv.dg;
            out.value = edge + (std::isfinite(corrected) && corrected > lo && corrected < hi ? corrected : s);
            return out;
        }
        if (residual > 0.0) {
            lo = std::max(lo, s);
        } else {
            hi = std::min(hi, s);
        }
        const double f = 1.0 / gv.g - 1.0 / target;
        const double df = -gv.dg / (gv.g * gv.g);
        double next = s - f / df;
        if (!(next > lo && next < hi)) {
            next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * std::max(s, 1.0);
        }
        if (next == s || (std::isfinite(hi) && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)) {
            out.value = edge + next;
            return out;
        }
        s = next;
    }
    std::ostringstream os;
    os << "Hamiltonian root solve did not converge at (p, q) = (" << p << ", " << q << ")";
    throw SolverError(os.str());
}

double mu(double p, const Equilibrium& eq) {
    return eq.v_extent() * std::abs(p);
}

double sing_quantity(double p, const Equilibrium& eq) {
    const double mu_p = mu(p, eq);
    double sum = 0.0;
    for (int j = 0; j < eq.size(); ++j) {
        const double denom = mu_p - eq.v(j) * p;
        if (eq[j] == 0.0) continue;
        if (denom <= 0.0) return std::numeric_limits<double>::infinity();
        sum += eq[j] / denom;
    }
    return eq.dv() * sum;
}

bool in_sing_set(double p, const Equilibrium& eq) {
    if (p == 0.0) return false;
    return sing_quantity(p, eq) <= 1.0;
}

std::vector<HamiltonianEval> cell_hamiltonians(std::span<const double> phi, const Grid& grid,
                                               const Equilibrium& eq, double r, double tol) {
    const int nx = grid.nx();
    std::vector<HamiltonianEval> out(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) {
        const double centre = phi[static_cast<std::size_t>(i)];
        const double left = phi[static_cast<std::size_t>(grid.resolve(i - 1))];
        const double right = phi[static_cast<std::size_t>(grid.resolve(i + 1))];
        const double p = (centre - left) / grid.dx();
        const double q = (right - centre) / grid.dx();
        try {
            out[static_cast<std::size_t>(i)] = eval_hamiltonian(p, q, r, eq, tol);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " [cell " + std::to_string(i) + "]", i);
        }
    }
    return out;
}

HJField limit_step(const HJField& field, const Grid& grid, const Equilibrium& eq, double r,
                   double tol) {
    const auto hams = cell_hamiltonians(field.phi, grid, eq, r, tol);
    HJField next;
    next.r = r;
    next.n = field.n + 1;
    next.time = next.n * grid.dt();
    next.phi.resize(field.phi.size());
    next.H.resize(field.phi.size());
    for (std::size_t i = 0; i < field.phi.size(); ++i) {
        const double H = hams[i].value;
        next.H[i] = H;
        if (r > 0.0) {
            next.phi[i] = std::max(0.0, field.phi[i] - grid.dt() * (H + r));
        } else {
            next.phi[i] = field.phi[i] - grid.dt() * H;
        }
    }
    return next;
}

std::vector<HJField> run_limit(std::span<const double> phi_in, const Grid& grid,
                               const Equilibrium& eq, double r,
                               std::span<const double> snapshot_times, double tol) {
    if (static_cast<int>(phi_in.size()) != grid.nx()) {
        throw ConfigError("initial phase must have one value per space node");
    }
    if (r < 0.0) throw ConfigError("reaction rate r must be nonnegative");
    const std::vector<int> wanted = snapshot_steps(grid, snapshot_times);

    HJField state;
    state.r = r;
    state.phi.assign(phi_in.begin(), phi_in.end());
    state.H.assign(phi_in.size(), 0.0);

    std::vector<HJField> snapshots;
    auto next_wanted = wanted.begin();
    auto record = [&]() {
        while (next_wanted != wanted.end() && *next_wanted == state.n) {
            snapshots.push_back(state);
            ++next_wanted;
        }
    };
    record();
    for (int n = 0; n < grid.nt(); ++n) {
        try {
            state = limit_step(state, grid, eq, r, tol);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " [step " + std::to_string(n) + "]", e.cell(), n);
        }
        record();
    }
    return snapshots;
}

bool MonotonicityEstimate::within_bounds(double tol) const {
    return d_left >= -tol && d_left <= cfl + tol && d_right >= -tol && d_right <= cfl + tol &&
           d_center >= 1.0 - cfl - tol && d_center <= 1.0 + tol;
}

MonotonicityEstimate monotonicity_check(const std::array<double, 3>& phi, double r,
                                        const Equilibrium& eq, const Grid& grid, double fd_step) {
    auto scheme_map = [&](const std::array<double, 3>& s) {
        const double p = (s[1] - s[0]) / grid.dx();
        const double q = (s[2] - s[1]) / grid.dx();
        return s[1] - grid.dt() * (eval_hamiltonian(p, q, r, eq).value + r);
    };
    auto partial = [&](int k) {
        std::array<double, 3> plus = phi;
        std::array<double, 3> minus = phi;
        plus[static_cast<std::size_t>(k)] += fd_step;
        minus[static_cast<std::size_t>(k)] -= fd_step;
        return (scheme_map(plus) - scheme_map(minus)) / (2.0 * fd_step);
    };
    MonotonicityEstimate est;
    est.d_left = partial(0);
    est.d_center = partial(1);
    est.d_right = partial(2);
    est.cfl = grid.cfl();
    return est;
}

}  // namespace apk
