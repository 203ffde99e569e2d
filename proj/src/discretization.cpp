#include "apk/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apk/errors.hpp"

namespace apk {

std::string to_string(Boundary b) {
    return b == Boundary::Periodic ? "periodic" : "neumann";
}

std::string to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::Uniform: return "uniform";
        case EquilibriumKind::SingularParabolic: return "singular_parabolic";
        case EquilibriumKind::Custom: return "custom";
    }
    return "unknown";
}

namespace {

std::vector<double> centred_nodes(double half_width, int n) {
    const double h = 2.0 * half_width / n;
    std::vector<double> nodes(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        nodes[static_cast<std::size_t>(k)] = -half_width + 0.5 * h + k * h;
    }
    // Mirror the upper half so that x_k + x_{n-1-k} == 0 holds bit-exactly.
    for (int k = 0; k < n / 2; ++k) {
        nodes[static_cast<std::size_t>(n - 1 - k)] = -nodes[static_cast<std::size_t>(k)];
    }
    return nodes;
}

void require_even_positive(int n, const char* name) {
    if (n <= 0 || n % 2 != 0) {
        std::ostringstream os;
        os << name << " must be a positive even count, got " << n;
        throw ConfigError(os.str());
    }
}

}  // namespace

Grid Grid::build(double x_max, int n_x, double v_max, int n_v, double t_final, int n_t,
                 Boundary boundary) {
    require_even_positive(n_x, "n_x");
    require_even_positive(n_v, "n_v");
    if (!(x_max > 0.0) || !std::isfinite(x_max)) throw ConfigError("x_max must be positive");
    if (!(v_max > 0.0) || !std::isfinite(v_max)) throw ConfigError("v_max must be positive");
    if (n_t < 0) throw ConfigError("n_t must be nonnegative");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final must be nonnegative");
    if (n_t == 0 && t_final != 0.0) throw ConfigError("n_t = 0 requires t_final = 0");
    if (n_t > 0 && t_final == 0.0) throw ConfigError("t_final = 0 requires n_t = 0");

    Grid g;
    g.x_max_ = x_max;
    g.v_max_ = v_max;
    g.t_final_ = t_final;
    g.n_t_ = n_t;
    g.dx_ = 2.0 * x_max / n_x;
    g.dv_ = 2.0 * v_max / n_v;
    g.dt_ = n_t > 0 ? t_final / n_t : 0.0;
    g.boundary_ = boundary;
    g.x_ = centred_nodes(x_max, n_x);
    g.v_ = centred_nodes(v_max, n_v);

    const double ratio = g.cfl();
    if (!(ratio < 1.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "CFL violated: v_max*dt/dx = " << ratio << " (must be < 1)";
        throw ConfigError(os.str());
    }
    return g;
}

Grid Grid::with_time(double t_final, int n_t) const {
    return build(x_max_, nx(), v_max_, nv(), t_final, n_t, boundary_);
}

int Grid::resolve(int i) const {
    const int n = nx();
    if (i >= 0 && i < n) return i;
    if (boundary_ == Boundary::Periodic) return ((i % n) + n) % n;
    return i < 0 ? 0 : n - 1;
}

std::vector<int> snapshot_steps(const Grid& grid, std::span<const double> times) {
    std::vector<int> steps;
    if (times.empty()) {
        steps.push_back(grid.nt());
        return steps;
    }
    const double slack = 1e-9 * std::max(1.0, grid.t_final());
    for (double t : times) {
        if (!(t >= -slack) || t > grid.t_final() + slack) {
            std::ostringstream os;
            os << "snapshot time " << t << " outside [0, " << grid.t_final() << "]";
            throw ConfigError(os.str());
        }
        const int n = grid.nt() == 0 ? 0 : static_cast<int>(std::lround(t / grid.dt()));
        steps.push_back(std::clamp(n, 0, grid.nt()));
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    return steps;
}

double quadrature(std::span<const double> f, double dv) {
    double sum = 0.0;
    for (double value : f) sum += value;
    return dv * sum;
}

void Equilibrium::finalize(std::vector<double> raw) {
    const double mass = quadrature(raw, dv_);
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw ValidationError("equilibrium has no positive mass");
    }
    normalization_ = 1.0 / mass;
    for (double& value : raw) value *= normalization_;
    m_ = std::move(raw);
}

Equilibrium Equilibrium::build(EquilibriumKind kind, const Grid& grid) {
    Equilibrium eq;
    eq.kind_ = kind;
    eq.dv_ = grid.dv();
    eq.v_max_ = grid.v_max();
    eq.v_.assign(grid.vs().begin(), grid.vs().end());

    const auto n = static_cast<std::size_t>(grid.nv());
    std::vector<double> raw(n);
    switch (kind) {
        case EquilibriumKind::Uniform:
            std::fill(raw.begin(), raw.end(), 1.0);
            break;
        case EquilibriumKind::SingularParabolic: {
            // Vanishes at +-(v_max - dv/2), the outermost velocity nodes.
            const double edge = grid.v_max() - 0.5 * grid.dv();
            for (std::size_t j = 0; j < n; ++j) {
                raw[j] = std::max(0.0, edge * edge - eq.v_[j] * eq.v_[j]);
            }
            break;
        }
        case EquilibriumKind::Custom:
            throw ValidationError("custom equilibria must be built with Equilibrium::custom");
    }
    eq.finalize(std::move(raw));
    if (kind == EquilibriumKind::Uniform) {
        // 1/(n_v dv) exactly, rather than the rounded product of the rescale.
        std::fill(eq.m_.begin(), eq.m_.end(), 1.0 / (grid.nv() * grid.dv()));
    }
    return eq;
}

Equilibrium Equilibrium::custom(std::span<const double> values, const Grid& grid) {
    if (static_cast<int>(values.size()) != grid.nv()) {
        throw ValidationError("custom equilibrium needs one value per velocity node");
    }
    const std::size_t n = values.size();
    int positive = 0;
    double scale = 0.0;
    for (double value : values) {
        if (!std::isfinite(value) || value < 0.0) {
            throw ValidationError("custom equilibrium values must be finite and nonnegative");
        }
        if (value > 0.0) ++positive;
        scale = std::max(scale, value);
    }
    if (positive < 2) {
        throw ValidationError("custom equilibrium needs at least two nodes with M_j > 0");
    }
    std::vector<double> raw(values.begin(), values.end());
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double a = raw[j];
        const double b = raw[n - 1 - j];
        if (std::abs(a - b) > 1e-12 * scale) {
            throw ValidationError("custom equilibrium must be even in v");
        }
        const double mean = 0.5 * (a + b);
        raw[j] = mean;
        raw[n - 1 - j] = mean;
    }

    Equilibrium eq;
    eq.kind_ = EquilibriumKind::Custom;
    eq.dv_ = grid.dv();
    eq.v_max_ = grid.v_max();
    eq.v_.assign(grid.vs().begin(), grid.vs().end());
    eq.finalize(std::move(raw));
    return eq;
}

double Equilibrium::min_positive_weight() const {
    double lowest = 0.0;
    for (double value : m_) {
        if (value > 0.0 && (lowest == 0.0 || value < lowest)) lowest = value;
    }
    return dv_ * lowest;
}

bool Equilibrium::has_zero_nodes() const {
    return std::any_of(m_.begin(), m_.end(), [](double value) { return value == 0.0; });
}

}  // namespace apk
