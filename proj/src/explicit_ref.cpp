#include "apk/explicit_ref.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "apk/errors.hpp"

namespace apk {

std::vector<double> densities(const PhaseSpaceArray& f, double dv) {
    std::vector<double> rho(static_cast<std::size_t>(f.nx()));
    for (int i = 0; i < f.nx(); ++i) rho[static_cast<std::size_t>(i)] = quadrature(f.row(i), dv);
    return rho;
}

StabilityAdvice explicit_stability(const Grid& grid, double eps, double r) {
    StabilityAdvice adv;
    adv.dt_limit = 0.9 * std::min(grid.dx() / grid.v_max(), eps / (1.0 + 2.0 * r));
    if (grid.dt() > adv.dt_limit) {
        adv.ok = false;
        std::ostringstream os;
        os << "explicit scheme may be unstable: dt = " << grid.dt() << " exceeds advisory limit "
           << adv.dt_limit << " (eps = " << eps << ", r = " << r << ")";
        adv.message = os.str();
    }
    return adv;
}

DistributionField explicit_step(const DistributionField& field, const Grid& grid,
                                const Equilibrium& eq) {
    const int nx = grid.nx();
    const int nv = grid.nv();
    const double dt = grid.dt();
    const double lambda = dt / grid.dx();
    const double relax = dt / field.eps;
    const double r = field.r;

    DistributionField next;
    next.eps = field.eps;
    next.r = r;
    next.n = field.n + 1;
    next.time = next.n * dt;
    next.f = PhaseSpaceArray(nx, nv);
    for (int i = 0; i < nx; ++i) {
        const int im = grid.resolve(i - 1);
        const int ip = grid.resolve(i + 1);
        const double rho = field.rho[static_cast<std::size_t>(i)];
        for (int j = 0; j < nv; ++j) {
            const double v = grid.v(j);
            const double f = field.f(i, j);
            const double transport = v > 0.0 ? v * (f - field.f(im, j)) : v * (field.f(ip, j) - f);
            const double m = eq[j];
            const double value = f - lambda * transport + relax * (rho * m - f + r * rho * (m - f));
            if (!std::isfinite(value)) {
                std::ostringstream os;
                os << "non-finite density in explicit step " << field.n << " at (" << i << ", " << j << ")";
                throw OverflowError(os.str());
            }
            next.f(i, j) = value;
        }
    }
    next.rho = densities(next.f, grid.dv());
    return next;
}

HopfColeField to_hopf_cole(const DistributionField& field, const Equilibrium& eq) {
    const int nx = field.f.nx();
    const int nv = field.f.nv();
    const double eps = field.eps;
    HopfColeField out;
    out.phi.resize(static_cast<std::size_t>(nx));
    out.eta = PhaseSpaceArray(nx, nv, std::numeric_limits<double>::quiet_NaN());
    out.mask.resize(static_cast<std::size_t>(nv));
    for (int j = 0; j < nv; ++j) out.mask[static_cast<std::size_t>(j)] = eq[j] > 0.0 ? 1 : 0;

    auto safe_log = [&out](double x) {
        if (!(x >= kLogFloor)) {
            out.capped = true;
            x = kLogFloor;
        }
        return std::log(x);
    };
    for (int i = 0; i < nx; ++i) {
        const double rho = field.rho[static_cast<std::size_t>(i)];
        out.phi[static_cast<std::size_t>(i)] = -eps * safe_log(rho);
        const double rho_safe = std::max(rho, kLogFloor);
        for (int j = 0; j < nv; ++j) {
            if (eq[j] == 0.0) continue;
            out.eta(i, j) = -eps * safe_log(field.f(i, j) / (rho_safe * eq[j]));
        }
    }
    return out;
}

DistributionField from_hopf_cole(std::span<const double> phi, const PhaseSpaceArray& eta,
                                 double eps, double r, const Equilibrium& eq, double exp_clamp) {
    const int nx = eta.nx();
    const int nv = eta.nv();
    DistributionField out;
    out.eps = eps;
    out.r = r;
    out.f = PhaseSpaceArray(nx, nv);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nv; ++j) {
            if (eq[j] == 0.0) continue;
            const double z = -(phi[static_cast<std::size_t>(i)] + eta(i, j)) / eps;
            if (!std::isfinite(z)) throw OverflowError("non-finite Hopf-Cole phase");
            out.f(i, j) = eq[j] * std::exp(std::clamp(z, -exp_clamp, exp_clamp));
        }
    }
    out.rho = densities(out.f, eq.dv());
    return out;
}

ExplicitResult run_explicit(std::span<const double> phi_in, const Grid& grid,
                            const Equilibrium& eq, double eps, double r,
                            std::span<const double> snapshot_times) {
    if (static_cast<int>(phi_in.size()) != grid.nx()) {
        throw ConfigError("initial phase must have one value per space node");
    }
    if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
    if (r < 0.0) throw ConfigError("reaction rate r must be nonnegative");

    ExplicitResult result;
    result.advice = explicit_stability(grid, eps, r);
    const std::vector<int> wanted = snapshot_steps(grid, snapshot_times);

    DistributionField state = from_hopf_cole(phi_in, PhaseSpaceArray(grid.nx(), grid.nv(), 0.0), eps, r, eq);
    auto flat_min = [](const PhaseSpaceArray& f) {
        const auto values = f.flat();
        return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
    };
    result.min_f = flat_min(state.f);

    auto next_wanted = wanted.begin();
    auto record = [&]() {
        while (next_wanted != wanted.end() && *next_wanted == state.n) {
            result.snapshots.push_back(state);
            ++next_wanted;
        }
    };
    record();
    for (int n = 0; n < grid.nt(); ++n) {
        state = explicit_step(state, grid, eq);
        for (double value : state.f.flat()) {
            if (value < 0.0) ++result.negative_entries;
        }
        result.min_f = std::min(result.min_f, flat_min(state.f));
        record();
    }
    return result;
}

}  // namespace apk
