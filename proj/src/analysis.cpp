#include "apk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apk/errors.hpp"
#include "apk/hj_limit.hpp"

namespace apk {

double sup_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("sup_error: fields have different sizes");
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        diff = std::max(diff, std::abs(a[k] - b[k]));
        norm = std::max(norm, std::abs(a[k]));
    }
    if (norm == 0.0) throw ValidationError("sup_error: reference field is identically zero");
    return diff / norm;
}

Restriction restrict_to(std::span<const double> fine, const Grid& fine_grid, const Grid& coarse_grid) {
    if (static_cast<int>(fine.size()) != fine_grid.nx()) {
        throw ValidationError("restrict_to: field does not match the fine grid");
    }
    if (std::abs(fine_grid.x_max() - coarse_grid.x_max()) > 1e-12 * fine_grid.x_max()) {
        throw ValidationError("restrict_to: grids cover different boxes");
    }
    const int nf = fine_grid.nx();
    const int nc = coarse_grid.nx();
    Restriction out;
    out.values.resize(static_cast<std::size_t>(nc));
    if (nf % nc == 0 && (nf / nc) % 2 == 1) {
        const int k = nf / nc;
        for (int i = 0; i < nc; ++i) {
            out.values[static_cast<std::size_t>(i)] = fine[static_cast<std::size_t>(k * i + (k - 1) / 2)];
        }
        return out;
    }
    out.exact = false;
    const double x0 = fine_grid.x(0);
    const double h = fine_grid.dx();
    for (int i = 0; i < nc; ++i) {
        const double s = (coarse_grid.x(i) - x0) / h;
        const int left = std::clamp(static_cast<int>(std::floor(s)), 0, nf - 2);
        const double w = std::clamp(s - left, 0.0, 1.0);
        out.values[static_cast<std::size_t>(i)] =
            (1.0 - w) * fine[static_cast<std::size_t>(left)] + w * fine[static_cast<std::size_t>(left + 1)];
    }
    return out;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ValidationError("least_squares needs two or more (x, y) pairs");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) throw ValidationError("least_squares: abscissae are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double e = y[k] - (fit.slope * x[k] + fit.intercept);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    fit.samples = static_cast<int>(x.size());
    return fit;
}

namespace {

// First index k with below(values[k]), interpolated against the level between
// k-1 and k.
template <class Below>
double first_crossing(std::span<const double> values, std::span<const double> xs, double level,
                      Below below, const char* what) {
    if (values.size() != xs.size() || values.empty()) {
        throw ValidationError("front tracking: field and node arrays differ in size");
    }
    if (below(values[0])) {
        throw DomainExhausted(std::string(what) + " already crossed at the left boundary");
    }
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (!below(values[k])) continue;
        const double a = values[k - 1];
        const double b = values[k];
        const double w = (a == b) ? 0.5 : (a - level) / (a - b);
        return xs[k - 1] + std::clamp(w, 0.0, 1.0) * (xs[k] - xs[k - 1]);
    }
    throw DomainExhausted(std::string(what) + " has no crossing inside the domain");
}

}  // namespace

double front_position(std::span<const double> rho, std::span<const double> xs, double threshold) {
    return first_crossing(rho, xs, threshold, [threshold](double v) { return v < threshold; }, "density");
}

double phase_front_position(std::span<const double> phi, std::span<const double> xs, double level) {
    return first_crossing(phi, xs, level, [level](double v) { return v > level; }, "phase");
}

LinearFit fit_front_speed(const FrontTrack& track, double skip_fraction) {
    if (track.times.size() != track.positions.size()) {
        throw ValidationError("front track: times and positions differ in size");
    }
    const std::size_t n = track.times.size();
    const auto skip = static_cast<std::size_t>(std::ceil(skip_fraction * static_cast<double>(n)));
    if (n < skip + 5) {
        std::ostringstream os;
        os << "front track has " << (n > skip ? n - skip : 0) << " samples after the transient window, need 5";
        throw ValidationError(os.str());
    }
    return least_squares(std::span(track.times).subspan(skip), std::span(track.positions).subspan(skip));
}

double speed_function(double p, double r, const Equilibrium& eq) {
    return (eval_hamiltonian(p, r, eq).value + r) / p;
}

SpeedOracle speed_oracle(double r, const Equilibrium& eq, double p_min, double p_max, int n, double p_tol) {
    if (!(r > 0.0)) throw ConfigError("speed_oracle needs r > 0");
    if (!(p_min > 0.0) || !(p_max > p_min) || n < 3) {
        throw ConfigError("speed_oracle needs 0 < p_min < p_max and n >= 3");
    }
    SpeedOracle out;
    out.p.resize(static_cast<std::size_t>(n));
    out.c.resize(static_cast<std::size_t>(n));
    const double log_lo = std::log(p_min);
    const double step = (std::log(p_max) - log_lo) / (n - 1);
    std::size_t best = 0;
    for (int k = 0; k < n; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        out.p[kk] = std::exp(log_lo + k * step);
        out.c[kk] = speed_function(out.p[kk], r, eq);
        if (out.c[kk] < out.c[best]) best = kk;
    }
    if (best == 0 || best + 1 == out.p.size()) {
        std::ostringstream os;
        os << "minimum of c(p) at the scan edge p = " << out.p[best] << "; widen [p_min, p_max]";
        throw ConfigError(os.str());
    }

    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = out.p[best - 1];
    double b = out.p[best + 1];
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = speed_function(x1, r, eq);
    double f2 = speed_function(x2, r, eq);
    while (b - a > p_tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = speed_function(x1, r, eq);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = speed_function(x2, r, eq);
        }
    }
    out.p_star = 0.5 * (a + b);
    out.c_star = std::min({speed_function(out.p_star, r, eq), f1, f2, out.c[best]});
    return out;
}

std::vector<OrderFit> order_fit(const ConvergenceTable& table) {
    std::vector<double> eps_values;
    for (const auto& row : table.rows) {
        if (std::find(eps_values.begin(), eps_values.end(), row.eps) == eps_values.end()) {
            eps_values.push_back(row.eps);
        }
    }
    std::vector<OrderFit> fits;
    for (double eps : eps_values) {
        OrderFit fit;
        fit.eps = eps;
        std::vector<double> lx;
        std::vector<double> ly;
        for (const auto& row : table.rows) {
            if (row.eps != eps) continue;
            if (!(row.error > 0.0) || !(row.dx > 0.0)) {
                std::ostringstream os;
                os << "eps = " << eps << ": dropped row dx = " << row.dx << " with error " << row.error;
                fit.warnings.push_back(os.str());
                continue;
            }
            lx.push_back(std::log(row.dx));
            ly.push_back(std::log(row.error));
        }
        if (lx.size() < 3) {
            std::ostringstream os;
            os << "order fit for eps = " << eps << " has " << lx.size() << " usable rows, need 3";
            throw ValidationError(os.str());
        }
        fit.fit = least_squares(lx, ly);
        fits.push_back(std::move(fit));
    }
    return fits;
}

}  // namespace apk
