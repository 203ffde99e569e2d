#include "apk/initial_data.hpp"

#include <algorithm>
#include <cmath>

#include "apk/errors.hpp"

namespace apk {

double two_minima(double x) {
    return std::min((x + 0.5) * (x + 0.5), 0.5 * (x - 0.5) * (x - 0.5) + 0.05);
}

std::vector<double> initial_phase(const RunConfig& cfg, const Grid& grid) {
    const int nx = grid.nx();
    std::vector<double> phi(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) {
        const double x = grid.x(i);
        double value = 0.0;
        if (cfg.initial == "quadratic") {
            value = x * x;
        } else if (cfg.initial == "two_minima") {
            value = two_minima(x);
        } else if (cfg.initial == "left_step") {
            value = x < cfg.step_position ? 0.0 : cfg.phi_cap;
        } else if (cfg.initial == "tabulated") {
            if (static_cast<int>(cfg.initial_values.size()) != nx) {
                throw ConfigError("tabulated initial data needs one value per space node");
            }
            value = cfg.initial_values[static_cast<std::size_t>(i)];
            if (std::isnan(value)) throw ConfigError("tabulated initial data contains NaN");
        } else {
            throw ConfigError("unknown initial data '" + cfg.initial + "'");
        }
        phi[static_cast<std::size_t>(i)] = std::min(value, cfg.phi_cap);
    }
    return phi;
}

}  // namespace apk
