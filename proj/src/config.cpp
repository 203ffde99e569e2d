#include "apk/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "apk/errors.hpp"
#include "apk/output.hpp"

namespace apk {

std::string to_string(SolverKind s) {
    switch (s) {
        case SolverKind::MicroMacro: return "micromacro";
        case SolverKind::ExplicitRef: return "explicit";
        case SolverKind::HJLimit: return "hj_limit";
    }
    return "unknown";
}

SchemeConfig RunConfig::scheme() const {
    SchemeConfig sc;
    sc.eps = eps;
    sc.r = r;
    sc.newton_tol = newton_tol;
    sc.newton_max_iter = newton_max_iter;
    sc.damping = damping;
    sc.polish = polish;
    sc.h_init = h_init;
    sc.project_h_guess = project_h_guess;
    sc.check_invariants = check_invariants;
    return sc;
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// Lower case with '_' and '-' removed, for enum spellings.
std::string canonical(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '_' || c == '-' || c == ' ') continue;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    std::ostringstream os;
    os << "invalid value '" << value << "' for key '" << key << "': expected " << expected;
    throw ConfigError(os.str());
}

double parse_double(std::string_view key, std::string_view text) {
    const std::string value = trim(text);
    double out = 0.0;
    const char* begin = value.data();
    const char* end = value.data() + value.size();
    if (!value.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, out);
    if (value.empty() || res.ec != std::errc() || res.ptr != end || std::isnan(out)) {
        bad_value(key, value, "a number");
    }
    return out;
}

double parse_finite(std::string_view key, std::string_view text) {
    const double out = parse_double(key, text);
    if (!std::isfinite(out)) bad_value(key, text, "a finite number");
    return out;
}

double parse_positive(std::string_view key, std::string_view text) {
    const double out = parse_finite(key, text);
    if (!(out > 0.0)) bad_value(key, text, "a positive number");
    return out;
}

int parse_int(std::string_view key, std::string_view text) {
    const std::string value = trim(text);
    int out = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        bad_value(key, value, "an integer");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
    const std::string value = canonical(text);
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    bad_value(key, text, "true or false");
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    std::string item;
    auto flush = [&]() {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(parse_double(key, t));
        item.clear();
    };
    for (char c : text) {
        if (c == ',' || c == ';' || c == ' ' || c == '\t') {
            flush();
        } else {
            item += c;
        }
    }
    flush();
    return out;
}

int count_from_step(std::string_view key, double length, double step, bool even) {
    const double cells = length / step;
    const long n = even ? 2 * std::lround(cells / 2.0) : std::lround(cells);
    if (n <= 0 || std::abs(length / static_cast<double>(n) - step) > 1e-9 * step) {
        std::ostringstream os;
        os << "key '" << key << "': step " << step << " does not split length " << length << " into "
           << (even ? "an even" : "a whole") << " number of cells";
        throw ConfigError(os.str());
    }
    return static_cast<int>(n);
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"solver",
         [](RunConfig& c, std::string_view k, std::string_view v) {
             const std::string s = canonical(v);
             if (s == "micromacro" || s == "mm") {
                 c.solver = SolverKind::MicroMacro;
             } else if (s == "explicit" || s == "explicitref") {
                 c.solver = SolverKind::ExplicitRef;
             } else if (s == "hjlimit" || s == "limit" || s == "hj") {
                 c.solver = SolverKind::HJLimit;
             } else {
                 bad_value(k, v, "micromacro, explicit or hj_limit");
             }
         }},
        {"x_max", [](RunConfig& c, std::string_view k, std::string_view v) { c.x_max = parse_positive(k, v); }},
        {"n_x", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_x = parse_int(k, v); }},
        {"v_max", [](RunConfig& c, std::string_view k, std::string_view v) { c.v_max = parse_positive(k, v); }},
        {"n_v", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_v = parse_int(k, v); }},
        {"t_final", [](RunConfig& c, std::string_view k, std::string_view v) { c.t_final = parse_finite(k, v); }},
        {"n_t", [](RunConfig& c, std::string_view k, std::string_view v) { c.n_t = parse_int(k, v); }},
        {"dx",
         [](RunConfig& c, std::string_view k, std::string_view v) {
             c.n_x = count_from_step(k, 2.0 * c.x_max, parse_positive(k, v), true);
         }},
        {"dv",
         [](RunConfig& c, std::string_view k, std::string_view v) {
             c.n_v = count_from_step(k, 2.0 * c.v_max, parse_positive(k, v), true);
         }},
        {"dt",
         [](RunConfig& c, std::string_view k, std::string_view v) {
             c.n_t = count_from_step(k, c.t_final, parse_positive(k, v), false);
         }},
        {"boundary",
         [](RunConfig& c, std::string_view k, std::string_view v) {
             const std::string s = canonical(v);
             if (s == "periodic") {
                 c.boundary = Boundary::Periodic;
             } else if (s == "neumann") {
                 c.boundary = Boundary::Neumann;
             } else {
                 bad_value(k, v, "periodic or neumann");
             }
         }},
        {"eps", [](RunConfig& c, std::string_view k, std::string_view v) { c.eps = parse_finite(k, v); }},
        {"r", [](RunConfig& c, std::string_view k, std::string_view v) { c.r = parse_finite(k, v); }},
        {"equilibrium",
         [](RunConfig& c, std::string_view k, std::string_view v) {
             const std::string s = canonical(v);
             if (s == "uniform") {
                 c.equilibrium = EquilibriumKind::Uniform;
             } else if (s == "singularparabolic" || s == "singular") {
                 c.equilibrium = EquilibriumKind::SingularParabolic;
             } else if (s == "custom") {
                 c.equilibrium = EquilibriumKind::Custom;
             } else {
                 bad_value(k, v, "uniform, singular_parabolic or custom");
             }
         }},
        {"equilibrium_values",
         [](RunConfig& c, std::string_view k, std::string_view v) { c.equilibrium_values = parse_list(k, v); }},
        {"initial",
         [](RunConfig& c, std::string_view k, std::string_view v) {
             const std::string s = canonical(v);
             if (s == "quadratic") {
                 c.initial = "quadratic";
             } else if (s == "twominima") {
                 c.initial = "two_minima";
             } else if (s == "leftstep") {
                 c.initial = "left_step";
             } else if (s == "tabulated") {
                 c.initial = "tabulated";
             } else {
                 bad_value(k, v, "quadratic, two_minima, left_step or tabulated");
             }
         }},
        {"initial_values",
         [](RunConfig& c, std::string_view k, std::string_view v) { c.initial_values = parse_list(k, v); }},
        {"step_position",
         [](RunConfig& c, std::string_view k, std::string_view v) { c.step_position = parse_finite(k, v); }},
        {"phi_cap", [](RunConfig& c, std::string_view k, std::string_view v) { c.phi_cap = parse_positive(k, v); }},
        {"snapshot_times",
         [](RunConfig& c, std::string_view k, std::string_view v) { c.snapshot_times = parse_list(k, v); }},
        {"newton_tol",
         [](RunConfig& c, std::string_view k, std::string_view v) { c.newton_tol = parse_positive(k, v); }},
        {"newton_max_iter",
         [](RunConfig& c, std::string_view k, std::string_view v) { c.newton_max_iter = parse_int(k, v); }},
        {"damping", [](RunConfig& c, std::string_view k, std::string_view v) { c.damping = parse_bool(k, v); }},
        {"polish", [](RunConfig& c, std::string_view k, std::string_view v) { c.polish = parse_bool(k, v); }},
        {"h_init",
         [](RunConfig& c, std::string_view k, std::string_view v) {
             const std::string s = canonical(v);
             if (s == "limit") {
                 c.h_init = HInit::Limit;
             } else if (s == "zero") {
                 c.h_init = HInit::Zero;
             } else {
                 bad_value(k, v, "limit or zero");
             }
         }},
        {"project_h_guess",
         [](RunConfig& c, std::string_view k, std::string_view v) { c.project_h_guess = parse_bool(k, v); }},
        {"ham_tol", [](RunConfig& c, std::string_view k, std::string_view v) { c.ham_tol = parse_positive(k, v); }},
        {"check_invariants",
         [](RunConfig& c, std::string_view k, std::string_view v) { c.check_invariants = parse_bool(k, v); }},
        {"eps_list", [](RunConfig& c, std::string_view k, std::string_view v) { c.eps_list = parse_list(k, v); }},
        {"dx_list", [](RunConfig& c, std::string_view k, std::string_view v) { c.dx_list = parse_list(k, v); }},
        {"levels", [](RunConfig& c, std::string_view k, std::string_view v) { c.levels = parse_int(k, v); }},
        {"output_dir", [](RunConfig& c, std::string_view, std::string_view v) { c.output_dir = trim(v); }},
    };
    return table;
}

bool is_step_key(std::string_view key) {
    return key == "dx" || key == "dv" || key == "dt";
}

struct Assignment {
    std::string key;
    std::string value;
    int line = 0;  // 0 for command-line overrides
};

[[noreturn]] void rethrow_with_line(const ConfigError& e, int line) {
    throw ConfigError("line " + std::to_string(line) + ": " + e.what());
}

// Preset first, then plain keys in order, then step keys (dx, dv, dt) once the
// box and final time are known.
void apply_assignments(RunConfig& cfg, const std::vector<Assignment>& items) {
    auto apply = [&](const Assignment& a) {
        try {
            set_option(cfg, a.key, a.value);
        } catch (const ConfigError& e) {
            if (a.line > 0) rethrow_with_line(e, a.line);
            throw;
        }
    };
    for (const auto& a : items) {
        if (a.key == "preset") apply(a);
    }
    for (const auto& a : items) {
        if (a.key != "preset" && !is_step_key(a.key)) apply(a);
    }
    for (const auto& a : items) {
        if (is_step_key(a.key)) apply(a);
    }
}

Assignment split_assignment(std::string_view text, int line) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
        std::ostringstream os;
        if (line > 0) os << "line " << line << ": ";
        os << "expected 'key = value', got '" << trim(text) << "'";
        throw ConfigError(os.str());
    }
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line};
}

}  // namespace

void set_option(RunConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "preset") {
        const std::string keep_dir = cfg.output_dir;
        cfg = preset_config(trim(value));
        cfg.output_dir = keep_dir;
        return;
    }
    const auto& table = setters();
    const auto it = table.find(std::string(key));
    if (it == table.end()) {
        std::ostringstream os;
        os << "unknown key '" << key << "' (valid keys:";
        for (const auto& k : config_keys()) os << ' ' << k;
        os << ')';
        throw ConfigError(os.str());
    }
    it->second(cfg, key, value);
}

RunConfig parse_config(std::string_view text) {
    std::vector<Assignment> items;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        if (trim(raw).empty()) continue;
        items.push_back(split_assignment(raw, line));
    }
    RunConfig cfg;
    apply_assignments(cfg, items);
    validate(cfg);
    return cfg;
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments) {
    std::vector<Assignment> items;
    for (const auto& a : assignments) items.push_back(split_assignment(a, 0));
    apply_assignments(cfg, items);
}

void validate(const RunConfig& cfg) {
    try {
        (void)build_grid(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("grid (x_max, n_x/dx, v_max, n_v/dv, t_final, n_t/dt): ") + e.what());
    }
    if (cfg.solver != SolverKind::HJLimit && !(cfg.eps > 0.0)) {
        throw ConfigError("key 'eps': must be positive for the kinetic solvers");
    }
    if (cfg.r < 0.0) throw ConfigError("key 'r': reaction rate must be nonnegative");
    if (cfg.newton_max_iter < 1) throw ConfigError("key 'newton_max_iter': must be at least 1");
    if (cfg.equilibrium == EquilibriumKind::Custom &&
        static_cast<int>(cfg.equilibrium_values.size()) != cfg.n_v) {
        throw ConfigError("key 'equilibrium_values': custom equilibrium needs n_v = " +
                          std::to_string(cfg.n_v) + " values");
    }
    if (cfg.initial == "tabulated" && static_cast<int>(cfg.initial_values.size()) != cfg.n_x) {
        throw ConfigError("key 'initial_values': tabulated initial data needs n_x = " +
                          std::to_string(cfg.n_x) + " values");
    }
    for (double t : cfg.snapshot_times) {
        if (!(t >= 0.0) || t > cfg.t_final * (1.0 + 1e-12)) {
            throw ConfigError("key 'snapshot_times': " + format_double(t) + " is outside [0, t_final]");
        }
    }
    if (cfg.levels < 1) throw ConfigError("key 'levels': must be at least 1");
    for (double e : cfg.eps_list) {
        if (!(e > 0.0)) throw ConfigError("key 'eps_list': values must be positive");
    }
    for (double d : cfg.dx_list) {
        if (!(d > 0.0)) throw ConfigError("key 'dx_list': values must be positive");
    }
}

Grid build_grid(const RunConfig& cfg) {
    return Grid::build(cfg.x_max, cfg.n_x, cfg.v_max, cfg.n_v, cfg.t_final, cfg.n_t, cfg.boundary);
}

Equilibrium build_equilibrium(const RunConfig& cfg, const Grid& grid) {
    if (cfg.equilibrium == EquilibriumKind::Custom) return Equilibrium::custom(cfg.equilibrium_values, grid);
    return Equilibrium::build(cfg.equilibrium, grid);
}

RunConfig preset_config(std::string_view name) {
    RunConfig c;
    c.preset = std::string(name);
    const std::vector<double> quarter_times = {0.25, 0.5, 0.75, 1.0};
    const std::vector<double> limit_times = {0.1, 0.2, 0.3, 0.5, 0.75, 1.0};
    if (name == "fig_phi_reg_ep1" || name == "fig_phi_reg_ep1e-1") {
        c.eps = name == "fig_phi_reg_ep1" ? 1.0 : 0.1;
        c.snapshot_times = quarter_times;
    } else if (name == "fig_phi_reg_ep1e-2") {
        c.eps = 1e-2;
        c.snapshot_times = limit_times;
    } else if (name == "fig_two_minima") {
        c.initial = "two_minima";
        c.eps = 1e-2;
        c.n_x = 500;
        c.n_t = 1000;
        c.snapshot_times = limit_times;
    } else if (name == "fig_consistency_r1") {
        c.r = 1.0;
        c.t_final = 0.5;
        c.n_t = 200;
    } else if (name == "fig_front") {
        c.r = 1.0;
        c.eps = 1e-4;
        c.boundary = Boundary::Neumann;
        c.initial = "left_step";
        c.n_x = 1600;
        c.n_t = 3200;
        c.snapshot_times = quarter_times;
    } else if (name == "fig_order_reference") {
        c.n_x = 1000;
        c.t_final = 0.5;
        c.n_t = 1000;
    } else if (name == "fig_singular") {
        c.equilibrium = EquilibriumKind::SingularParabolic;
        c.n_v = 40;
        c.eps = 1e-4;
    } else {
        std::ostringstream os;
        os << "unknown preset '" << name << "' (valid presets:";
        for (const auto& p : preset_names()) os << ' ' << p;
        os << ')';
        throw ConfigError(os.str());
    }
    return c;
}

std::vector<std::string> preset_names() {
    return {"fig_phi_reg_ep1", "fig_phi_reg_ep1e-1", "fig_phi_reg_ep1e-2", "fig_two_minima",
            "fig_consistency_r1", "fig_front", "fig_order_reference", "fig_singular"};
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys = {"preset"};
    for (const auto& [key, setter] : setters()) keys.push_back(key);
    return keys;
}

std::vector<std::pair<std::string, std::string>> manifest_entries(const RunConfig& cfg) {
    auto fd = [](double v) { return format_double(v); };
    std::vector<std::pair<std::string, std::string>> out = {
        {"solver", to_string(cfg.solver)},
        {"preset", cfg.preset.empty() ? "none" : cfg.preset},
        {"x_max", fd(cfg.x_max)},
        {"n_x", std::to_string(cfg.n_x)},
        {"dx", fd(cfg.dx())},
        {"v_max", fd(cfg.v_max)},
        {"n_v", std::to_string(cfg.n_v)},
        {"dv", fd(2.0 * cfg.v_max / cfg.n_v)},
        {"t_final", fd(cfg.t_final)},
        {"n_t", std::to_string(cfg.n_t)},
        {"dt", fd(cfg.dt())},
        {"boundary", to_string(cfg.boundary)},
        {"eps", fd(cfg.eps)},
        {"r", fd(cfg.r)},
        {"equilibrium", to_string(cfg.equilibrium)},
        {"initial", cfg.initial},
        {"step_position", fd(cfg.step_position)},
        {"phi_cap", fd(cfg.phi_cap)},
        {"snapshot_times", format_list(cfg.snapshot_times)},
        {"newton_tol", fd(cfg.newton_tol)},
        {"newton_max_iter", std::to_string(cfg.newton_max_iter)},
        {"damping", cfg.damping ? "true" : "false"},
        {"polish", cfg.polish ? "true" : "false"},
        {"h_init", cfg.h_init == HInit::Limit ? "limit" : "zero"},
        {"project_h_guess", cfg.project_h_guess ? "true" : "false"},
        {"ham_tol", fd(cfg.ham_tol)},
        {"check_invariants", cfg.check_invariants ? "true" : "false"},
    };
    if (cfg.equilibrium == EquilibriumKind::Custom) {
        out.emplace_back("equilibrium_values", format_list(cfg.equilibrium_values));
    }
    if (cfg.initial == "tabulated") out.emplace_back("initial_values", format_list(cfg.initial_values));
    if (!cfg.eps_list.empty()) out.emplace_back("eps_list", format_list(cfg.eps_list));
    if (!cfg.dx_list.empty()) out.emplace_back("dx_list", format_list(cfg.dx_list));
    out.emplace_back("levels", std::to_string(cfg.levels));
    return out;
}

}  // namespace apk
