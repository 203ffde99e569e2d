// Command-line front end: single runs, named experiments and Hamiltonian tables.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "apk/analysis.hpp"
#include "apk/config.hpp"
#include "apk/errors.hpp"
#include "apk/experiments.hpp"
#include "apk/hj_limit.hpp"
#include "apk/output.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw apk::IoError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

apk::EquilibriumKind parse_equilibrium(const std::string& name) {
    apk::RunConfig cfg;
    apk::set_option(cfg, "equilibrium", name);
    return cfg.equilibrium;
}

// Velocity grid only; the space/time part is a dummy that satisfies the CFL check.
apk::Equilibrium velocity_equilibrium(const std::string& kind, int n_v, double v_max) {
    const apk::Grid grid = apk::Grid::build(1.0, 2, v_max, n_v, 0.0, 0, apk::Boundary::Periodic);
    return apk::Equilibrium::build(parse_equilibrium(kind), grid);
}

void print_report(const apk::ExperimentReport& report) {
    std::cout << "experiment " << report.name << " (" << apk::format_double(report.wall_time) << " s)\n";
    for (const auto& [key, value] : report.metrics) std::cout << "  " << key << " = " << apk::format_double(value) << '\n';
    if (report.stats.cell_solves > 0) {
        std::cout << "  newton: median " << apk::format_double(report.stats.median_iterations()) << ", max "
                  << report.stats.max_iterations << " iterations over " << report.stats.cell_solves << " cell solves\n";
    }
    for (const auto& w : report.warnings) std::cout << "  warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Micro-macro kinetic solver and its Hamilton-Jacobi limit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run one configuration file");
    run->add_option("config", config_path, "key = value configuration file")->required();
    run->add_option("--set", sets, "Override a key, e.g. --set eps=1e-3");
    run->add_option("--out", out_dir, "Output directory (default: output_dir key)");

    std::string experiment;
    bool list_experiments = false;
    auto* exp = app.add_subcommand("experiment", "Run a named study");
    exp->add_option("name", experiment, "Experiment name");
    exp->add_option("--set", sets, "Override a key of the base configuration");
    exp->add_option("--out", out_dir, "Parent output directory")->default_val("out");
    exp->add_flag("--list", list_experiments, "List experiment names");

    double p_min = -3.0, p_max = 3.0, r = 0.0, q_shift = 0.0;
    int n = 61, n_v = 160;
    double v_max = 1.0;
    std::string equilibrium = "uniform";
    auto* ham = app.add_subcommand("hamiltonian-table", "Tabulate H(p) as CSV on stdout");
    ham->add_option("--p-min", p_min);
    ham->add_option("--p-max", p_max);
    ham->add_option("--n", n)->check(CLI::Range(2, 1000000));
    ham->add_option("--q-shift", q_shift, "Evaluate h(p, p + q_shift)");
    ham->add_option("--r", r)->check(CLI::NonNegativeNumber);
    ham->add_option("--equilibrium", equilibrium, "uniform | singular_parabolic");
    ham->add_option("--n-v", n_v);
    ham->add_option("--v-max", v_max);

    double lo = 1e-2, hi = 1e2;
    int scan = 200;
    auto* speed = app.add_subcommand("speed-oracle", "Minimal front speed inf_p (H(p) + r) / p");
    speed->add_option("--r", r)->required();
    speed->add_option("--equilibrium", equilibrium);
    speed->add_option("--n-v", n_v);
    speed->add_option("--v-max", v_max);
    speed->add_option("--p-min", lo);
    speed->add_option("--p-max", hi);
    speed->add_option("--n", scan);

    auto* info = app.add_subcommand("list", "List presets, configuration keys and experiments");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            apk::RunConfig cfg = apk::parse_config(read_file(config_path));
            apk::apply_overrides(cfg, sets);
            apk::validate(cfg);
            const apk::RunOutcome outcome = apk::run_single(cfg);
            const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
            const auto files = apk::write_run(outcome, dir);
            std::cout << apk::to_string(cfg.solver) << " run: " << outcome.times.size() << " snapshot(s), "
                      << apk::format_double(outcome.wall_time) << " s, " << files.size() << " files in " << dir << '\n';
            if (cfg.solver == apk::SolverKind::MicroMacro) {
                std::cout << "newton: median " << apk::format_double(outcome.stats.median_iterations()) << ", max "
                          << outcome.stats.max_iterations << " iterations\n";
            }
            for (const auto& w : outcome.warnings) std::cout << "warning: " << w << '\n';
        } else if (*exp) {
            if (list_experiments || experiment.empty()) {
                for (const auto& name : apk::experiment_names()) std::cout << name << '\n';
                return 0;
            }
            print_report(apk::run_experiment(experiment, sets, out_dir));
        } else if (*ham) {
            const apk::Equilibrium eq = velocity_equilibrium(equilibrium, n_v, v_max);
            std::cout << "p,q,H,branch,iterations\n";
            for (int k = 0; k < n; ++k) {
                const double p = p_min + (p_max - p_min) * k / (n - 1);
                const apk::HamiltonianEval h = apk::eval_hamiltonian(p, p + q_shift, r, eq);
                std::cout << apk::format_double(p) << ',' << apk::format_double(p + q_shift) << ','
                          << apk::format_double(h.value) << ',' << apk::to_string(h.branch) << ',' << h.iterations
                          << '\n';
            }
        } else if (*speed) {
            const apk::Equilibrium eq = velocity_equilibrium(equilibrium, n_v, v_max);
            const apk::SpeedOracle o = apk::speed_oracle(r, eq, lo, hi, scan);
            std::cout << "c_star = " << apk::format_double(o.c_star) << "\np_star = " << apk::format_double(o.p_star)
                      << '\n';
        } else if (*info) {
            std::cout << "presets:";
            for (const auto& p : apk::preset_names()) std::cout << ' ' << p;
            std::cout << "\nexperiments:";
            for (const auto& e : apk::experiment_names()) std::cout << ' ' << e;
            std::cout << "\nkeys:";
            for (const auto& k : apk::config_keys()) std::cout << ' ' << k;
            std::cout << '\n';
        }
    } catch (const apk::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const apk::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
