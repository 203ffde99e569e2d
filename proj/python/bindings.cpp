// Python bindings: runs, experiments and the limit Hamiltonian.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "apk/analysis.hpp"
#include "apk/config.hpp"
#include "apk/errors.hpp"
#include "apk/experiments.hpp"
#include "apk/hj_limit.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

apk::Equilibrium velocity_equilibrium(const std::string& kind, int n_v, double v_max) {
    apk::RunConfig cfg;
    apk::set_option(cfg, "equilibrium", kind);
    const apk::Grid grid = apk::Grid::build(1.0, 2, v_max, n_v, 0.0, 0, apk::Boundary::Periodic);
    return apk::Equilibrium::build(cfg.equilibrium, grid);
}

py::dict stats_dict(const apk::RunStats& s) {
    py::dict d;
    d["cell_solves"] = s.cell_solves;
    d["median_iterations"] = s.median_iterations();
    d["max_iterations"] = s.max_iterations;
    d["max_residual"] = s.max_residual;
    d["max_exp_eta"] = s.max_exp_eta;
    d["max_exp_neg_eta"] = s.max_exp_neg_eta;
    return d;
}

py::dict run(const std::string& preset, const std::vector<std::string>& overrides) {
    apk::RunConfig cfg = preset.empty() ? apk::RunConfig{} : apk::preset_config(preset);
    apk::apply_overrides(cfg, overrides);
    apk::RunOutcome out;
    {
        py::gil_scoped_release release;
        out = apk::run_single(cfg);
    }
    py::dict d;
    d["x"] = to_array(out.xs);
    d["times"] = to_array(out.times);
    py::list phi, rho;
    for (const auto& p : out.phi) phi.append(to_array(p));
    for (const auto& r : out.rho) rho.append(to_array(r));
    d["phi"] = phi;
    d["rho"] = rho;
    d["stats"] = stats_dict(out.stats);
    d["warnings"] = out.warnings;
    d["wall_time"] = out.wall_time;
    return d;
}

py::dict experiment(const std::string& name, const std::vector<std::string>& overrides, const std::string& out_dir) {
    apk::ExperimentReport rep;
    {
        py::gil_scoped_release release;
        rep = apk::run_experiment(name, overrides, out_dir);
    }
    py::dict metrics;
    for (const auto& [k, v] : rep.metrics) metrics[py::str(k)] = v;
    py::dict d;
    d["name"] = rep.name;
    d["metrics"] = metrics;
    d["files"] = rep.files;
    d["warnings"] = rep.warnings;
    d["stats"] = stats_dict(rep.stats);
    d["wall_time"] = rep.wall_time;
    return d;
}

}  // namespace

PYBIND11_MODULE(_apkinetic, m) {
    m.doc() = "Asymptotic-preserving micro-macro solver for kinetic fronts";

    py::register_exception<apk::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<apk::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<apk::SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<apk::OverflowError>(m, "NumericalOverflow", PyExc_ArithmeticError);
    py::register_exception<apk::UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);
    py::register_exception<apk::InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

    m.def("run", &run, py::arg("preset") = "", py::arg("overrides") = std::vector<std::string>{},
          "Run one configuration (optional preset plus key=value overrides).");
    m.def("experiment", &experiment, py::arg("name"), py::arg("overrides") = std::vector<std::string>{},
          py::arg("out_dir") = "", "Run a named study; writes CSVs when out_dir is given.");
    m.def("experiment_names", &apk::experiment_names);
    m.def("preset_names", &apk::preset_names);

    m.def(
        "hamiltonian",
        [](double p, double q, double r, const std::string& equilibrium, int n_v, double v_max) {
            const apk::HamiltonianEval h =
                apk::eval_hamiltonian(p, q, r, velocity_equilibrium(equilibrium, n_v, v_max));
            return py::make_tuple(h.value, apk::to_string(h.branch));
        },
        py::arg("p"), py::arg("q"), py::arg("r") = 0.0, py::arg("equilibrium") = "uniform", py::arg("n_v") = 160,
        py::arg("v_max") = 1.0, "h(p, q) and the branch it came from.");

    m.def(
        "speed_oracle",
        [](double r, const std::string& equilibrium, int n_v, double v_max) {
            const apk::SpeedOracle o = apk::speed_oracle(r, velocity_equilibrium(equilibrium, n_v, v_max));
            return py::make_tuple(o.c_star, o.p_star);
        },
        py::arg("r"), py::arg("equilibrium") = "uniform", py::arg("n_v") = 160, py::arg("v_max") = 1.0,
        "(c*, p*) minimising (H(p) + r) / p.");
}
