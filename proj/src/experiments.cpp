#include "apk/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "apk/analysis.hpp"
#include "apk/errors.hpp"
#include "apk/explicit_ref.hpp"
#include "apk/hj_limit.hpp"
#include "apk/initial_data.hpp"
#include "apk/output.hpp"

namespace apk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double out = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) out = std::max(out, std::abs(a[k] - b[k]));
    return out;
}

std::string grid_comment(const RunConfig& cfg) {
    std::ostringstream os;
    os << "solver=" << to_string(cfg.solver) << " eps=" << format_double(cfg.eps)
       << " r=" << format_double(cfg.r) << " x_max=" << format_double(cfg.x_max) << " n_x=" << cfg.n_x
       << " dx=" << format_double(cfg.dx()) << " n_v=" << cfg.n_v << " dt=" << format_double(cfg.dt())
       << " boundary=" << to_string(cfg.boundary) << " equilibrium=" << to_string(cfg.equilibrium)
       << " initial=" << cfg.initial;
    return os.str();
}

std::vector<std::pair<std::string, std::string>> stats_entries(const RunStats& s) {
    return {
        {"newton_cell_solves", std::to_string(s.cell_solves)},
        {"newton_median_iterations", format_double(s.median_iterations())},
        {"newton_mean_iterations", format_double(s.mean_iterations())},
        {"newton_max_iterations", std::to_string(s.max_iterations)},
        {"newton_max_residual", format_double(s.max_residual)},
        {"max_exp_eta_over_eps", format_double(s.max_exp_eta)},
        {"max_exp_minus_eta_over_eps", format_double(s.max_exp_neg_eta)},
        {"max_conservation_defect", format_double(s.max_conservation_defect)},
    };
}

// Rethrows solver-side failures with the experiment name prepended.
template <class F>
auto with_context(std::string_view name, F&& body) {
    const std::string prefix = "experiment " + std::string(name) + ": ";
    try {
        return body();
    } catch (const SolverError& e) {
        throw SolverError(prefix + e.what(), e.cell(), e.step());
    } catch (const OverflowError& e) {
        throw OverflowError(prefix + e.what());
    } catch (const InvariantViolation& e) {
        throw InvariantViolation(prefix + e.what());
    } catch (const UnsupportedError& e) {
        throw UnsupportedError(prefix + e.what());
    }
}

// Bookkeeping shared by all experiments.
class Study {
public:
    Study(std::string name, RunConfig base, std::filesystem::path dir)
        : dir_(std::move(dir)) {
        report_.name = std::move(name);
        report_.base = std::move(base);
        if (!dir_.empty()) ensure_directory(dir_);
    }

    const RunConfig& base() const { return report_.base; }
    bool writing() const { return !dir_.empty(); }

    void metric(const std::string& key, double value) { report_.metrics.emplace_back(key, value); }
    void warn(const std::string& message) {
        if (std::find(report_.warnings.begin(), report_.warnings.end(), message) == report_.warnings.end()) {
            report_.warnings.push_back(message);
        }
    }

    RunOutcome run(const RunConfig& cfg) {
        RunOutcome out = run_single(cfg);
        if (cfg.solver == SolverKind::MicroMacro) report_.stats.merge(out.stats);
        for (const auto& w : out.warnings) warn(w);
        return out;
    }

    CsvWriter csv(const std::string& file, const std::vector<std::string>& header, const std::string& comment) {
        report_.files.push_back(file);
        return CsvWriter(dir_ / file, header, comment);
    }

    ExperimentReport finish(Clock::time_point start) {
        report_.wall_time = seconds_since(start);
        if (writing()) {
            {
                CsvWriter out(dir_ / "metrics.csv", {"metric", "value"}, "experiment=" + report_.name);
                for (const auto& [key, value] : report_.metrics) out.row({key, format_double(value)});
            }
            report_.files.push_back("metrics.csv");
            auto entries = manifest_entries(report_.base);
            entries.insert(entries.begin(), {"experiment", report_.name});
            for (const auto& [key, value] : report_.metrics) entries.emplace_back("metric." + key, format_double(value));
            for (const auto& e : stats_entries(report_.stats)) entries.push_back(e);
            entries.emplace_back("wall_time_seconds", format_double(report_.wall_time));
            for (std::size_t k = 0; k < report_.warnings.size(); ++k) {
                entries.emplace_back("warning." + std::to_string(k), report_.warnings[k]);
            }
            std::string files;
            for (const auto& f : report_.files) files += (files.empty() ? "" : ";") + f;
            entries.emplace_back("files", files);
            write_manifest(dir_ / "manifest.txt", entries);
            report_.files.push_back("manifest.txt");
        }
        return std::move(report_);
    }

private:
    std::filesystem::path dir_;
    ExperimentReport report_;
};

std::string tag(double value) { return format_double(value); }

RunConfig with_solver(RunConfig cfg, SolverKind solver) {
    cfg.solver = solver;
    return cfg;
}

RunConfig with_eps(RunConfig cfg, double eps) {
    cfg.eps = eps;
    return cfg;
}

// Side-by-side phi per snapshot of several runs sharing a grid and snapshot times.
void write_side_by_side(Study& study, const std::string& stem, const std::vector<std::string>& labels,
                        const std::vector<const RunOutcome*>& runs) {
    if (!study.writing() || runs.empty()) return;
    const RunOutcome& first = *runs.front();
    std::vector<std::string> header = {"x"};
    for (const auto& label : labels) header.push_back("phi_" + label);
    for (std::size_t s = 0; s < first.times.size(); ++s) {
        CsvWriter out = study.csv(stem + "_t" + tag(first.times[s]) + ".csv", header,
                                  grid_comment(first.cfg) + " t=" + tag(first.times[s]));
        std::vector<double> row(header.size());
        for (std::size_t i = 0; i < first.xs.size(); ++i) {
            row[0] = first.xs[i];
            for (std::size_t k = 0; k < runs.size(); ++k) row[k + 1] = runs[k]->phi[s][i];
            out.row(row);
        }
    }
}

int local_minima(std::span<const double> phi, double tol) {
    int count = 0;
    std::size_t i = 1;
    while (i + 1 < phi.size()) {
        // Treat flat stretches as one point.
        std::size_t j = i;
        while (j + 1 < phi.size() && std::abs(phi[j + 1] - phi[i]) <= tol) ++j;
        if (j + 1 >= phi.size()) break;
        if (phi[i - 1] > phi[i] + tol && phi[j + 1] > phi[i] + tol) ++count;
        i = j + 1;
    }
    return count;
}

double max_slope_jump(std::span<const double> phi, double dx) {
    double out = 0.0;
    for (std::size_t i = 1; i + 1 < phi.size(); ++i) {
        out = std::max(out, std::abs((phi[i + 1] - phi[i]) - (phi[i] - phi[i - 1])) / dx);
    }
    return out;
}

// ---------------------------------------------------------------- consistency

ExperimentReport consistency(Study study, Clock::time_point start) {
    const RunConfig& base = study.base();
    std::vector<double> gaps;
    CsvWriter* table = nullptr;
    std::optional<CsvWriter> table_storage;
    if (study.writing()) {
        table_storage.emplace(study.csv("gaps.csv", {"level", "dx", "dt", "gap", "bound"}, grid_comment(base)));
        table = &*table_storage;
    }
    for (int level = 0; level < base.levels; ++level) {
        RunConfig cfg = base;
        cfg.n_x = base.n_x << level;
        cfg.n_t = base.n_t << level;
        const RunOutcome mm = study.run(with_solver(cfg, SolverKind::MicroMacro));
        const RunOutcome ex = study.run(with_solver(cfg, SolverKind::ExplicitRef));
        double gap = 0.0;
        for (std::size_t s = 0; s < mm.times.size(); ++s) gap = std::max(gap, max_abs_diff(mm.phi[s], ex.phi[s]));
        const double bound = 10.0 * (cfg.dt() + cfg.dx());
        const std::string l = std::to_string(level);
        study.metric("dx_L" + l, cfg.dx());
        study.metric("dt_L" + l, cfg.dt());
        study.metric("gap_L" + l, gap);
        study.metric("bound_L" + l, bound);
        if (level > 0) study.metric("ratio_L" + l, gap / gaps.back());
        gaps.push_back(gap);
        if (table) table->row(std::vector<double>{double(level), cfg.dx(), cfg.dt(), gap, bound});
        if (level == 0) write_side_by_side(study, "consistency", {"micromacro", "explicit"}, {&mm, &ex});
    }
    table_storage.reset();
    return study.finish(start);
}

// ---------------------------------------------------------------- AP vs limit

ExperimentReport ap_vs_limit(Study study, Clock::time_point start) {
    const RunConfig& base = study.base();
    const std::vector<double> eps_list = base.eps_list.empty() ? std::vector<double>{1e-2, 1e-4} : base.eps_list;
    const RunOutcome limit = study.run(with_solver(base, SolverKind::HJLimit));
    std::vector<RunOutcome> runs;
    std::vector<std::string> labels = {"limit"};
    for (double eps : eps_list) {
        runs.push_back(study.run(with_solver(with_eps(base, eps), SolverKind::MicroMacro)));
        const RunOutcome& mm = runs.back();
        double gap_max = 0.0;
        for (std::size_t s = 0; s < mm.times.size(); ++s) gap_max = std::max(gap_max, max_abs_diff(mm.phi[s], limit.phi[s]));
        study.metric("gap_eps" + tag(eps), max_abs_diff(mm.phi.back(), limit.phi.back()));
        study.metric("gap_max_eps" + tag(eps), gap_max);
        labels.push_back("eps" + tag(eps));
    }
    study.metric("dx", base.dx());
    study.metric("bound", 5.0 * base.dx());
    std::vector<const RunOutcome*> ptrs = {&limit};
    for (const auto& r : runs) ptrs.push_back(&r);
    write_side_by_side(study, "ap", labels, ptrs);
    return study.finish(start);
}

// ---------------------------------------------------------------- two minima

ExperimentReport two_minima_study(Study study, Clock::time_point start) {
    const RunConfig& base = study.base();
    const std::vector<double> eps_list =
        base.eps_list.empty() ? std::vector<double>{1.0, 0.1, 1e-2, 1e-3} : base.eps_list;
    const RunOutcome limit = study.run(with_solver(base, SolverKind::HJLimit));
    const double tol = 1e-12;
    study.metric("local_minima_initial", local_minima(initial_phase(base, build_grid(base)), tol));
    study.metric("local_minima_limit", local_minima(limit.phi.back(), tol));
    study.metric("max_slope_jump_limit", max_slope_jump(limit.phi.back(), base.dx()));
    for (double eps : eps_list) {
        const RunConfig cfg = with_eps(base, eps);
        const RunOutcome mm = study.run(with_solver(cfg, SolverKind::MicroMacro));
        // Large eps: compare with the kinetic solution; small eps: with the limit.
        const bool kinetic = eps >= 0.1;
        const RunOutcome ex = kinetic ? study.run(with_solver(cfg, SolverKind::ExplicitRef)) : RunOutcome{};
        const RunOutcome& ref = kinetic ? ex : limit;
        double gap = 0.0;
        for (std::size_t s = 0; s < mm.times.size(); ++s) gap = std::max(gap, max_abs_diff(mm.phi[s], ref.phi[s]));
        study.metric("gap_eps" + tag(eps), gap);
        study.metric("reference_is_explicit_eps" + tag(eps), kinetic ? 1.0 : 0.0);
        study.metric("local_minima_eps" + tag(eps), local_minima(mm.phi.back(), tol));
        write_side_by_side(study, "two_minima_eps" + tag(eps), {"micromacro", kinetic ? "explicit" : "limit"},
                           {&mm, &ref});
    }
    return study.finish(start);
}

// ---------------------------------------------------------------- order / UA

ConvergenceTable convergence_sweep(Study& study, const std::vector<double>& eps_list,
                                   const std::vector<double>& dx_list) {
    const RunConfig& base = study.base();
    ConvergenceTable table;
    const Grid ref_grid = build_grid(base);
    for (double eps : eps_list) {
        RunConfig ref_cfg = with_solver(with_eps(base, eps), SolverKind::MicroMacro);
        ref_cfg.snapshot_times.clear();
        const RunOutcome ref = study.run(ref_cfg);
        for (double dx : dx_list) {
            RunConfig cfg = ref_cfg;
            cfg.n_x = sweep_count(base.x_max, dx);
            const RunOutcome run = study.run(cfg);
            const Restriction restricted = restrict_to(ref.phi.back(), ref_grid, build_grid(cfg));
            if (!restricted.exact) {
                study.warn("reference interpolated onto non-nested grids (n_x = " + std::to_string(cfg.n_x) + ")");
            }
            table.rows.push_back({eps, cfg.dx(), sup_error(restricted.values, run.phi.back())});
        }
    }
    return table;
}

void write_convergence(Study& study, const ConvergenceTable& table) {
    if (!study.writing()) return;
    CsvWriter out = study.csv("convergence.csv", {"eps", "dx", "error"}, grid_comment(study.base()));
    for (const auto& row : table.rows) out.row(std::vector<double>{row.eps, row.dx, row.error});
}

std::vector<double> sweep_dx(const RunConfig& base) {
    return base.dx_list.empty() ? std::vector<double>{4e-3, 8e-3, 16e-3, 32e-3} : base.dx_list;
}

ExperimentReport order_study(Study study, Clock::time_point start) {
    const RunConfig& base = study.base();
    const std::vector<double> eps_list = base.eps_list.empty() ? std::vector<double>{base.eps} : base.eps_list;
    const ConvergenceTable table = convergence_sweep(study, eps_list, sweep_dx(base));
    for (const auto& row : table.rows) study.metric("E_eps" + tag(row.eps) + "_dx" + tag(row.dx), row.error);
    for (const auto& fit : order_fit(table)) {
        study.metric("slope_eps" + tag(fit.eps), fit.fit.slope);
        for (const auto& w : fit.warnings) study.warn(w);
    }
    write_convergence(study, table);
    return study.finish(start);
}

ExperimentReport ua_study(Study study, Clock::time_point start) {
    const RunConfig& base = study.base();
    const std::vector<double> eps_list =
        base.eps_list.empty() ? std::vector<double>{1.0, 1e-1, 1e-2, 1e-3, 1e-4} : base.eps_list;
    const ConvergenceTable table = convergence_sweep(study, eps_list, sweep_dx(base));
    double coarsest = 0.0;
    for (const auto& row : table.rows) coarsest = std::max(coarsest, row.dx);
    double c_fit = 0.0;
    for (const auto& row : table.rows) {
        if (row.dx == coarsest) c_fit = std::max(c_fit, row.error / row.dx);
    }
    const double c = 1.5 * c_fit;
    double worst = 0.0;
    for (const auto& row : table.rows) {
        study.metric("E_eps" + tag(row.eps) + "_dx" + tag(row.dx), row.error);
        worst = std::max(worst, row.error / (c * row.dx));
    }
    study.metric("C", c);
    study.metric("max_E_over_C_dx", worst);
    for (const auto& fit : order_fit(table)) study.metric("slope_eps" + tag(fit.eps), fit.fit.slope);
    write_convergence(study, table);
    return study.finish(start);
}

// ---------------------------------------------------------------- fronts

ExperimentReport front_speed(Study study, Clock::time_point start) {
    const RunConfig& base = study.base();
    const FrontRun front = track_front(base);
    const Grid grid = build_grid(base);
    const Equilibrium eq = build_equilibrium(base, grid);
    const SpeedOracle oracle = speed_oracle(base.r, eq);
    const LinearFit fit = fit_front_speed({front.times, front.positions});
    study.metric("c_star", oracle.c_star);
    study.metric("p_star", oracle.p_star);
    study.metric("c_fit", fit.slope);
    study.metric("rel_error", std::abs(fit.slope - oracle.c_star) / oracle.c_star);
    study.metric("fit_residual", fit.residual);
    study.metric("samples", static_cast<double>(fit.samples));
    study.metric("newton_max_iterations", front.stats.max_iterations);
    if (study.writing()) {
        {
            CsvWriter out = study.csv("front_track.csv", {"t", "x_front"}, grid_comment(base));
            for (std::size_t k = 0; k < front.times.size(); ++k) {
                out.row(std::vector<double>{front.times[k], front.positions[k]});
            }
        }
        {
            CsvWriter out = study.csv("c_of_p.csv", {"p", "c"}, "r=" + tag(base.r) + " n_v=" + std::to_string(base.n_v));
            for (std::size_t k = 0; k < oracle.p.size(); ++k) out.row(std::vector<double>{oracle.p[k], oracle.c[k]});
        }
        CsvWriter out = study.csv("final_state.csv", {"x", "phi", "rho"}, grid_comment(base) + " t=" + tag(base.t_final));
        for (std::size_t i = 0; i < front.xs.size(); ++i) {
            out.row(std::vector<double>{front.xs[i], front.final_phi[i], std::exp(-front.final_phi[i] / base.eps)});
        }
    }
    return study.finish(start);
}

ExperimentReport speed_error_slope(Study study, Clock::time_point start) {
    const RunConfig& base = study.base();
    const std::vector<double> dx_list =
        base.dx_list.empty() ? std::vector<double>{1.25e-3, 2.5e-3, 5e-3} : base.dx_list;
    const double ratio = base.dt() / base.dx();
    const Grid grid = build_grid(base);
    const SpeedOracle oracle = speed_oracle(base.r, build_equilibrium(base, grid));
    study.metric("c_star", oracle.c_star);
    std::vector<double> log_dx;
    std::vector<double> log_err;
    std::vector<std::array<double, 3>> rows;
    for (double dx : dx_list) {
        RunConfig cfg = base;
        cfg.n_x = sweep_count(base.x_max, dx);
        cfg.n_t = static_cast<int>(std::lround(base.t_final / (ratio * cfg.dx())));
        const FrontRun front = track_front(cfg);
        const LinearFit fit = fit_front_speed({front.times, front.positions});
        const double err = std::abs(fit.slope - oracle.c_star) / oracle.c_star;
        study.metric("c_fit_dx" + tag(cfg.dx()), fit.slope);
        study.metric("rel_error_dx" + tag(cfg.dx()), err);
        log_dx.push_back(std::log(cfg.dx()));
        log_err.push_back(std::log(err));
        rows.push_back({cfg.dx(), fit.slope, err});
    }
    study.metric("slope", least_squares(log_dx, log_err).slope);
    if (study.writing()) {
        CsvWriter out = study.csv("speed_error.csv", {"dx", "c_fit", "rel_error"}, grid_comment(base));
        for (const auto& row : rows) out.row(row);
    }
    return study.finish(start);
}

// ---------------------------------------------------------------- singular equilibrium

double crossover_slope(const Equilibrium& eq) {
    // sing_quantity(p) decreases in p > 0; bracket the level 1 and bisect.
    double lo = 1e-8;
    double hi = 1.0;
    while (sing_quantity(hi, eq) > 1.0) {
        hi *= 2.0;
        if (hi > 1e8) throw UnsupportedError("Sing(M) is empty for this equilibrium");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (sing_quantity(mid, eq) > 1.0 ? lo : hi) = mid;
    }
    return hi;
}

ExperimentReport singular_hamiltonian(Study study, Clock::time_point start) {
    const RunConfig& base = study.base();
    const Grid grid = build_grid(base);
    const Equilibrium eq = build_equilibrium(base, grid);
    const double p_star = crossover_slope(eq);
    study.metric("p_crossover", p_star);

    const double p_max = 4.0 * p_star;
    const int n = 801;
    double branch_error = 0.0;
    int mismatches = 0;
    std::optional<CsvWriter> out;
    if (study.writing()) {
        out.emplace(study.csv("hamiltonian.csv", {"p", "H", "branch", "mu_minus_1", "sing_quantity"},
                              "r=0 n_v=" + std::to_string(base.n_v) + " equilibrium=" + to_string(base.equilibrium)));
    }
    for (int k = 0; k < n; ++k) {
        const double p = -p_max + 2.0 * p_max * k / (n - 1);
        const HamiltonianEval h = eval_hamiltonian(p, 0.0, eq, base.ham_tol);
        const double boundary = mu(p, eq) - 1.0;
        const bool sing = in_sing_set(p, eq);
        if (sing) {
            branch_error = std::max(branch_error, std::abs(h.value - boundary));
            if (h.branch != HamiltonianBranch::SingularBoundary) ++mismatches;
        } else if (h.branch != HamiltonianBranch::Implicit) {
            ++mismatches;
        }
        if (out) {
            out->row({format_double(p), format_double(h.value), to_string(h.branch), format_double(boundary),
                      format_double(sing_quantity(p, eq))});
        }
    }
    out.reset();
    study.metric("sing_branch_max_error", branch_error);
    study.metric("branch_mismatches", mismatches);
    double worst_gap = 0.0;
    for (double delta : {1e-4, 1e-6, 1e-8}) {
        for (double sign : {1.0, -1.0}) {
            const double below = eval_hamiltonian(sign * p_star * (1.0 - delta), 0.0, eq, base.ham_tol).value;
            const double above = eval_hamiltonian(sign * p_star * (1.0 + delta), 0.0, eq, base.ham_tol).value;
            const double gap = std::abs(above - below);
            worst_gap = std::max(worst_gap, gap);
            if (sign > 0.0) study.metric("continuity_gap_delta" + tag(delta), gap);
        }
    }
    study.metric("continuity_gap_max", worst_gap);
    if (study.writing()) {
        CsvWriter m = study.csv("equilibrium.csv", {"v", "M"}, "n_v=" + std::to_string(base.n_v));
        for (int j = 0; j < eq.size(); ++j) m.row(std::vector<double>{eq.v(j), eq[j]});
    }
    return study.finish(start);
}

ExperimentReport singular_dirac(Study study, Clock::time_point start) {
    const RunConfig& base = study.base();
    const std::vector<double> eps_list =
        base.eps_list.empty() ? std::vector<double>{1e-2, 1e-3, 1e-4} : base.eps_list;
    const Grid grid = build_grid(base);
    const Equilibrium eq = build_equilibrium(base, grid);
    int j_lo = 0;
    while (eq[j_lo] == 0.0) ++j_lo;
    const int j_hi = eq.size() - 1 - j_lo;
    const RunOutcome limit = study.run(with_solver(base, SolverKind::HJLimit));
    study.metric("dx", base.dx());
    study.metric("bound", 5.0 * base.dx());
    for (double eps : eps_list) {
        const RunOutcome mm = study.run(with_solver(with_eps(base, eps), SolverKind::MicroMacro));
        const PhaseSpaceArray& eta = mm.eta.back();
        // log10 of max e^{-eta/eps} at a velocity column.
        auto column_log10 = [&](int j) {
            double worst = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < eta.nx(); ++i) worst = std::max(worst, -eta(i, j) / eps);
            return worst / std::log(10.0);
        };
        const double edge = std::max(column_log10(j_lo), column_log10(j_hi));
        const double grid_edge = std::max(column_log10(0), column_log10(eq.size() - 1));
        study.metric("gap_eps" + tag(eps), max_abs_diff(mm.phi.back(), limit.phi.back()));
        study.metric("corrector_edge_eps" + tag(eps), std::pow(10.0, edge));
        study.metric("log10_corrector_grid_edge_eps" + tag(eps), grid_edge);
        if (study.writing()) {
            CsvWriter out = study.csv("corrector_eps" + tag(eps) + ".csv", {"x", "v", "corrector"},
                                      grid_comment(mm.cfg) + " t=" + tag(mm.times.back()));
            for (int i = 0; i < eta.nx(); ++i) {
                for (int j = 0; j < eta.nv(); ++j) {
                    out.row(std::vector<double>{grid.x(i), grid.v(j), std::exp(-eta(i, j) / eps)});
                }
            }
            write_side_by_side(study, "phi_eps" + tag(eps), {"micromacro", "limit"}, {&mm, &limit});
        }
    }
    return study.finish(start);
}

struct ExperimentEntry {
    std::string name;
    std::function<RunConfig()> base;
    std::function<ExperimentReport(Study, Clock::time_point)> body;
};

const std::vector<ExperimentEntry>& registry() {
    static const std::vector<ExperimentEntry> entries = {
        {"consistency_eps1", [] { return preset_config("fig_phi_reg_ep1"); }, consistency},
        {"consistency_eps1e-1", [] { return preset_config("fig_phi_reg_ep1e-1"); }, consistency},
        {"ap_vs_limit", [] { return preset_config("fig_phi_reg_ep1e-2"); }, ap_vs_limit},
        {"two_minima", [] { return preset_config("fig_two_minima"); }, two_minima_study},
        {"order_study", [] { return preset_config("fig_order_reference"); }, order_study},
        {"ua_study", [] { return preset_config("fig_order_reference"); }, ua_study},
        {"front_speed", [] { return preset_config("fig_front"); }, front_speed},
        {"speed_error_slope",
         [] {
             RunConfig c = preset_config("fig_front");
             c.snapshot_times.clear();
             return c;
         },
         speed_error_slope},
        {"singular_hamiltonian", [] { return preset_config("fig_singular"); }, singular_hamiltonian},
        {"singular_dirac", [] { return preset_config("fig_singular"); }, singular_dirac},
    };
    return entries;
}

const ExperimentEntry& find_entry(std::string_view name) {
    for (const auto& e : registry()) {
        if (e.name == name) return e;
    }
    std::ostringstream os;
    os << "unknown experiment '" << name << "' (valid experiments:";
    for (const auto& e : registry()) os << ' ' << e.name;
    os << ')';
    throw ConfigError(os.str());
}

}  // namespace

RunOutcome run_single(const RunConfig& cfg) {
    validate(cfg);
    const Grid grid = build_grid(cfg);
    const Equilibrium eq = build_equilibrium(cfg, grid);
    const std::vector<double> phi0 = initial_phase(cfg, grid);
    RunOutcome out;
    out.cfg = cfg;
    out.xs.assign(grid.xs().begin(), grid.xs().end());
    const auto start = Clock::now();
    switch (cfg.solver) {
        case SolverKind::MicroMacro: {
            const MicroMacroSolver solver(grid, eq, cfg.scheme());
            auto res = solver.run(phi0, cfg.snapshot_times);
            for (auto& snap : res.snapshots) {
                out.times.push_back(snap.time);
                std::vector<double> rho(snap.phi.size());
                for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::exp(-snap.phi[i] / cfg.eps);
                out.rho.push_back(std::move(rho));
                out.phi.push_back(std::move(snap.phi));
                out.eta.push_back(std::move(snap.eta));
            }
            out.stats = std::move(res.stats);
            out.per_step = std::move(res.per_step);
            break;
        }
        case SolverKind::ExplicitRef: {
            const ExplicitResult res = run_explicit(phi0, grid, eq, cfg.eps, cfg.r, cfg.snapshot_times);
            if (!res.advice.ok) out.warnings.push_back(res.advice.message);
            if (res.negative_entries > 0) {
                out.warnings.push_back("explicit scheme produced " + std::to_string(res.negative_entries) +
                                       " negative densities (min " + format_double(res.min_f) + ")");
            }
            for (const auto& snap : res.snapshots) {
                const HopfColeField hc = to_hopf_cole(snap, eq);
                if (hc.capped) out.warnings.push_back("Hopf-Cole logarithm capped at " + format_double(kLogFloor));
                out.times.push_back(snap.time);
                out.phi.push_back(hc.phi);
                out.rho.push_back(snap.rho);
            }
            break;
        }
        case SolverKind::HJLimit: {
            const auto snaps = run_limit(phi0, grid, eq, cfg.r, cfg.snapshot_times, cfg.ham_tol);
            for (const auto& snap : snaps) {
                out.times.push_back(snap.time);
                out.phi.push_back(snap.phi);
            }
            break;
        }
    }
    out.wall_time = seconds_since(start);
    return out;
}

std::vector<std::string> write_run(const RunOutcome& run, const std::filesystem::path& dir) {
    ensure_directory(dir);
    std::vector<std::string> files;
    const std::string comment = grid_comment(run.cfg);
    const bool has_rho = !run.rho.empty();
    for (std::size_t s = 0; s < run.times.size(); ++s) {
        const std::string t = tag(run.times[s]);
        {
            files.push_back("phi_t" + t + ".csv");
            CsvWriter out(dir / files.back(), {"x", "phi"}, comment + " t=" + t);
            for (std::size_t i = 0; i < run.xs.size(); ++i) out.row(std::vector<double>{run.xs[i], run.phi[s][i]});
        }
        if (has_rho) {
            files.push_back("rho_t" + t + ".csv");
            CsvWriter out(dir / files.back(), {"x", "rho"}, comment + " t=" + t);
            for (std::size_t i = 0; i < run.xs.size(); ++i) out.row(std::vector<double>{run.xs[i], run.rho[s][i]});
        }
        if (!run.eta.empty()) {
            files.push_back("eta_t" + t + ".csv");
            CsvWriter out(dir / files.back(), {"x", "v", "eta"}, comment + " t=" + t);
            const Grid grid = build_grid(run.cfg);
            const PhaseSpaceArray& eta = run.eta[s];
            for (int i = 0; i < eta.nx(); ++i) {
                for (int j = 0; j < eta.nv(); ++j) out.row(std::vector<double>{grid.x(i), grid.v(j), eta(i, j)});
            }
        }
    }
    {
        files.push_back("fields.csv");
        std::vector<std::string> header = {"t", "x", "phi"};
        if (has_rho) header.push_back("rho");
        CsvWriter out(dir / files.back(), header, comment);
        std::vector<double> row(header.size());
        for (std::size_t s = 0; s < run.times.size(); ++s) {
            for (std::size_t i = 0; i < run.xs.size(); ++i) {
                row[0] = run.times[s];
                row[1] = run.xs[i];
                row[2] = run.phi[s][i];
                if (has_rho) row[3] = run.rho[s][i];
                out.row(row);
            }
        }
    }
    if (run.cfg.solver == SolverKind::MicroMacro) {
        files.push_back("newton_steps.csv");
        CsvWriter out(dir / files.back(), {"step", "median_iterations", "max_iterations", "max_residual"}, comment);
        for (std::size_t n = 0; n < run.per_step.size(); ++n) {
            const auto& s = run.per_step[n];
            out.row(std::vector<double>{double(n + 1), s.median_iterations, double(s.max_iterations), s.max_residual});
        }
    }
    auto entries = manifest_entries(run.cfg);
    if (run.cfg.solver == SolverKind::MicroMacro) {
        for (const auto& e : stats_entries(run.stats)) entries.push_back(e);
    }
    entries.emplace_back("wall_time_seconds", format_double(run.wall_time));
    for (std::size_t k = 0; k < run.warnings.size(); ++k) {
        entries.emplace_back("warning." + std::to_string(k), run.warnings[k]);
    }
    write_manifest(dir / "manifest.txt", entries);
    files.push_back("manifest.txt");
    return files;
}

double ExperimentReport::metric(std::string_view key) const {
    for (const auto& [k, v] : metrics) {
        if (k == key) return v;
    }
    throw std::out_of_range("experiment " + name + " has no metric '" + std::string(key) + "'");
}

bool ExperimentReport::has_metric(std::string_view key) const {
    return std::any_of(metrics.begin(), metrics.end(), [&](const auto& kv) { return kv.first == key; });
}

std::vector<std::string> experiment_names() {
    std::vector<std::string> names;
    for (const auto& e : registry()) names.push_back(e.name);
    return names;
}

RunConfig experiment_base(std::string_view name) {
    return find_entry(name).base();
}

ExperimentReport run_experiment(std::string_view name, const std::vector<std::string>& overrides,
                                const std::filesystem::path& out_dir) {
    const ExperimentEntry& entry = find_entry(name);
    RunConfig base = entry.base();
    apply_overrides(base, overrides);
    validate(base);
    const auto start = Clock::now();
    const std::filesystem::path dir = out_dir.empty() ? out_dir : out_dir / entry.name;
    return with_context(name, [&] { return entry.body(Study(entry.name, base, dir), start); });
}

FrontRun track_front(const RunConfig& cfg) {
    validate(cfg);
    const Grid grid = build_grid(cfg);
    const Equilibrium eq = build_equilibrium(cfg, grid);
    const MicroMacroSolver solver(grid, eq, cfg.scheme());
    KineticField state = solver.initial(initial_phase(cfg, grid));
    const double level = cfg.eps * std::log(2.0);
    FrontRun out;
    out.xs.assign(grid.xs().begin(), grid.xs().end());
    out.stats.iteration_histogram.assign(static_cast<std::size_t>(cfg.newton_max_iter) + 1, 0);
    auto sample = [&]() {
        out.times.push_back(state.time);
        out.positions.push_back(phase_front_position(state.phi, grid.xs(), level));
    };
    sample();
    for (int n = 0; n < grid.nt(); ++n) {
        out.stats.merge(solver.step(state));
        try {
            sample();
        } catch (const DomainExhausted&) {
            break;  // front reached the right edge; keep the samples so far
        }
    }
    out.final_phi = state.phi;
    return out;
}

int sweep_count(double x_max, double dx) {
    return 2 * static_cast<int>(std::lround(x_max / dx));
}

}  // namespace apk
