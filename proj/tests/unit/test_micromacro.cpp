#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>

#include "apk/errors.hpp"
#include "apk/micromacro.hpp"
#include "naive_oracle.hpp"

using namespace apk;

namespace {

struct Cell {
    std::vector<double> eta_prev, transport, m, v;
    double phi_prev = 0.5, dv = 0.5, eps = 1.0, r = 0.0, dt = 0.05;

    CellInputs inputs() const {
        CellInputs in;
        in.eta_prev = eta_prev;
        in.phi_prev = phi_prev;
        in.transport = transport;
        in.m = m;
        in.dv = dv;
        in.eps = eps;
        in.r = r;
        in.dt = dt;
        return in;
    }
    oracle::Setup setup() const {
        oracle::Setup s;
        s.v = v;
        s.m = m;
        s.dv = dv;
        s.dt = dt;
        s.eps = eps;
        s.r = r;
        return s;
    }
    oracle::CellData data() const { return {eta_prev, phi_prev, transport}; }
};

// N_v = 4 on [-1, 1], uniform M, eta^n normalised so that <M e^{-eta/eps}> = 1.
Cell random_cell(std::mt19937_64& rng, double eps, double r) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Cell c;
    c.v = {-0.75, -0.25, 0.25, 0.75};
    c.m.assign(4, 0.5);
    c.eps = eps;
    c.r = r;
    c.phi_prev = 0.5 + 0.4 * u(rng);
    double avg = 0.0;
    for (int j = 0; j < 4; ++j) {
        c.eta_prev.push_back(0.3 * eps * u(rng));
        c.transport.push_back(0.5 * u(rng));
        avg += c.dv * c.m[j] * std::exp(-c.eta_prev[j] / eps);
    }
    for (double& e : c.eta_prev) e += eps * std::log(avg);
    return c;
}

}  // namespace

TEST_CASE("upwind transport") {
    const Grid g = Grid::build(1.0, 200, 1.0, 2, 1.0, 400, Boundary::Periodic);
    PhaseSpaceArray eta(g.nx(), g.nv(), 0.0);
    std::vector<double> phi(200, 3.0);
    CHECK(upwind_transport(phi, eta, 17, 0, g) == 0.0);
    CHECK(upwind_transport(phi, eta, 17, 1, g) == 0.0);

    for (int i = 0; i < g.nx(); ++i) phi[i] = g.x(i);
    CHECK(g.v(1) == 0.5);
    CHECK(upwind_transport(phi, eta, 100, 1, g) == doctest::Approx(0.5).epsilon(1e-12));

    for (int i = 0; i < g.nx(); ++i) phi[i] = g.x(i) * g.x(i);
    // x_125 = 0.255, v = -0.5: forward difference -0.5 (0.265^2 - 0.255^2) / 0.01
    CHECK(g.x(125) == doctest::Approx(0.255));
    CHECK(upwind_transport(phi, eta, 125, 0, g) == doctest::Approx(-0.26).epsilon(1e-10));
}

TEST_CASE("residual vanishes on the uniform steady state") {
    Cell c;
    c.v = {-0.75, -0.25, 0.25, 0.75};
    c.m.assign(4, 0.5);
    c.eta_prev.assign(4, 0.0);
    c.transport.assign(4, 0.0);
    std::vector<double> out(5);
    cell_residual(c.eta_prev, 0.0, c.inputs(), out);
    for (double x : out) CHECK(x == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("residual matches the naive transcription") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Cell c = random_cell(rng, trial % 2 ? 1.0 : 0.1, trial % 3 ? 1.0 : 0.0);
        std::vector<double> eta = c.eta_prev;
        for (double& e : eta) e += 0.01 * c.eps * (trial % 5 - 2);
        const double H = 0.1 * (trial % 4) - 0.1;
        std::vector<double> mine(5);
        cell_residual(eta, H, c.inputs(), mine);
        Eigen::VectorXd u(5);
        for (int j = 0; j < 4; ++j) u[j] = eta[j];
        u[4] = H;
        const Eigen::VectorXd ref = oracle::residual(u, c.data(), c.setup());
        for (int k = 0; k < 5; ++k) CHECK(mine[k] == doctest::Approx(ref[k]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("arrowhead inverse, N_v = 3") {
    const std::vector<double> alpha = {-2.0, -3.5, -1.25};
    const std::vector<double> gamma = {0.3, 0.7, 0.2};
    const std::vector<double> delta = {1.5, 0.4, 2.0};
    const ArrowheadSystem sys = ArrowheadSystem::from_entries(alpha, gamma, delta);
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
        A(j, j) = alpha[j];
        A(j, 3) = delta[j];
        A(3, j) = gamma[j];
        s += gamma[j] * delta[j] / alpha[j];
    }
    CHECK(sys.S() == doctest::Approx(s).epsilon(1e-15));
    const Eigen::Matrix4d inv = A.inverse();
    CHECK(inv(3, 3) == doctest::Approx(-1.0 / s).epsilon(1e-13));

    std::vector<double> out(4);
    for (int k = 0; k < 4; ++k) {
        std::vector<double> e(4, 0.0);
        e[k] = 1.0;
        sys.apply_inverse(e, out);
        for (int row = 0; row < 4; ++row) CHECK(out[row] == doctest::Approx(inv(row, k)).epsilon(1e-13));
    }
    sys.apply_inverse(std::vector<double>(4, 0.0), out);
    for (double x : out) CHECK(x == 0.0);
}

TEST_CASE("jacobian inverse matches a dense solve of the naive jacobian") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Cell c = random_cell(rng, trial % 2 ? 1.0 : 1e-2, trial % 3 ? 1.0 : 0.0);
        const double H = 0.05 * trial - 0.2;
        const CellInputs in = c.inputs();
        const ArrowheadSystem sys = ArrowheadSystem::jacobian(c.eta_prev, H, in);
        Eigen::VectorXd u(5);
        for (int j = 0; j < 4; ++j) u[j] = c.eta_prev[j];
        u[4] = H;
        const Eigen::MatrixXd J = oracle::jacobian(u, c.data(), c.setup());
        const std::vector<double> rhs = {0.3, -0.1, 0.7, 0.2, -0.4};
        const Eigen::VectorXd ref = J.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), 5));
        std::vector<double> out(5);
        sys.apply_inverse(rhs, out);
        for (int k = 0; k < 5; ++k) CHECK(out[k] == doctest::Approx(ref[k]).epsilon(1e-10).scale(1e-3));
    }
}

TEST_CASE("solve_cell: uniform state is already the root") {
    Cell c;
    c.v = {-0.75, -0.25, 0.25, 0.75};
    c.m.assign(4, 0.5);
    c.eta_prev.assign(4, 0.0);
    c.transport.assign(4, 0.0);
    const CellSolution s = solve_cell(c.eta_prev, 0.0, c.inputs(), SchemeConfig{});
    CHECK(s.report.converged);
    CHECK(s.report.iterations <= 1);
    CHECK(s.H == doctest::Approx(0.0).scale(1e-12));
    for (double e : s.eta) CHECK(e == doctest::Approx(0.0).scale(1e-12));
}

TEST_CASE("solve_cell agrees with the dense Newton oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const double eps = trial < 10 ? 0.1 : 1e-3;
        const Cell c = random_cell(rng, eps, trial % 2 ? 1.0 : 0.0);
        SchemeConfig cfg;
        cfg.eps = c.eps;
        cfg.r = c.r;
        const CellSolution mine = solve_cell(c.eta_prev, 0.0, c.inputs(), cfg);
        const oracle::Root ref = oracle::solve_cell(c.data(), 0.0, c.setup());
        REQUIRE(ref.residual < 1e-12);
        CHECK(std::abs(mine.H - ref.H) < 1e-10);
        for (int j = 0; j < 4; ++j) CHECK(std::abs(mine.eta[j] - ref.eta[j]) < 1e-10);
    }
}

TEST_CASE("solve_cell reports non-convergence") {
    std::mt19937_64 rng(5);
    const Cell c = random_cell(rng, 1e-3, 1.0);
    SchemeConfig cfg;
    cfg.eps = c.eps;
    cfg.r = c.r;
    cfg.newton_max_iter = 1;
    cfg.newton_tol = 1e-300;
    CHECK_THROWS_AS((void)solve_cell(c.eta_prev, 0.0, c.inputs(), cfg), SolverError);
}

TEST_CASE("uniform state is stationary for r = 0") {
    const Grid g = Grid::build(1.0, 16, 1.0, 8, 0.1, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    for (double eps : {1.0, 1e-4}) {
        SchemeConfig cfg;
        cfg.eps = eps;
        const MicroMacroSolver solver(g, eq, cfg);
        KineticField f = solver.initial(std::vector<double>(16, 0.7));
        for (int n = 0; n < 3; ++n) solver.step(f);
        for (double p : f.phi) CHECK(p == doctest::Approx(0.7).epsilon(1e-14));
    }
}

TEST_CASE("one step equals the naive scheme") {
    const Grid g = Grid::build(1.0, 8, 1.0, 4, 0.5, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double eps : {1.0, 1e-3}) {
        for (double r : {0.0, 1.0}) {
            SchemeConfig cfg;
            cfg.eps = eps;
            cfg.r = r;
            const MicroMacroSolver solver(g, eq, cfg);
            std::vector<double> phi0(8);
            for (double& p : phi0) p = 0.2 + 0.6 * u(rng);
            KineticField f = solver.initial(phi0);
            oracle::Setup s;
            s.v.assign(g.vs().begin(), g.vs().end());
            s.m.assign(eq.values().begin(), eq.values().end());
            s.dv = g.dv();
            s.dx = g.dx();
            s.dt = g.dt();
            s.eps = eps;
            s.r = r;
            oracle::State ref{f.phi, oracle::Rows(8, std::vector<double>(4, 0.0)), f.H};
            for (int n = 0; n < 2; ++n) {
                solver.step(f);
                ref = oracle::step(ref, s);
            }
            for (int i = 0; i < 8; ++i) {
                CHECK(std::abs(f.phi[i] - ref.phi[i]) < 1e-10);
                for (int j = 0; j < 4; ++j) CHECK(std::abs(f.eta(i, j) - ref.eta[i][j]) < 1e-10);
            }
        }
    }
}

TEST_CASE("maximum principle holds after a step") {
    const Grid g = Grid::build(1.0, 32, 1.0, 16, 0.5, 40, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double eps : {1.0, 1e-2, 1e-6}) {
        for (double r : {0.0, 1.0}) {
            SchemeConfig cfg;
            cfg.eps = eps;
            cfg.r = r;
            const MicroMacroSolver solver(g, eq, cfg);
            std::vector<double> phi0(32);
            const double a = u(rng), b = u(rng);
            for (int i = 0; i < 32; ++i) phi0[i] = 1.0 + std::sin(3.14159265358979 * (a + b * g.x(i)));
            KineticField f = solver.initial(phi0);
            for (int n = 0; n < 5; ++n) {
                solver.step(f);
                CHECK(check_maximum_principle(f, 2.0, g).worst() <= 1e-10);
            }
        }
    }
}

TEST_CASE("run with n_t = 0 returns the initial snapshot") {
    const Grid g = Grid::build(1.0, 8, 1.0, 4, 0.0, 0, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    const MicroMacroSolver solver(g, eq, SchemeConfig{});
    const std::vector<double> phi0 = {1, 2, 3, 4, 4, 3, 2, 1};
    const auto res = solver.run(phi0);
    REQUIRE(res.snapshots.size() == 1);
    CHECK(res.snapshots[0].phi == phi0);
    CHECK(res.snapshots[0].time == 0.0);
}

TEST_CASE("step failures carry cell and step") {
    const Grid g = Grid::build(1.0, 8, 1.0, 4, 0.5, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    SchemeConfig cfg;
    cfg.newton_max_iter = 1;
    cfg.newton_tol = 1e-300;
    const MicroMacroSolver solver(g, eq, cfg);
    KineticField f = solver.initial(std::vector<double>{0, 1, 2, 3, 3, 2, 1, 0});
    try {
        solver.step(f);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.cell() >= 0);
        CHECK(e.step() == 0);
        CHECK(std::string(e.what()).find("cell") != std::string::npos);
    }
}
