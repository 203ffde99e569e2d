#include <doctest.h>

#include <cmath>
#include <random>

#include "apk/errors.hpp"
#include "apk/hj_limit.hpp"
#include "naive_oracle.hpp"

using namespace apk;

namespace {

struct Velocity {
    Grid grid;
    Equilibrium eq;
    std::vector<double> v, m;
};

Velocity velocity(EquilibriumKind kind, int n_v) {
    const Grid g = Grid::build(1.0, 8, 1.0, n_v, 0.5, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(kind, g);
    return {g, eq, {g.vs().begin(), g.vs().end()}, {eq.values().begin(), eq.values().end()}};
}

}  // namespace

TEST_CASE("H vanishes at zero slope") {
    const Velocity u = velocity(EquilibriumKind::Uniform, 160);
    for (double r : {0.0, 0.5, 1.0}) CHECK(std::abs(eval_hamiltonian(0.0, r, u.eq).value) < 1e-13);
}

TEST_CASE("H agrees with a bisection oracle") {
    const Velocity u = velocity(EquilibriumKind::Uniform, 160);
    for (double r : {0.0, 1.0}) {
        for (auto [p, q] : {std::pair{0.5, 0.5}, {-1.2, 0.3}, {2.0, -0.7}, {0.1, 1.9}, {-3.0, -3.0}}) {
            const double ref = oracle::hamiltonian(p, q, r, u.v, u.m, u.grid.dv());
            CHECK(eval_hamiltonian(p, q, r, u.eq).value == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("H is even for an even equilibrium") {
    const Velocity u = velocity(EquilibriumKind::Uniform, 160);
    const Velocity s = velocity(EquilibriumKind::SingularParabolic, 40);
    for (double p : {0.3, 1.0, 2.5, 7.0}) {
        CHECK(eval_hamiltonian(-p, 1.0, u.eq).value == doctest::Approx(eval_hamiltonian(p, 1.0, u.eq).value).epsilon(1e-12));
        CHECK(eval_hamiltonian(-p, 0.0, s.eq).value == doctest::Approx(eval_hamiltonian(p, 0.0, s.eq).value).epsilon(1e-12));
    }
}

TEST_CASE("Sing(M)") {
    const Velocity u = velocity(EquilibriumKind::Uniform, 160);
    const Velocity s = velocity(EquilibriumKind::SingularParabolic, 40);
    for (double p = -20.0; p <= 20.0; p += 0.37) CHECK_FALSE(in_sing_set(p, u.eq));
    CHECK(in_sing_set(10.0, s.eq));
    CHECK(in_sing_set(-10.0, s.eq));
    CHECK_FALSE(in_sing_set(0.0, s.eq));
    CHECK_FALSE(in_sing_set(0.0, u.eq));
    CHECK(mu(-2.0, s.eq) == doctest::Approx(2.0 * 0.975));
}

TEST_CASE("singular branch returns mu(p) - 1 exactly") {
    const Velocity s = velocity(EquilibriumKind::SingularParabolic, 40);
    for (double p : {10.0, -12.5, 40.0}) {
        const HamiltonianEval h = eval_hamiltonian(p, 0.0, s.eq);
        CHECK(h.branch == HamiltonianBranch::SingularBoundary);
        CHECK(h.value == mu(p, s.eq) - 1.0);
    }
    CHECK(eval_hamiltonian(0.5, 0.0, s.eq).branch == HamiltonianBranch::Implicit);
    CHECK_THROWS_AS((void)eval_hamiltonian(10.0, 1.0, s.eq), UnsupportedError);
}

TEST_CASE("limit step") {
    const Grid g = Grid::build(1.0, 8, 1.0, 16, 0.5, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    HJField c;
    c.phi.assign(8, 0.3);
    CHECK(limit_step(c, g, eq, 0.0).phi == c.phi);
    const HJField next = limit_step(c, g, eq, 1.0);
    for (double p : next.phi) CHECK(p == doctest::Approx(std::max(0.0, 0.3 - g.dt())).epsilon(1e-13));

    c.phi.assign(8, 0.0);
    for (double p : limit_step(c, g, eq, 1.0).phi) CHECK(p == 0.0);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& p : c.phi) p = u(rng);
    const HJField step = limit_step(c, g, eq, 0.0);
    const std::vector<double> v(g.vs().begin(), g.vs().end()), m(eq.values().begin(), eq.values().end());
    for (int i = 0; i < 8; ++i) {
        const double p = (c.phi[i] - c.phi[(i + 7) % 8]) / g.dx();
        const double q = (c.phi[(i + 1) % 8] - c.phi[i]) / g.dx();
        const double H = oracle::hamiltonian(p, q, 0.0, v, m, g.dv());
        CHECK(step.phi[i] == doctest::Approx(c.phi[i] - g.dt() * H).epsilon(1e-12));
    }
}

TEST_CASE("run_limit with n_t = 0") {
    const Grid g = Grid::build(1.0, 8, 1.0, 16, 0.0, 0, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    const std::vector<double> phi = {1, 2, 3, 4, 5, 6, 7, 8};
    const auto snaps = run_limit(phi, g, eq, 0.0);
    REQUIRE(snaps.size() == 1);
    CHECK(snaps[0].phi == phi);
}

TEST_CASE("monotonicity of the limit scheme") {
    const Grid g = Grid::build(1.0, 200, 1.0, 160, 1.0, 200, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    const MonotonicityEstimate flat = monotonicity_check({0.4, 0.4, 0.4}, 0.0, eq, g);
    CHECK(flat.within_bounds(1e-6));
    CHECK(flat.d_center <= 1.0 + 1e-6);
    CHECK(flat.d_center >= 1.0 - flat.cfl - 1e-6);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const std::array<double, 3> phi = {u(rng), u(rng), u(rng)};
        CHECK(monotonicity_check(phi, k % 2 ? 1.0 : 0.0, eq, g).within_bounds(1e-6));
    }
}
