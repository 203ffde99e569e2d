#include <doctest.h>

#include <cmath>
#include <random>

#include "apk/analysis.hpp"
#include "apk/errors.hpp"
#include "naive_oracle.hpp"

using namespace apk;

TEST_CASE("sup_error") {
    const std::vector<double> a = {1.0, -3.0, 2.0};
    CHECK(sup_error(a, a) == 0.0);
    CHECK(sup_error(std::vector<double>(4, 2.0), std::vector<double>(4, 1.0)) == 0.5);
    CHECK_THROWS_AS((void)sup_error(std::vector<double>(3, 0.0), a), ValidationError);
}

TEST_CASE("restriction to coarser grids") {
    const Grid fine = Grid::build(1.0, 600, 1.0, 4, 0.1, 100, Boundary::Periodic);
    const Grid coarse = Grid::build(1.0, 200, 1.0, 4, 0.1, 100, Boundary::Periodic);
    const Grid other = Grid::build(1.0, 300, 1.0, 4, 0.1, 100, Boundary::Periodic);
    std::vector<double> f(600);
    for (int i = 0; i < 600; ++i) f[i] = 3.0 * fine.x(i) + 1.0;
    const Restriction r = restrict_to(f, fine, coarse);
    CHECK(r.exact);
    for (int i = 0; i < 200; ++i) CHECK(r.values[i] == doctest::Approx(3.0 * coarse.x(i) + 1.0).epsilon(1e-13));
    const Restriction lin = restrict_to(f, fine, other);
    CHECK_FALSE(lin.exact);
    for (int i = 0; i < 300; ++i) CHECK(lin.values[i] == doctest::Approx(3.0 * other.x(i) + 1.0).epsilon(1e-12));
}

TEST_CASE("front position of a step") {
    const Grid g = Grid::build(1.0, 200, 1.0, 4, 1.0, 400, Boundary::Neumann);
    std::vector<double> rho(200);
    for (double shift : {0.0, 0.25}) {
        for (int i = 0; i < 200; ++i) rho[i] = g.x(i) < shift ? 1.0 : 0.0;
        CHECK(std::abs(front_position(rho, g.xs()) - shift) <= g.dx() / 2 + 1e-12);
    }
    CHECK_THROWS_AS((void)front_position(std::vector<double>(200, 1.0), g.xs()), DomainExhausted);
    std::vector<double> phi(200);
    for (int i = 0; i < 200; ++i) phi[i] = g.x(i) < 0.25 ? 0.0 : 1.0;
    CHECK(std::abs(phase_front_position(phi, g.xs(), 0.5) - 0.25) <= g.dx() / 2 + 1e-12);
}

TEST_CASE("front speed fit") {
    FrontTrack exact, noisy;
    std::mt19937_64 rng(12);
    const double dx = 1e-2;
    std::uniform_real_distribution<double> u(-dx, dx);
    for (int n = 0; n <= 100; ++n) {
        const double t = 0.01 * n;
        exact.times.push_back(t);
        exact.positions.push_back(0.7 * t - 0.3);
        noisy.times.push_back(t);
        noisy.positions.push_back(0.7 * t + u(rng));
    }
    CHECK(fit_front_speed(exact).slope == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(std::abs(fit_front_speed(noisy).slope - 0.7) < 10 * dx);
    FrontTrack few{{0, 1, 2}, {0, 1, 2}};
    CHECK_THROWS_AS((void)fit_front_speed(few), ValidationError);
}

TEST_CASE("speed oracle against an independent minimisation") {
    const Grid g = Grid::build(1.0, 8, 1.0, 160, 0.5, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    const std::vector<double> v(g.vs().begin(), g.vs().end()), m(eq.values().begin(), eq.values().end());
    auto c = [&](double p) { return (oracle::hamiltonian(p, p, 1.0, v, m, g.dv()) + 1.0) / p; };
    // Golden section on [1, 10]; c is unimodal there.
    double a = 1.0, b = 10.0;
    const double k = (std::sqrt(5.0) - 1.0) / 2.0;
    while (b - a > 1e-9) {
        const double x1 = b - k * (b - a), x2 = a + k * (b - a);
        if (c(x1) < c(x2)) b = x2;
        else a = x1;
    }
    const double c_ref = c(0.5 * (a + b));
    const SpeedOracle o = speed_oracle(1.0, eq);
    CHECK(o.c_star == doctest::Approx(c_ref).epsilon(1e-9));
    CHECK(o.p_star == doctest::Approx(0.5 * (a + b)).epsilon(1e-4));
    CHECK(o.c_star == doctest::Approx(0.7713868739).epsilon(1e-8));
    // c(p) ~ r / p as p -> 0
    CHECK(speed_function(1e-4, 1.0, eq) > 0.9e4);
    CHECK_THROWS_AS((void)speed_oracle(0.0, eq), ConfigError);
    CHECK_THROWS_AS((void)speed_oracle(1.0, eq, 5.0, 50.0), ConfigError);
}

TEST_CASE("order fit") {
    ConvergenceTable t;
    for (double dx : {4e-3, 8e-3, 16e-3, 32e-3}) {
        t.rows.push_back({1.0, dx, 3.0 * dx});
        t.rows.push_back({0.1, dx, 5.0 * dx * dx});
    }
    t.rows.push_back({0.1, 64e-3, 0.0});
    const auto fits = order_fit(t);
    REQUIRE(fits.size() == 2);
    CHECK(fits[0].eps == 1.0);
    CHECK(fits[0].fit.slope == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fits[1].fit.slope == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fits[1].warnings.size() == 1);
    ConvergenceTable short_table;
    short_table.rows = {{1.0, 1e-2, 1e-2}, {1.0, 2e-2, 2e-2}};
    CHECK_THROWS_AS((void)order_fit(short_table), ValidationError);
}
