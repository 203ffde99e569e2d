#include <doctest.h>

#include <cmath>
#include <random>

#include "apk/explicit_ref.hpp"
#include "naive_oracle.hpp"

using namespace apk;

namespace {

DistributionField field_of(const PhaseSpaceArray& f, const Grid& g, double eps, double r) {
    DistributionField d;
    d.f = f;
    d.rho = densities(f, g.dv());
    d.eps = eps;
    d.r = r;
    return d;
}

}  // namespace

TEST_CASE("equilibrium is a fixed point, zero stays zero") {
    const Grid g = Grid::build(1.0, 8, 1.0, 4, 0.5, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    PhaseSpaceArray f(8, 4);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) f(i, j) = eq[j];
    const DistributionField next = explicit_step(field_of(f, g, 0.1, 1.0), g, eq);
    for (int i = 0; i < 8; ++i) {
        CHECK(next.rho[i] == doctest::Approx(1.0).epsilon(1e-15));
        for (int j = 0; j < 4; ++j) CHECK(next.f(i, j) == doctest::Approx(eq[j]).epsilon(1e-15));
    }
    const DistributionField zero = explicit_step(field_of(PhaseSpaceArray(8, 4, 0.0), g, 0.1, 1.0), g, eq);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) CHECK(zero.f(i, j) == 0.0);
}

TEST_CASE("explicit step equals the naive transcription") {
    const Grid g = Grid::build(1.0, 8, 1.0, 4, 0.5, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    PhaseSpaceArray f(8, 4);
    oracle::Rows rows(8, std::vector<double>(4));
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) rows[i][j] = f(i, j) = u(rng);
    oracle::Setup s;
    s.v.assign(g.vs().begin(), g.vs().end());
    s.m.assign(eq.values().begin(), eq.values().end());
    s.dv = g.dv();
    s.dx = g.dx();
    s.dt = g.dt();
    s.eps = 0.5;
    s.r = 1.0;
    const DistributionField next = explicit_step(field_of(f, g, 0.5, 1.0), g, eq);
    const oracle::Rows ref = oracle::explicit_step(rows, s);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) CHECK(next.f(i, j) == doctest::Approx(ref[i][j]).epsilon(1e-13));
}

TEST_CASE("stability advisory") {
    const Grid g = Grid::build(1.0, 200, 1.0, 16, 1.0, 400, Boundary::Periodic);
    CHECK(explicit_stability(g, 1.0, 0.0).ok);
    const StabilityAdvice bad = explicit_stability(g, 1e-4, 1.0);
    CHECK_FALSE(bad.ok);
    CHECK(bad.dt_limit == doctest::Approx(0.9 * 1e-4 / 3.0));
    CHECK_FALSE(bad.message.empty());
}

TEST_CASE("Hopf-Cole transforms") {
    const Grid g = Grid::build(1.0, 8, 1.0, 4, 0.5, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    PhaseSpaceArray f(8, 4);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) f(i, j) = eq[j] * std::exp(-1.0);
    const HopfColeField hc = to_hopf_cole(field_of(f, g, 1.0, 0.0), eq);
    for (int i = 0; i < 8; ++i) {
        CHECK(hc.phi[i] == doctest::Approx(1.0).epsilon(1e-15));
        for (int j = 0; j < 4; ++j) CHECK(hc.eta(i, j) == doctest::Approx(0.0).scale(1e-15));
    }

    const double eps = 0.3;
    const std::vector<double> half(8, eps * std::log(2.0));
    const DistributionField d = from_hopf_cole(half, PhaseSpaceArray(8, 4, 0.0), eps, 0.0, eq);
    for (double rho : d.rho) CHECK(rho == doctest::Approx(0.5).epsilon(1e-14));
    const DistributionField one = from_hopf_cole(std::vector<double>(8, 0.0), PhaseSpaceArray(8, 4, 0.0), eps, 0.0, eq);
    for (int i = 0; i < 8; ++i) {
        CHECK(one.rho[i] == doctest::Approx(1.0).epsilon(1e-15));
        for (int j = 0; j < 4; ++j) CHECK(one.f(i, j) == doctest::Approx(eq[j]).epsilon(1e-15));
    }

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) f(i, j) = u(rng);
    const DistributionField orig = field_of(f, g, eps, 0.0);
    const HopfColeField back = to_hopf_cole(orig, eq);
    const DistributionField again = from_hopf_cole(back.phi, back.eta, eps, 0.0, eq);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) CHECK(again.f(i, j) == doctest::Approx(f(i, j)).epsilon(1e-12));
}

TEST_CASE("eta is masked where M vanishes") {
    const Grid g = Grid::build(1.0, 8, 1.0, 8, 0.5, 10, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::SingularParabolic, g);
    PhaseSpaceArray f(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) f(i, j) = eq[j];
    const HopfColeField hc = to_hopf_cole(field_of(f, g, 1.0, 0.0), eq);
    CHECK(hc.mask[0] == 0);
    CHECK(hc.mask[7] == 0);
    CHECK(hc.mask[3] == 1);
    CHECK(std::isnan(hc.eta(2, 0)));
    CHECK(std::abs(hc.eta(2, 3)) < 1e-14);
}

TEST_CASE("explicit run keeps f nonnegative under the advisory step") {
    const Grid g = Grid::build(1.0, 40, 1.0, 8, 0.5, 100, Boundary::Periodic);
    const Equilibrium eq = Equilibrium::build(EquilibriumKind::Uniform, g);
    std::vector<double> phi(40);
    for (int i = 0; i < 40; ++i) phi[i] = g.x(i) * g.x(i);
    const ExplicitResult res = run_explicit(phi, g, eq, 1.0, 1.0);
    CHECK(res.advice.ok);
    CHECK(res.negative_entries == 0);
    CHECK(res.min_f >= 0.0);
}
