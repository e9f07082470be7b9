#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "intermix/grassman_horner.hpp"

using namespace intermix;

namespace {
GHParams canonical() { return GHParams{1.5, 0.5, 1.0, 1.0, {}}; }
}

TEST_CASE("canonical build passes the full validation suite") {
    const GHMap m = GHMap::build(canonical(), GHMap::Validation::full);
    CHECK(m.validation().all_pass);
    CHECK(m.validation().find("condition (i), derivative interpretation") != nullptr);
    CHECK(m.eps() > 0.0);
    CHECK(m.eps() <= 0.25);
    CHECK(m.rho() == doctest::Approx(0.25));
    CHECK(m.knee() > m.eps());
    CHECK(m.knee() < 1.0 - m.rho());
}

TEST_CASE("exact local pieces are reproduced with zero error") {
    const GHMap m = GHMap::build(canonical());
    const GHParams& p = m.params();
    // near 1: h(x) = -x + a(1-x)^gamma, so h(1) = -1
    CHECK(m.forward(1.0) == doctest::Approx(-1.0).epsilon(1e-15));
    const double xr = 1.0 - 0.5 * m.rho();
    CHECK(m.forward(xr) ==
          doctest::Approx(-xr + p.a * std::pow(1.0 - xr, p.gamma)).epsilon(1e-15));
    // near 0: h(x) = 1 - b x^k exactly on (0, eps]
    const double xc = 0.5 * m.eps();
    CHECK(m.forward(xc) == doctest::Approx(1.0 - p.b * std::pow(xc, p.k)).epsilon(1e-15));
    CHECK(m.forward(1e-10) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("h is even: the I^- branch mirrors to 1 - b|x|^k at 0^-") {
    const GHMap m = GHMap::build(canonical());
    for (double x : {0.01, 0.2, 0.45, 0.8, 0.99}) {
        CHECK(m.forward(-x) == doctest::Approx(m.forward(x)).epsilon(1e-15));
        CHECK(m.derivative(-x) == doctest::Approx(-m.derivative(x)).epsilon(1e-14));
        CHECK(m.second_derivative(-x) ==
              doctest::Approx(m.second_derivative(x)).epsilon(1e-14));
    }
    CHECK(m.forward(-1.0) == doctest::Approx(-1.0));   // neutral fixed point
    CHECK(m.forward(-1e-9) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("inverse: endpoints, interior root, quadratic glue pieces") {
    const GHMap m = GHMap::build(canonical());
    CHECK(m.inverse(-1.0, Side::plus) == doctest::Approx(1.0).epsilon(1e-12));
    // x_1^+ with h(x_1^+) = 0, bracketed on the monotone plus branch
    const double x1p = m.inverse(0.0, Side::plus);
    CHECK(std::abs(m.forward(x1p)) < 1e-12);
    // round-trip across all regions
    for (double y = -0.999; y < 0.999; y += 0.037) {
        const double xp = m.inverse(y, Side::plus);
        CHECK(std::abs(m.forward(xp) - y) < 1e-11);
        const double xm = m.inverse(y, Side::minus);
        CHECK(xm < 0.0);
        CHECK(std::abs(m.forward(xm) - y) < 1e-11);
    }
}

TEST_CASE("derivative blow-up |h'| ~ b k x^{k-1} at the singular point") {
    const GHMap m = GHMap::build(canonical());
    const GHParams& p = m.params();
    for (double x : {1e-4, 1e-6, 1e-8}) {
        const double expect = p.b * p.k * std::pow(x, p.k - 1.0);
        CHECK(std::abs(m.derivative(x)) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(std::abs(m.derivative(1e-8)) > 1e3);
}

TEST_CASE("analytic derivatives match finite differences away from junctions") {
    const GHMap m = GHMap::build(canonical());
    const auto junctions = m.junctions();
    RngStream rng{CounterRng{5}};
    int checked = 0;
    for (int i = 0; i < 20000 && checked < 800; ++i) {
        const double x = 1e-3 + (1.0 - 2e-3) * rng.uniform();
        bool near = false;
        for (double j : junctions)
            if (std::abs(x - j) < 1e-4) near = true;
        if (near || x > 1.0 - 1e-3) continue;
        const double h = 1e-7 * (1.0 + x);
        const double fd = (m.forward(x + h) - m.forward(x - h)) / (2.0 * h);
        CHECK(std::abs(fd - m.derivative(x)) / std::abs(m.derivative(x)) < 1e-6);
        ++checked;
    }
    CHECK(checked >= 800);
}

TEST_CASE("glue keeps monotonicity, convexity and expansion by construction") {
    // a spread of parameter tuples; every successful build must validate
    for (double gamma : {1.2, 1.5, 1.8, 2.0})
        for (double k : {0.3, 0.5, 0.7}) {
            GHParams p{gamma, k, 1.0, 1.0, {}};
            if (p.zeta() >= 1.0) continue;
            const GHMap m = GHMap::build(p, GHMap::Validation::full);
            CHECK(m.validation().all_pass);
            // h' strictly increasing across the glue (convexity)
            const double d_eps = m.derivative(m.eps() + 1e-9);
            const double d_rho = m.derivative(1.0 - m.rho() - 1e-9);
            CHECK(d_eps <= d_rho + 1e-9);
            CHECK(std::abs(d_rho) > 1.0);
        }
}

TEST_CASE("invalid parameters are rejected with the violated condition") {
    CHECK_THROWS_AS(GHMap::build(GHParams{2.5, 0.5, 1.0, 1.0, {}}), std::invalid_argument);
    CHECK_THROWS_AS(GHMap::build(GHParams{1.5, 1.2, 1.0, 1.0, {}}), std::invalid_argument);
    CHECK_THROWS_AS(GHMap::build(GHParams{1.5, 0.5, -1.0, 1.0, {}}), std::invalid_argument);
    // a = 50 pushes the near-1 piece far above 1: no feasible glue exists
    CHECK_THROWS_AS(GHMap::build(GHParams{1.5, 0.5, 50.0, 1.0, {}}), GHBuildError);
    // k close to 1 makes the singular piece barely expanding: still buildable,
    // just with a tiny exact region
    const GHMap m = GHMap::build(GHParams{1.9, 0.95, 1.0, 1.0, {}});
    CHECK(m.validation().all_pass);
    CHECK(m.eps() < 1e-5);
}

TEST_CASE("neutral-point error term vanishes on the exact pieces") {
    const GHMap m = GHMap::build(canonical());
    CHECK(std::abs(m.u_error_neutral(-1.0 + 0.1 * m.rho())) < 1e-14);
    CHECK(std::abs(m.u_error_neutral(1.0 - 0.1 * m.rho())) < 1e-14);
    CHECK(std::abs(m.u_error_origin(0.5 * m.eps())) < 1e-14);
    // and stays finite in the glue
    CHECK(std::isfinite(m.u_error_neutral(-0.5)));
}
