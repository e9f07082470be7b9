#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "intermix/distortion.hpp"

using namespace intermix;

namespace {
ParamDistribution canonical_discrete() {
    return ParamDistribution::discrete_pik({{1.5, 0.5}, {2.5, 0.5}});
}
ParamDistribution const_pik(double a) { return ParamDistribution::uniform_pik(a, a); }
}

TEST_CASE("separation time: definitional cases") {
    const OmegaWindow w = sample_omega(canonical_discrete(), 0, 4096, 11);
    LadderCache cache(w);
    const InducedPartition part = build_partition(w, 20);
    REQUIRE(part.cells.size() > 4);
    // points in distinct cells separate at s = 0
    const auto& a = part.cells[0];
    const auto& b = part.cells[3];
    const SeparationResult r0 = separation_time(
        cache, 0.5 * (a.left + a.right), 0.5 * (b.left + b.right), 40);
    CHECK(!r0.censored);
    CHECK(r0.s == 0);
    // identical points never separate
    const SeparationResult rsame =
        separation_time(cache, 0.5 * (a.left + a.right), 0.5 * (a.left + a.right), 10);
    CHECK(rsame.exceeded);
}

TEST_CASE("contraction: |x-y| <= (1/2)^{s(x,y)} on dyadic pairs") {
    const OmegaWindow w = sample_omega(canonical_discrete(), 0, 4096, 13);
    LadderCache cache(w);
    RngStream rng{CounterRng{17}};
    const double lam_left = -1.0 / (2.0 * w.pik_alpha(0));
    int measured = 0, violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = lam_left * (0.02 + 0.96 * rng.uniform());
        const int m = 2 + static_cast<int>(rng.uniform() * 30);
        const double y = x + std::abs(lam_left) * std::ldexp(1.0, -m);
        if (y >= 0.0) continue;
        const SeparationResult r = separation_time(cache, x, y, 64);
        if (r.censored || r.exceeded) continue;
        ++measured;
        if (std::abs(x - y) > std::ldexp(1.0, -r.s)) ++violations;
    }
    CHECK(measured > 700);
    CHECK(violations == 0);
}

TEST_CASE("induced Jacobian: doubling sanity and uniform expansion") {
    // alpha = 1 sanity mode: every branch has slope 2, so J = 2^{i+j}
    const OmegaWindow w1 = sample_omega(const_pik(1.0), 0, 64, 1);
    const InducedPartition p1 = build_partition(w1, 8);
    for (const auto& c : p1.cells) {
        const double x = 0.5 * (c.left + c.right);
        CHECK(induced_jacobian(w1, c, x) ==
              doctest::Approx(std::ldexp(1.0, c.return_time)).epsilon(1e-9));
    }

    const OmegaWindow w = sample_omega(canonical_discrete(), 0, 64, 3);
    const InducedPartition part = build_partition(w, 16);
    for (const auto& c : part.cells) {
        const double x = 0.5 * (c.left + c.right);
        CHECK(induced_jacobian(w, c, x) > 2.0);
    }
}

TEST_CASE("log J matches the secant slope of the induced map") {
    const OmegaWindow w = sample_omega(canonical_discrete(), 0, 64, 5);
    const InducedPartition part = build_partition(w, 24);
    int checked = 0;
    for (const auto& c : part.cells) {
        if (c.length() < 1e-10) continue;
        const double x = 0.5 * (c.left + c.right);
        const double j = induced_jacobian(w, c, x);
        // step sized so the image displacement is ~1e-7: small enough that
        // the Jacobian barely varies, large enough to beat cancellation
        const double h = 1e-7 / j;
        if (x + h >= c.right) continue;
        const double fa = cocycle_apply(w, c.return_time, x);
        const double fb = cocycle_apply(w, c.return_time, x + h);
        const double secant = std::log(std::abs(fb - fa) / h);
        const double logj = std::log(j);
        CHECK(std::abs(secant - logj) / std::abs(logj) < 1e-4);
        ++checked;
    }
    CHECK(checked > 50);
}

TEST_CASE("distortion scan: two-layer bound and cutoff stability") {
    const OmegaWindow w = sample_omega(canonical_discrete(), 0, 8192, 19);
    std::vector<double> fitted;
    for (int cutoff : {50, 100, 200}) {
        const InducedPartition part = build_partition(w, cutoff);
        const DistortionScan scan = distortion_scan(w, part.cells, 2, 7);
        CHECK(scan.fitted_D > 0.0);
        CHECK(scan.fitted_D < 1e4);
        CHECK(scan.fitted_D_hat < 1e4);
        fitted.push_back(scan.fitted_D);
        // the bound with the scan's own constant holds on every measured pair
        for (const auto& s : scan.samples)
            if (!s.censored)
                CHECK(std::abs(s.ratio - 1.0) <=
                      scan.fitted_D * std::ldexp(1.0, -s.s) + 1e-12);
    }
    const double dmax = *std::max_element(fitted.begin(), fitted.end());
    const double dmin = *std::min_element(fitted.begin(), fitted.end());
    CHECK(dmax / dmin <= 2.0);
}

TEST_CASE("Schwarzian scans: sanity value at alpha=1 and the true sign pattern") {
    // boundary sanity case: affine branches, Sg = 0
    const SchwarzianScan s1 = schwarzian_scan(MapParams::pik(1.0), 2000);
    CHECK(std::abs(s1.max_value) < 1e-6);
    CHECK(std::abs(s1.min_value) < 1e-6);

    // alpha <= 7/5: negative on all of I+ \ Delta_0^+
    const SchwarzianScan s12 = schwarzian_scan(MapParams::pik(1.2), 5000);
    CHECK(s12.negative);
    CHECK(s12.max_value < 0.0);

    // alpha = 2: g = 2 sqrt(x) - 1 on I+, Sg = 3/(8 x^2) > 0 everywhere there
    const SchwarzianScan s2 = schwarzian_scan(MapParams::pik(2.0), 5000);
    CHECK(!s2.negative);
    CHECK(s2.max_value > 0.0);
    const double expect_at_argmax = 3.0 / (8.0 * s2.arg_max * s2.arg_max);
    CHECK(s2.max_value == doctest::Approx(expect_at_argmax).epsilon(1e-3));

    // GH: exact pieces have Sg < 0 for gamma <= 2 and the quadratic glue has
    // Sg = -(3/2)(h''/h')^2 < 0
    const SchwarzianScan sg = schwarzian_scan(
        MapParams::grassman(GHParams{1.5, 0.5, 1.0, 1.0, {}}), 5000);
    CHECK(sg.negative);
    CHECK(sg.max_value < 0.0);
}

TEST_CASE("Koebe gap ratios: bounded, above 1, converging for constant fibers") {
    const OmegaWindow wc = sample_omega(const_pik(2.0), 0, 320, 1);
    const KoebeScan scan = koebe_ratio_scan(wc, 300);
    for (double r : scan.ratios) CHECK(r > 1.0);
    CHECK(scan.max_ratio < 10.0);
    CHECK(std::abs(scan.ratios.back() - 1.0) < 0.05);  // gaps ~ c n^{-a/(a-1)}

    const OmegaWindow wr = sample_omega(canonical_discrete(), 0, 520, 23);
    const KoebeScan rs = koebe_ratio_scan(wr, 500);
    CHECK(rs.max_ratio < 10.0);
    // mixed-alpha windows do NOT have pointwise monotone gaps: the ratio can
    // dip below 1, but stays bounded away from 0 (the bounded-geometry claim)
    CHECK(rs.min_ratio > 0.1);
    CHECK(rs.spacing_tau > 0.0);
    CHECK(rs.spacing_tau < 50.0);
    // the cross-omega spacing claim fails for the wide (1.5, 2.5) box:
    // x_2^-(2.5) = -0.3145 > x_1^-(1.5) = -1/3
    CHECK(!rs.cross_omega_spacing);
}
