#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "intermix/assumptions.hpp"

using namespace intermix;

namespace {
ParamDistribution canonical_discrete() {
    return ParamDistribution::discrete_pik({{1.5, 0.5}, {2.5, 0.5}});
}
}

TEST_CASE("A_k at a degenerate law converges to (a1-1)/(2 a1)") {
    const ParamDistribution d = ParamDistribution::discrete_pik({{1.5, 1.0}});
    const AkSpec spec(d, 20000);
    const OmegaWindow w = sample_omega(d, 0, 2, 1);
    const double limit = 0.5 / 3.0;  // (a1-1)/(2 a1) at a1 = 1.5
    CHECK(compute_Ak(spec, w, 20000) == doctest::Approx(limit).epsilon(2e-3));
    // second bracket dies off, m_k -> 0: convergence from k = 100 on
    CHECK(std::abs(compute_Ak(spec, w, 100) - limit) < 0.08);
}

TEST_CASE("A_k stays inside the analytic range bounds for all k") {
    const AkSpec spec(canonical_discrete(), 5000);
    const double lo = spec.lower_bound(), hi = spec.upper_bound();
    CHECK(lo < 0.0);
    CHECK(hi > 0.0);
    for (const auto& alpha : {1.5, 2.5}) {
        const MapParams m = MapParams::pik(alpha);
        for (int k = 1; k <= 5000; ++k) {
            const double v = spec.value(m, k);
            CHECK(v > lo);
            CHECK(v < hi);
        }
    }
}

TEST_CASE("c_k corner sequences converge to the recursion constant") {
    const AkSpec spec(canonical_discrete(), 100000);
    // (2a/(a-1))^{1/(a-1)}: 36 at alpha=1.5, ~4.07 at alpha=2.5, approached
    // like 36(1 - 3 ln k / k): 4.2e-4 relative at k = 1e5
    CHECK(spec.c_k_lo(100000) ==
          doctest::Approx(pik::ladder_constant(1.5)).epsilon(5e-4));
    CHECK(spec.c_k_hi(100000) ==
          doctest::Approx(pik::ladder_constant(2.5)).epsilon(5e-4));
    // successive differences follow 108 (ln k - 1)/k^2: 1.13e-5 at k = 1e4,
    // below 1e-6 from k ~ 4e4 on
    for (int k = 10000; k < 10010; ++k)
        CHECK(std::abs(spec.c_k_lo(k + 1) - spec.c_k_lo(k)) < 1.5e-5);
    for (int k = 50000; k < 50010; ++k)
        CHECK(std::abs(spec.c_k_lo(k + 1) - spec.c_k_lo(k)) < 1e-6);
}

TEST_CASE("B_k at a degenerate GH law converges to a") {
    GHParams p{1.5, 0.5, 1.3, 1.0, {}};
    const ParamDistribution d = ParamDistribution::discrete_gh({{p, 1.0}});
    const AkSpec spec(d, 4000);
    const OmegaWindow w = sample_omega(d, 0, 2, 1);
    CHECK(compute_Bk(spec, w, 4000) == doctest::Approx(p.a).epsilon(5e-3));
}

TEST_CASE("discrete Cesaro limit: q=0 and c = p1(a1-1)/(2 a1) = 1/12") {
    const AkSpec spec(canonical_discrete(), 30000);
    const CesaroResult res = cesaro_limit(spec, 30000);
    CHECK(res.q == 0);
    REQUIRE(res.closed_form.has_value());
    CHECK(*res.closed_form == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(!res.diverged);
    CHECK(res.curve.back().second == doctest::Approx(1.0 / 12.0).epsilon(0.03));
    CHECK(res.fitted_limit == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("uniform Cesaro limit: q=1 and c = (a1-1)^2/((a2-a1) 2 a1) = 1/12") {
    const ParamDistribution d = ParamDistribution::uniform_pik(1.5, 2.5);
    const AkSpec spec(d, 30000);
    const CesaroResult res = cesaro_limit(spec, 30000);
    CHECK(res.q == 1);
    REQUIRE(res.closed_form.has_value());
    CHECK(*res.closed_form == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(res.fitted_limit == doctest::Approx(1.0 / 12.0).epsilon(0.10));
}

TEST_CASE("E_nu A_k two ways: quadrature table vs Monte Carlo draws") {
    const ParamDistribution d = ParamDistribution::uniform_pik(1.5, 2.5);
    const AkSpec spec(d, 200);
    const CounterRng rng{31};
    for (int k : {5, 50, 200}) {
        double sum = 0.0, sum2 = 0.0;
        const int trials = 100000;
        for (int t = 0; t < trials; ++t) {
            const double v = spec.value(d.draw(rng.uniform_at(t * 7 + k)), k);
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / trials;
        const double se = std::sqrt((sum2 / trials - mean * mean) / trials);
        CHECK(std::abs(mean - spec.expectation(k)) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("pointwise inequality chain holds with the literal indexing") {
    const AkSpec spec(canonical_discrete(), 1000);
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        const OmegaWindow w = sample_omega(canonical_discrete(), 0, 1001, seed);
        for (int n : {10, 100, 1000}) {
            const ChainCheck c = inequality_chain(spec, w, n);
            INFO("seed ", seed, " n ", n, " lhs ", c.lhs, " rhs ", c.rhs);
            CHECK(c.holds);
        }
    }
}

TEST_CASE("GH inequality chain analogue") {
    GHParams tmpl{1.5, 0.5, 1.0, 1.0, {}};
    const ParamDistribution d = ParamDistribution::uniform_gh_gamma(1.3, 1.8, tmpl);
    const AkSpec spec(d, 200);
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        const OmegaWindow w = sample_omega(d, 0, 201, seed);
        for (int n : {10, 60, 200}) {
            const ChainCheck c = inequality_chain(spec, w, n);
            INFO("seed ", seed, " n ", n, " lhs ", c.lhs, " rhs ", c.rhs);
            CHECK(c.holds);
        }
    }
}

TEST_CASE("Hoeffding: trivial regimes") {
    // t beyond the span: zero exceedances by boundedness
    const AkSpec spec(canonical_discrete(), 500);
    const auto far = hoeffding_check(spec, 500, {spec.hoeffding_span() * 1.01}, 500, 3);
    CHECK(far[0].frequency == 0.0);

    // degenerate law: deviations identically zero
    const AkSpec dspec(ParamDistribution::discrete_pik({{2.0, 1.0}}), 300);
    const auto deg = hoeffding_check(dspec, 300, {1e-12}, 200, 4);
    CHECK(deg[0].frequency == 0.0);
}

TEST_CASE("Hoeffding: empirical exceedance below the analytic bound") {
    const AkSpec spec(canonical_discrete(), 2000);
    std::vector<double> ts;
    for (int i = 0; i < 10; ++i) ts.push_back(0.003 * std::pow(10.0, i / 9.0));
    const auto pts = hoeffding_check(spec, 2000, ts, 2000, 7);
    for (const auto& p : pts) {
        INFO("t ", p.t, " freq ", p.frequency, " bound ", p.bound);
        CHECK(p.frequency <= p.bound + 1e-12);
    }
}

TEST_CASE("quenched bound: degenerate law attains the limsup constant") {
    const ParamDistribution d = ParamDistribution::discrete_pik({{2.0, 1.0}});
    const AkSpec spec(d, 100);
    const QuenchedReport rep = quenched_bound_report(spec, 2000, 3, 0.5, 1);
    // c(nu) = (a-1)/(2a) = 1/4, bound = c^{-1/(a-1)} = 4 = the ladder constant
    CHECK(rep.bound_stat == doctest::Approx(4.0).epsilon(1e-12));
    for (const auto& s : rep.samples) {
        CHECK(s.limsup_stat == doctest::Approx(4.0).epsilon(0.01));
        CHECK(s.limsup_stat <= rep.bound_stat * 1.01);
    }
}

TEST_CASE("quenched bound: vacuous for tiny c, rarely censored at c/2") {
    const AkSpec spec(canonical_discrete(), 100);
    const QuenchedReport vac = quenched_bound_report(spec, 400, 20, 1e-6, 2);
    for (const auto& s : vac.samples) CHECK(s.n1 == 1);

    const QuenchedReport rep = quenched_bound_report(spec, 2000, 200, 0.5, 3);
    CHECK(rep.censored_fraction < 0.01);
    // n_1 tail decays fast: most samples settle early
    int late = 0;
    for (const auto& s : rep.samples) late += (s.n1 > 200);
    CHECK(static_cast<double>(late) / rep.samples.size() < 0.05);
}

TEST_CASE("measured bound M and the Hoeffding span are sane") {
    const AkSpec spec(canonical_discrete(), 10);
    const double M = spec.bound_M();
    CHECK(M > 0.0);
    CHECK(M < 0.5);
    const double s = spec.hoeffding_span();
    CHECK(s == doctest::Approx((0.5 + M) + (0.5 + M) * (0.5 + M)).epsilon(1e-12));
}
