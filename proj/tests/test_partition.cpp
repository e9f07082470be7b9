#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "intermix/partition.hpp"

using namespace intermix;

namespace {
ParamDistribution canonical_discrete() {
    return ParamDistribution::discrete_pik({{1.5, 0.5}, {2.5, 0.5}});
}
ParamDistribution const_pik(double a) { return ParamDistribution::uniform_pik(a, a); }
ParamDistribution canonical_gh() {
    return ParamDistribution::discrete_gh({{GHParams{1.5, 0.5, 1.0, 1.0, {}}, 1.0}});
}
}

TEST_CASE("Pikovsky partition: structure, coverage, and the exact-tail cross-check") {
    const OmegaWindow w = sample_omega(canonical_discrete(), 0, 130, 41);
    const InducedPartition part = build_partition(w, 60);

    bool seen_r2 = false, seen_r3 = false;
    double prev_left = 0.0;
    int prev_i = 0;
    for (const auto& c : part.cells) {
        CHECK(c.return_time == c.i + c.j);
        CHECK(c.return_time >= 2);
        CHECK(c.left >= part.lambda_left - 1e-12);
        CHECK(c.right <= 1e-15);
        CHECK(c.length() > 0.0);
        if (c.return_time == 2) {
            seen_r2 = true;
            CHECK(c.length() > 1e-3);  // uniformly bounded below
        }
        if (c.return_time == 3) {
            seen_r3 = true;
            CHECK(c.length() > 1e-4);
        }
        // within each i the j-cells tile delta_i^- leftward: cell (i, j+1)
        // ends exactly where cell (i, j) starts
        if (c.i == prev_i)
            CHECK(c.right == doctest::Approx(prev_left).epsilon(1e-13));
        prev_left = c.left;
        prev_i = c.i;
    }
    CHECK(seen_r2);
    CHECK(seen_r3);
    CHECK(part.covered <= part.lambda_length + 1e-12);
    CHECK(part.uncovered >= -1e-12);

    // uncovered mass IS the exact tail at the cutoff (two independent code
    // paths: cell enumeration vs interval pullback)
    CHECK(part.uncovered == doctest::Approx(tail_exact(w, 60)).epsilon(1e-9));
    // and the gap closes as the cutoff grows
    const InducedPartition deeper = build_partition(w, 120);
    CHECK(deeper.uncovered < part.uncovered);

    // tail_measure vs exact tails: sum over n < R <= cutoff
    for (int n : {1, 2, 5, 17, 40})
        CHECK(tail_measure(part, n) ==
              doctest::Approx(tail_exact(w, n) - tail_exact(w, 60)).epsilon(1e-9));
    // monotone
    for (int n = 1; n < 59; ++n)
        CHECK(tail_measure(part, n + 1) <= tail_measure(part, n) + 1e-15);
}

TEST_CASE("every cell's forward itinerary matches the construction") {
    const OmegaWindow w = sample_omega(canonical_discrete(), 0, 80, 43);
    const InducedPartition part = build_partition(w, 30);
    std::string reason;
    for (const auto& c : part.cells) {
        const bool ok = verify_cell_itinerary(w, c, &reason);
        INFO("cell (", c.i, ",", c.j, "): ", reason);
        CHECK(ok);
    }
}

TEST_CASE("constant omega: cell measures match the product estimate up to distortion") {
    const OmegaWindow w = sample_omega(const_pik(2.0), 0, 80, 1);
    const InducedPartition part = build_partition(w, 30);
    const PreimageLadder lad = build_ladder(w, 40, false);

    const double d0_plus = lad.x_plus[1];  // |Delta_0^+| = x_1^+
    for (const auto& c : part.cells) {
        // m(delta_i^-) = y_{i+1}^- - y_i^-, m(delta_j^+) = y_j^+ - y_{j+1}^+
        const double mi = lad.y_minus[static_cast<size_t>(c.i + 1)] -
                          lad.y_minus[static_cast<size_t>(c.i)];
        const double mj = lad.y_plus[static_cast<size_t>(c.j)] -
                          lad.y_plus[static_cast<size_t>(c.j + 1)];
        const double predicted = mi * mj / d0_plus;
        const double ratio = c.length() / predicted;
        CHECK(ratio > 1.0 / 8.0);
        CHECK(ratio < 8.0);
    }
}

TEST_CASE("tails agree with a brute-force return-time simulation") {
    // the strongest oracle: raw orbits, first re-entry into the moving Lambda
    for (const bool random_mix : {false, true}) {
        const ParamDistribution d = random_mix ? canonical_discrete() : const_pik(1.5);
        const OmegaWindow w = sample_omega(d, 0, 80, 77);
        const double lam = -1.0 / (2.0 * w.pik_alpha(0));
        const int N = 500000, n_max = 40;
        std::vector<int64_t> over(static_cast<size_t>(n_max) + 1, 0);
        const CounterRng rng{5};
        int64_t kept = 0;
        for (int i = 0; i < N; ++i) {
            double v = lam * rng.uniform_at(i);
            if (v >= -1e-12) continue;
            ++kept;
            int R = n_max + 1;
            bool bad = false;
            for (int t = 1; t <= n_max; ++t) {
                if (std::abs(v) < 1e-13) { bad = true; break; }
                v = fiber_forward(w, t - 1, v);
                if (v < 0.0 && v > -1.0 / (2.0 * w.pik_alpha(t))) { R = t; break; }
            }
            if (bad) { --kept; continue; }
            for (int n = 1; n <= n_max; ++n)
                if (R > n) ++over[static_cast<size_t>(n)];
        }
        for (int n : {2, 5, 10, 20, 40}) {
            const double mc = -lam * over[static_cast<size_t>(n)] / kept;
            const double se =
                -lam * std::sqrt(static_cast<double>(over[static_cast<size_t>(n)])) / kept;
            const double ex = tail_exact(w, n);
            INFO("n ", n, " mc ", mc, " exact ", ex);
            CHECK(std::abs(mc - ex) < 5.0 * se + 1e-7);
        }
    }
}

TEST_CASE("quenched tail slope for a constant alpha = 1.5 fiber") {
    const OmegaWindow w = sample_omega(const_pik(1.5), 0, 1002, 1);
    std::vector<int> grid;
    for (int n = 100; n <= 1000; n = static_cast<int>(n * 1.25) + 1) grid.push_back(n);
    const std::vector<double> tails = tail_exact_curve(w, grid);
    std::vector<double> xs(grid.begin(), grid.end());
    const PowerLawFit fit = fit_power_law(xs, tails);
    // the realized decay is m(R > n) ~ n^{-a/(a-1)} = n^{-3}: the gap
    // y_{n+1}^- - y_n^- is one power faster than the y_n^- ~ n^{-1/(a-1)}
    // bound that the printed tail estimate uses
    CHECK(std::abs(fit.exponent + 3.0) < 0.2);
    // the printed upper bound ~ n^{-1/(a-1)} = n^{-2} does hold (one-sided)
    CHECK(fit.exponent < -2.0);
}

TEST_CASE("GH partition: return times, coverage and tails") {
    const OmegaWindow w = sample_omega(canonical_gh(), 0, 80, 7);
    const InducedPartition part = build_partition(w, 40);
    bool seen_i0 = false, seen_i1 = false;
    for (const auto& c : part.cells) {
        if (c.i == 0) {
            seen_i0 = true;
            CHECK(c.return_time == c.j);
            CHECK(c.j >= 2);
        } else {
            seen_i1 = true;
            CHECK(c.i == 1);
            CHECK(c.return_time == c.j + 1);
        }
    }
    CHECK(seen_i0);
    CHECK(seen_i1);
    CHECK(part.uncovered >= -1e-12);
    CHECK(part.uncovered == doctest::Approx(tail_exact(w, 40)).epsilon(1e-8));
    for (int n : {2, 5, 11})
        CHECK(tail_measure(part, n) ==
              doctest::Approx(tail_exact(w, n) - tail_exact(w, 40)).epsilon(1e-8));

    std::string reason;
    for (const auto& c : part.cells) {
        const bool ok = verify_cell_itinerary(w, c, &reason);
        INFO("cell (", c.i, ",", c.j, "): ", reason);
        CHECK(ok);
    }
}

TEST_CASE("annealed tails: degenerate law matches the deterministic value") {
    const AnnealedTail at = annealed_tail(const_pik(2.0), 12, 10, 3);
    const OmegaWindow w = sample_omega(const_pik(2.0), 0, 14, 1);
    const double expect = tail_exact(w, 11) - tail_exact(w, 12);
    CHECK(at.mean == doctest::Approx(expect).epsilon(1e-12));
    CHECK(at.stderr_ < 1e-15);
}

TEST_CASE("annealed tails: additivity over n against the window tails") {
    const ParamDistribution d = canonical_discrete();
    const int N = 24, samples = 20;
    const uint64_t seed = 5;
    CompensatedSum sum;
    for (int n = 2; n <= N; ++n) sum.add(annealed_tail(d, n, samples, seed).mean);
    // same windows by construction: substream(t) does not depend on n
    const CounterRng master{seed};
    CompensatedSum expect;
    for (int t = 0; t < samples; ++t) {
        const OmegaWindow w = sample_omega(d, 0, N + 2, master.substream(t).seed);
        expect.add(tail_exact(w, 1) - tail_exact(w, N));
    }
    CHECK(sum.value() == doctest::Approx(expect.value() / samples).epsilon(1e-9));
}

TEST_CASE("tower mass: monotone partial sums with shrinking increments") {
    const OmegaWindow w = sample_omega(canonical_discrete(), 40, 68, 9);
    const TowerMass tm = tower_mass(w, 40, 64);
    for (size_t l = 1; l < tm.partial_by_level.size(); ++l)
        CHECK(tm.partial_by_level[l] >= tm.partial_by_level[l - 1] - 1e-15);
    // level-0 mass is the covered fraction of Lambda
    CHECK(tm.partial_by_level[0] <= 1.0 / (2.0 * w.pik_alpha(0)) + 1e-12);
    CHECK(tm.last_level_increment < 0.05);
    CHECK(tm.truncation_tail >= 0.0);

    const TowerMass tm2 = tower_mass(w, 20, 32);
    CHECK(tm2.partial <= tm.partial + 1e-12);
}
