#include "intermix/partition.hpp"

#include <cmath>

namespace intermix {

namespace {

// ---- Pikovsky -------------------------------------------------------------
//
// delta_ij^- endpoints are pullbacks of delta_j^+(sigma^i omega) endpoints
// through the cell itinerary: i-1 plus/outer inverse steps down the Delta^+
// chain, then one minus/inner step into Lambda_omega. All pullbacks contract.

InducedPartition build_pik_partition(const OmegaWindow& w, int n_r) {
    InducedPartition part;
    part.family = Family::pikovsky;
    part.window_seed = w.seed();
    part.base_offset = w.offset();
    part.return_cutoff = n_r;

    const double a0 = w.pik_alpha(0);
    part.lambda_left = -1.0 / (2.0 * a0);
    part.lambda_length = -part.lambda_left;
    if (n_r < 2) {
        part.uncovered = part.lambda_length;
        return part;
    }

    // x_m^-(sigma^s omega) for 2 <= s <= n_r, m <= n_r - s + 1
    std::vector<std::vector<double>> tri(static_cast<size_t>(n_r) + 2);
    tri[static_cast<size_t>(n_r + 1)] = {0.0};
    for (int s = n_r; s >= 2; --s) {
        const int len = n_r - s + 1;
        auto& row = tri[static_cast<size_t>(s)];
        row.assign(static_cast<size_t>(len) + 1, 0.0);
        const double alpha_s = w.pik_alpha(s);
        for (int m = 1; m <= len; ++m)
            row[static_cast<size_t>(m)] =
                pik::pull_minus_outer(alpha_s, tri[static_cast<size_t>(s + 1)][static_cast<size_t>(m - 1)]);
    }

    CompensatedSum covered;
    std::vector<double> pts;
    for (int i = 1; i <= n_r - 1; ++i) {
        const int jmax = n_r - i;
        // pts[j] = y_j^+(sigma^i omega) = pullback of x_{j-1}^-(sigma^{i+1} omega)
        // through plus/inner, j = 1..jmax+1; delta_j^+ = (y_{j+1}^+, y_j^+)
        // (note y_1^+ = x_1^+ is the top of Delta_0^+)
        const double alpha_i = w.pik_alpha(i);
        pts.assign(static_cast<size_t>(jmax) + 2, 0.0);
        for (int j = 1; j <= jmax + 1; ++j)
            pts[static_cast<size_t>(j)] = pik::pull_plus_inner(
                alpha_i, tri[static_cast<size_t>(i + 1)][static_cast<size_t>(j - 1)]);

        for (int s = i - 1; s >= 1; --s) {
            const double alpha_s = w.pik_alpha(s);
            for (int j = 1; j <= jmax + 1; ++j)
                pts[static_cast<size_t>(j)] =
                    pik::pull_plus_outer(alpha_s, pts[static_cast<size_t>(j)]);
        }
        for (int j = 1; j <= jmax + 1; ++j) {
            double& v = pts[static_cast<size_t>(j)];
            v = pik::pull_minus_inner(a0, v);
            if (!(v >= part.lambda_left - 1e-12 && v <= 0.0))
                throw StructuralError("build_partition: pullback exited Lambda at i=" +
                                      std::to_string(i));
        }
        // y_j^+ decreases in j and the pullback is increasing, so cell (i,j)
        // is (P(y_{j+1}^+), P(y_j^+)).
        for (int j = 1; j <= jmax; ++j) {
            InducedCell c;
            c.i = i;
            c.j = j;
            c.left = pts[static_cast<size_t>(j + 1)];
            c.right = pts[static_cast<size_t>(j)];
            c.return_time = i + j;
            if (c.right < c.left)
                throw StructuralError("build_partition: reversed cell endpoints");
            part.cells.push_back(c);
            covered.add(c.length());
        }
    }
    part.covered = covered.value();
    part.uncovered = part.lambda_length - part.covered;
    return part;
}

double pik_tail_exact(const OmegaWindow& w, int n) {
    // m(R>n) = |y_{n+1}^-(omega)| + sum_i m(pullback of (0, y_{n-i}^+(sigma^i omega)))
    const double a0 = w.pik_alpha(0);
    const double y_tail =
        std::abs(pik::pull_minus_inner(a0, pik_x_at(w.shifted(1), n, Side::plus)));

    if (n < 1) return y_tail + 1.0 / (2.0 * a0);  // degenerate; not used

    // minus antidiagonal on m + s = n + 1: zm[k] = x_k^-(sigma^{n+1-k} omega)
    const std::vector<double> zm = pik_antidiagonal(w, n + 1, Side::minus);

    // active pullback pairs (left from 0, right from y_{n-i+1}^+), entering at
    // stage s = i-1 and receiving plus/outer pullbacks at fibers s..1;
    // the tail inside delta_i^- is the pullback of
    // union_{j > n-i} delta_j^+(sigma^i omega) = (0, y_{n-i+1}^+(sigma^i omega))
    std::vector<double> left, right;
    left.reserve(static_cast<size_t>(n));
    right.reserve(static_cast<size_t>(n));
    auto entry_value = [&](int i) {
        const int m = n - i + 1;  // y_m^+(sigma^i omega), m >= 1
        const double alpha_i = w.pik_alpha(i);
        return pik::pull_plus_inner(alpha_i, zm[static_cast<size_t>(m - 1)]);
    };
    for (int s = n - 1; s >= 1; --s) {
        left.push_back(0.0);
        right.push_back(entry_value(s + 1));
        const double alpha_s = w.pik_alpha(s);
        for (auto& v : left) v = pik::pull_plus_outer(alpha_s, v);
        for (auto& v : right) v = pik::pull_plus_outer(alpha_s, v);
    }
    left.push_back(0.0);
    right.push_back(entry_value(1));

    CompensatedSum tail;
    tail.add(y_tail);
    for (size_t t = 0; t < left.size(); ++t) {
        const double a = pik::pull_minus_inner(a0, left[t]);
        const double b = pik::pull_minus_inner(a0, right[t]);
        tail.add(b - a);
    }
    return tail.value();
}

// ---- Grassman-Horner ------------------------------------------------------

InducedPartition build_gh_partition(const OmegaWindow& w, int n_r) {
    InducedPartition part;
    part.family = Family::grassman_horner;
    part.window_seed = w.seed();
    part.base_offset = w.offset();
    part.return_cutoff = n_r;

    const GHMap& m0 = w.gh_map(0);
    const PreimageLadder base = build_ladder(w, std::max(n_r + 1, 2), false);
    const PreimageLadder next = build_ladder(w.shifted(1), std::max(n_r, 1), false);

    part.lambda_left = base.x_minus[1];
    part.lambda_length = -part.lambda_left;

    CompensatedSum covered;
    // delta_{1,n}^-(omega) = h_omega^{-1}(delta_n^+(sigma omega)), R = n+1
    for (int n = 1; n + 1 <= n_r; ++n) {
        InducedCell c;
        c.i = 1;
        c.j = n;
        c.left = m0.inverse(next.y_plus[static_cast<size_t>(n + 1)], Side::minus);
        c.right = m0.inverse(next.y_plus[static_cast<size_t>(n)], Side::minus);
        c.return_time = n + 1;
        if (c.right < c.left)
            throw StructuralError("build_partition(GH): reversed delta_{1,n} endpoints");
        part.cells.push_back(c);
        covered.add(c.length());
    }
    // delta_n^-(omega) = (y_n^-, y_{n+1}^-), R = n, n >= 2
    for (int n = 2; n <= n_r; ++n) {
        InducedCell c;
        c.i = 0;
        c.j = n;
        c.left = base.y_minus[static_cast<size_t>(n)];
        c.right = base.y_minus[static_cast<size_t>(n + 1)];
        c.return_time = n;
        if (c.right < c.left)
            throw StructuralError("build_partition(GH): reversed delta_n endpoints");
        part.cells.push_back(c);
        covered.add(c.length());
    }
    part.covered = covered.value();
    part.uncovered = part.lambda_length - part.covered;
    return part;
}

double gh_tail_exact(const OmegaWindow& w, int n) {
    const GHMap& m0 = w.gh_map(0);
    // minus-chain part: union of delta_m^- over m > n is (y_{n+1}^-, 0)
    const double y_minus_np1 =
        m0.inverse(gh_x_at(w.shifted(1), n, Side::plus), Side::minus);
    // delta_1^- part: union of delta_{1,m} over m+1 > n pulls back
    // (0, y_max(n,1)^+(sigma omega)) through the increasing branch
    const OmegaWindow ws = w.shifted(1);
    const int m_lo = std::max(n, 1);
    const double y_plus_shift =
        (m_lo == 1)
            ? ws.gh_map(0).inverse(0.0, Side::plus)  // y_1^+ = x_1^+
            : ws.gh_map(0).inverse(gh_x_at(ws.shifted(1), m_lo - 1, Side::plus),
                                   Side::plus);
    const double lambda_left = m0.inverse(0.0, Side::minus);
    const double upper = m0.inverse(y_plus_shift, Side::minus);
    return std::abs(y_minus_np1) + (upper - lambda_left);
}

}  // namespace

InducedPartition build_partition(const OmegaWindow& w, int return_cutoff) {
    if (return_cutoff < 0) throw std::invalid_argument("build_partition: negative cutoff");
    return w.family() == Family::pikovsky ? build_pik_partition(w, return_cutoff)
                                          : build_gh_partition(w, return_cutoff);
}

double tail_measure(const InducedPartition& p, int n) {
    if (n >= p.return_cutoff)
        throw std::invalid_argument("tail_measure: n beyond materialized cutoff");
    CompensatedSum s;
    for (const auto& c : p.cells)
        if (c.return_time > n) s.add(c.length());
    return s.value();
}

double tail_exact(const OmegaWindow& w, int n) {
    if (n < 1) throw std::invalid_argument("tail_exact: n must be >= 1");
    return w.family() == Family::pikovsky ? pik_tail_exact(w, n) : gh_tail_exact(w, n);
}

std::vector<double> tail_exact_curve(const OmegaWindow& w, const std::vector<int>& ns) {
    std::vector<double> out(ns.size());
    for (size_t i = 0; i < ns.size(); ++i) out[i] = tail_exact(w, ns[i]);
    return out;
}

AnnealedTail annealed_tail(const ParamDistribution& d, int n, int n_samples,
                           uint64_t seed, int l_past) {
    if (n_samples < 1) throw std::invalid_argument("annealed_tail: need samples");
    std::vector<double> vals(static_cast<size_t>(n_samples), 0.0);
    const CounterRng master{seed};
    if (n >= 2) {  // m{R=1} = 0 by construction, all return times are >= 2
        parallel_for(n_samples, [&](int64_t t) {
            const OmegaWindow w = sample_omega(
                d, l_past, n + 2, master.substream(static_cast<uint64_t>(t)).seed);
            vals[static_cast<size_t>(t)] = tail_exact(w, n - 1) - tail_exact(w, n);
        });
    }
    AnnealedTail at;
    at.n = n;
    at.samples = n_samples;
    CompensatedSum mean;
    for (double v : vals) mean.add(v);
    at.mean = mean.value() / n_samples;
    double var = 0.0;
    for (double v : vals) var += (v - at.mean) * (v - at.mean);
    at.stderr_ = n_samples > 1 ? std::sqrt(var / (n_samples - 1.0) / n_samples) : 0.0;
    return at;
}

TowerMass tower_mass(const OmegaWindow& w, int levels, int block_cutoff) {
    if (block_cutoff < 2) throw std::invalid_argument("tower_mass: block cutoff < 2");
    TowerMass tm;
    CompensatedSum partial, trunc, last_block;
    for (int l = 0; l <= levels; ++l) {
        const OmegaWindow base = w.shifted(-l);
        const double t_lo = tail_exact(base, l + 1);            // full level mass
        const double t_hi = tail_exact(base, l + block_cutoff); // truncation remainder
        const double level_mass = t_lo - t_hi;
        partial.add(level_mass);
        trunc.add(t_hi);
        last_block.add(tail_exact(base, l + block_cutoff - 1) - t_hi);
        tm.partial_by_level.push_back(partial.value());
        if (l == levels) tm.last_level_increment = level_mass;
    }
    tm.partial = partial.value();
    tm.truncation_tail = trunc.value();
    tm.last_block_increment = last_block.value();
    return tm;
}

bool verify_cell_itinerary(const OmegaWindow& w, const InducedCell& cell,
                           std::string* reason) {
    auto fail = [&](const std::string& r) {
        if (reason) *reason = r;
        return false;
    };
    const int R = cell.return_time;
    double x = 0.5 * (cell.left + cell.right);
    if (!(x < 0.0)) return fail("midpoint not in I^-");

    if (w.family() == Family::pikovsky) {
        // signs: start -, steps 1..i in the Delta^+ chain, steps i+1..i+j in
        // the Delta^- chain, landing in Lambda_{sigma^R omega}
        for (int t = 1; t <= R; ++t) {
            x = fiber_forward(w, t - 1, x);
            const bool want_plus = t <= cell.i;
            if (want_plus != (x > 0.0))
                return fail("sign mismatch at step " + std::to_string(t));
        }
        const double lam_left = -1.0 / (2.0 * w.pik_alpha(R));
        if (!(x > lam_left && x < 0.0)) return fail("did not land in Lambda");
        return true;
    }

    // GH: delta_n^- runs I^-, one Delta^+ step, then the minus chain;
    // delta_{1,n}^- takes two plus steps first. The (1,1) cell's labeled
    // return lands in Delta_0^+ rather than Lambda (bounce cell), so the
    // Lambda check is skipped for it.
    const int plus_steps = (cell.i == 0) ? 1 : 2;
    for (int t = 1; t <= R; ++t) {
        x = fiber_forward(w, t - 1, x);
        const bool want_plus = t <= plus_steps && t < R;
        if (t < R && want_plus != (x > 0.0))
            return fail("sign mismatch at step " + std::to_string(t));
    }
    if (cell.i == 1 && cell.j == 1) {
        if (!(x > 0.0)) return fail("bounce cell did not land in Delta_0^+");
        return true;
    }
    const double lam_left = w.gh_map(R).inverse(0.0, Side::minus);
    if (!(x > lam_left && x < 0.0)) return fail("did not land in Lambda");
    return true;
}

}  // namespace intermix
