#include "intermix/distortion.hpp"

#include <algorithm>
#include <cmath>

namespace intermix {

const PreimageLadder* LadderCache::at(int64_t off, int min_depth) {
    if (min_depth > cap_) return nullptr;
    auto it = cache_.find(off);
    if (it != cache_.end() && it->second.depth >= min_depth) return &it->second;
    int depth = std::max(init_, it == cache_.end() ? 0 : it->second.depth * 2);
    while (depth < min_depth) depth *= 2;
    depth = std::min(depth, cap_);
    try {
        PreimageLadder lad = build_ladder(w_.shifted(off), depth, false);
        auto [pos, ignored] = cache_.insert_or_assign(off, std::move(lad));
        return &pos->second;
    } catch (const std::out_of_range&) {
        return nullptr;  // window exhausted: caller censors
    }
}

namespace {

// index i with y[i] < x <= y[i+1] on an increasing array (1-based content)
int locate_increasing(const std::vector<double>& y, int depth, double x) {
    int lo = 1, hi = depth;  // candidate i
    if (x <= y[1] || x >= 0.0) return -1;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (y[static_cast<size_t>(mid)] < x)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

}  // namespace

CellRef locate_cell(LadderCache& cache, int64_t off, double x) {
    CellRef ref;
    const OmegaWindow& w = cache.window();
    const bool pik_family = w.family() == Family::pikovsky;

    const PreimageLadder* lad = cache.at(off, 64);
    if (!lad) {
        ref.censored = true;
        return ref;
    }
    if (!(x > lad->x_minus[1] && x < 0.0)) {
        ref.censored = true;  // not in Lambda
        return ref;
    }
    // find i with y_i^- < x <= y_{i+1}^- (delta_i^-), extending depth as needed
    int i = -1;
    for (;;) {
        i = locate_increasing(lad->y_minus, lad->depth - 1, x);
        if (i < 0) {
            ref.censored = true;
            return ref;
        }
        if (i < lad->depth - 1) break;
        const PreimageLadder* deeper = cache.at(off, lad->depth * 2);
        if (!deeper || deeper->depth == lad->depth) {
            ref.censored = true;
            return ref;
        }
        lad = deeper;
    }

    if (pik_family) {
        // forward i steps into Delta_0^+(sigma^{off+i} omega), then find j
        double z = x;
        const OmegaWindow base = w.shifted(off);
        for (int t = 0; t < i; ++t) z = fiber_forward(base, t, z);
        const PreimageLadder* plad = cache.at(off + i, 64);
        for (;;) {
            if (!plad) {
                ref.censored = true;
                return ref;
            }
            // delta_j^+ = (y_{j+1}^+, y_j^+), y decreasing in j, y_1^+ = x_1^+
            if (!(z > 0.0 && z < plad->y_plus[1])) {
                ref.censored = true;
                return ref;
            }
            if (z <= plad->y_plus[static_cast<size_t>(plad->depth)]) {
                const PreimageLadder* deeper = cache.at(off + i, plad->depth * 2);
                if (!deeper || deeper->depth == plad->depth) {
                    ref.censored = true;
                    return ref;
                }
                plad = deeper;
                continue;
            }
            int lo = 1, hi = plad->depth - 1;
            while (lo < hi) {  // smallest j with y_{j+1}^+ < z
                const int mid = (lo + hi) / 2;
                if (plad->y_plus[static_cast<size_t>(mid + 1)] < z)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            ref.i = i;
            ref.j = lo;
            ref.return_time = i + lo;
            ref.ok = true;
            return ref;
        }
    }

    // GH: delta_i^- cells are direct for i >= 2; delta_1^- refines by the
    // image cell in Delta_0^+(sigma^{off+1} omega).
    if (i >= 2) {
        ref.i = 0;
        ref.j = i;
        ref.return_time = i;
        ref.ok = true;
        return ref;
    }
    const OmegaWindow base = w.shifted(off);
    double z = fiber_forward(base, 0, x);
    const PreimageLadder* plad = cache.at(off + 1, 64);
    for (;;) {
        if (!plad) {
            ref.censored = true;
            return ref;
        }
        if (!(z > 0.0 && z < plad->x_plus[1])) {
            ref.censored = true;
            return ref;
        }
        // GH delta_n^+(omega) = (y_{n+1}^+, y_n^+), y decreasing
        if (z > plad->y_plus[1]) {
            // z in (y_1^+, x_1^+) = delta region with n = ... y_1^+ = x_1^+?
            // y_1^+ equals x_1^+ only at the minus side; on the plus side
            // (0, x_1^+) is partitioned by (y_{n+1}^+, y_n^+) from n = 1.
            ref.censored = true;
            return ref;
        }
        if (z <= plad->y_plus[static_cast<size_t>(plad->depth)]) {
            const PreimageLadder* deeper = cache.at(off + 1, plad->depth * 2);
            if (!deeper || deeper->depth == plad->depth) {
                ref.censored = true;
                return ref;
            }
            plad = deeper;
            continue;
        }
        int lo = 1, hi = plad->depth;
        while (lo < hi) {  // smallest n with y_{n+1}^+ < z, i.e. z in (y_{n+1}, y_n)
            const int mid = (lo + hi) / 2;
            if (plad->y_plus[static_cast<size_t>(mid + 1)] < z)
                hi = mid;
            else
                lo = mid + 1;
        }
        ref.i = 1;
        ref.j = lo;
        ref.return_time = lo + 1;
        ref.ok = true;
        return ref;
    }
}

SeparationResult separation_time(LadderCache& cache, double x, double y, int max_steps) {
    SeparationResult res;
    int64_t off = 0;
    const OmegaWindow& w = cache.window();
    for (int s = 0; s < max_steps; ++s) {
        const CellRef cx = locate_cell(cache, off, x);
        const CellRef cy = locate_cell(cache, off, y);
        if (cx.censored || cy.censored || !cx.ok || !cy.ok) {
            res.s = s;
            res.censored = true;
            return res;
        }
        if (cx.i != cy.i || cx.j != cy.j) {
            res.s = s;
            return res;
        }
        try {
            const OmegaWindow base = w.shifted(off);
            x = cocycle_apply(base, cx.return_time, x);
            y = cocycle_apply(base, cy.return_time, y);
        } catch (const OrbitError&) {
            res.s = s;
            res.censored = true;
            return res;
        } catch (const std::out_of_range&) {
            res.s = s;
            res.censored = true;
            return res;
        }
        off += cx.return_time;
    }
    res.s = max_steps;
    res.exceeded = true;
    return res;
}

double induced_jacobian(const OmegaWindow& w, const InducedCell& cell, double x) {
    if (!(x > cell.left && x < cell.right))
        throw std::invalid_argument("induced_jacobian: x not strictly inside the cell");
    CompensatedSum logj;
    double z = x;
    for (int t = 0; t < cell.return_time; ++t) {
        logj.add(std::log(std::abs(fiber_derivative(w, t, z))));
        z = fiber_forward(w, t, z);
    }
    return std::exp(logj.value());
}

DistortionScan distortion_scan(const OmegaWindow& w, const std::vector<InducedCell>& cells,
                               int pairs_per_cell, uint64_t seed) {
    DistortionScan scan;
    std::map<int, LadderCache> image_caches;  // one per distinct return time
    RngStream rng{CounterRng{seed}};
    for (const auto& cell : cells) {
        const double len = cell.length();
        if (!(len > 0.0)) continue;
        for (int p = 0; p < pairs_per_cell; ++p) {
            // base point uniform in the middle 80%, partner at a dyadic offset
            const double x = cell.left + len * (0.1 + 0.8 * rng.uniform());
            const int m = 1 + static_cast<int>(rng.uniform() * 40);
            double y = x + len * std::ldexp(1.0, -m);
            if (y >= cell.right) y = x - len * std::ldexp(1.0, -m);
            if (y <= cell.left || y == x) continue;

            DistortionSample smp;
            smp.i = cell.i;
            smp.j = cell.j;
            const double jx = induced_jacobian(w, cell, x);
            const double jy = induced_jacobian(w, cell, y);
            const double fx = cocycle_apply(w, cell.return_time, x);
            const double fy = cocycle_apply(w, cell.return_time, y);
            smp.ratio = jx / jy;
            smp.log_ratio = std::log(jx) - std::log(jy);
            smp.image_gap = std::abs(fx - fy);

            auto [cache_it, inserted] =
                image_caches.try_emplace(cell.return_time, w.shifted(cell.return_time));
            const SeparationResult sep = separation_time(cache_it->second, fx, fy, 60);
            smp.censored = sep.censored || sep.exceeded;
            smp.s = sep.s;
            scan.samples.push_back(smp);

            if (!smp.censored) {
                const double dev = std::abs(smp.ratio - 1.0);
                scan.max_ratio_minus_1 = std::max(scan.max_ratio_minus_1, dev);
                scan.fitted_D = std::max(scan.fitted_D, dev * std::ldexp(1.0, smp.s));
                if (smp.image_gap > 1e-15)
                    scan.fitted_D_hat =
                        std::max(scan.fitted_D_hat, std::abs(smp.log_ratio) / smp.image_gap);
            } else {
                ++scan.censored;
            }
        }
    }
    return scan;
}

SchwarzianScan schwarzian_scan(const MapParams& m, int grid_points) {
    SchwarzianScan scan;
    const double margin = 1e-4;
    if (m.family == Family::pikovsky) {
        const PikParams p{m.alpha};
        const double lo = 1.0 / (2.0 * m.alpha) + margin;
        const double hi = 1.0 - margin;
        for (int g = 0; g < grid_points; ++g) {
            const double x = lo + (hi - lo) * (g + 0.5) / grid_points;
            const double s = pik::schwarzian(p, x);
            if (s > scan.max_value) { scan.max_value = s; scan.arg_max = x; }
            if (s < scan.min_value) { scan.min_value = s; scan.arg_min = x; }
            ++scan.points;
        }
    } else {
        const GHMap map = GHMap::build(m.gh, GHMap::Validation::light);
        const double x1p = map.inverse(0.0, Side::plus);
        const double lo = x1p + margin;
        const double hi = 1.0 - margin;
        const auto junctions = map.junctions();
        for (int g = 0; g < grid_points; ++g) {
            const double x = lo + (hi - lo) * (g + 0.5) / grid_points;
            bool near_junction = false;
            for (double j : junctions)
                if (std::abs(x - j) < 5e-5 * (1.0 + std::abs(x))) near_junction = true;
            if (near_junction) continue;  // h'' jumps there; FD of h'' is meaningless
            const double s = map.schwarzian(x);
            if (s > scan.max_value) { scan.max_value = s; scan.arg_max = x; }
            if (s < scan.min_value) { scan.min_value = s; scan.arg_min = x; }
            ++scan.points;
        }
    }
    scan.negative = scan.max_value < 1e-8;
    return scan;
}

KoebeScan koebe_ratio_scan(const OmegaWindow& w, int n_max) {
    KoebeScan scan;
    const PreimageLadder lad = build_ladder(w, n_max + 3, false);
    scan.ratios.reserve(static_cast<size_t>(n_max));
    for (int n = 0; n < n_max; ++n) {
        const double num = lad.x_minus[static_cast<size_t>(n + 1)] -
                           lad.x_minus[static_cast<size_t>(n + 2)];
        const double den = lad.x_minus[static_cast<size_t>(n + 2)] -
                           lad.x_minus[static_cast<size_t>(n + 3)];
        const double r = num / den;
        scan.ratios.push_back(r);
        if (r > scan.max_ratio) { scan.max_ratio = r; scan.arg_max = n; }
        scan.min_ratio = std::min(scan.min_ratio, r);
    }
    // bridge-space ratios on the first preimages (per-omega tau)
    const double gap13 = lad.x_minus[1] - lad.x_minus[3];
    const double gap01 = 0.0 - lad.x_minus[1];
    const double gap34 = lad.x_minus[3] - lad.x_minus[4];
    scan.spacing_tau = std::max(gap13 / gap01, gap13 / gap34);

    // printed cross-omega version: sup_omega x_i^- < inf_omega x_{i-1}^- over
    // the parameter box (checked at the box corners via the sandwich bound)
    if (w.family() == Family::pikovsky) {
        const double a1 = w.distribution().corner_lo();
        const double a2 = w.distribution().corner_hi();
        const OmegaWindow w1 = sample_omega(
            ParamDistribution::uniform_pik(a1, a1), 0, 8, 1);
        const OmegaWindow w2 = sample_omega(
            ParamDistribution::uniform_pik(a2, a2), 0, 8, 1);
        const PreimageLadder l1 = build_ladder(w1, 5, false);
        const PreimageLadder l2 = build_ladder(w2, 5, false);
        scan.cross_omega_spacing = true;
        for (int i = 1; i <= 4; ++i) {
            // sup over omega of x_i^- is the alpha_2 ladder, inf of x_{i-1}^- the alpha_1 one
            if (!(l2.x_minus[static_cast<size_t>(i)] < l1.x_minus[static_cast<size_t>(i - 1)]))
                scan.cross_omega_spacing = false;
        }
    }
    return scan;
}

}  // namespace intermix
