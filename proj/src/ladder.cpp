#include "intermix/ladder.hpp"

#include <cmath>

namespace intermix {

bool window_is_constant(const OmegaWindow& w, int64_t rel_lo, int64_t rel_hi) {
    const MapParams& ref = w.at(rel_lo);
    for (int64_t r = rel_lo + 1; r <= rel_hi; ++r) {
        const MapParams& m = w.at(r);
        if (m.family != ref.family) return false;
        if (m.family == Family::pikovsky) {
            if (m.alpha != ref.alpha) return false;
        } else {
            if (m.gh.gamma != ref.gh.gamma || m.gh.k != ref.gh.k ||
                m.gh.a != ref.gh.a || m.gh.b != ref.gh.b)
                return false;
        }
    }
    return true;
}

std::vector<double> pik_antidiagonal(const OmegaWindow& w, int n, Side side) {
    std::vector<double> z(static_cast<size_t>(n) + 1);
    z[0] = 0.0;
    double v = 0.0;
    if (side == Side::plus) {
        for (int k = 1; k <= n; ++k) {
            v = pik::pull_plus_outer(w.pik_alpha(n - k), v);
            z[static_cast<size_t>(k)] = v;
        }
    } else {
        for (int k = 1; k <= n; ++k) {
            v = pik::pull_minus_outer(w.pik_alpha(n - k), v);
            z[static_cast<size_t>(k)] = v;
        }
    }
    return z;
}

double pik_x_at(const OmegaWindow& w, int n, Side side) {
    double v = 0.0;
    if (side == Side::plus)
        for (int k = 1; k <= n; ++k) v = pik::pull_plus_outer(w.pik_alpha(n - k), v);
    else
        for (int k = 1; k <= n; ++k) v = pik::pull_minus_outer(w.pik_alpha(n - k), v);
    return v;
}

double gh_x_at(const OmegaWindow& w, int n, Side side) {
    if (n == 0) return 0.0;
    // x_n^- chain stays on the minus branch; x_n^+ is one plus-branch pullback
    // of the depth-(n-1) minus value at sigma omega.
    double v = 0.0;
    if (side == Side::minus) {
        for (int k = 1; k <= n; ++k) v = w.gh_map(n - k).inverse(v, Side::minus);
        return v;
    }
    for (int k = 1; k < n; ++k) v = w.gh_map(n - k).inverse(v, Side::minus);
    return w.gh_map(0).inverse(v, Side::plus);
}

namespace {

PreimageLadder build_pik(const OmegaWindow& w, int depth, bool check) {
    PreimageLadder lad;
    lad.family = Family::pikovsky;
    lad.depth = depth;
    lad.window_seed = w.seed();
    lad.base_offset = w.offset();
    const size_t sz = static_cast<size_t>(depth) + 1;
    lad.x_minus.assign(sz, 0.0);
    lad.x_plus.assign(sz, 0.0);
    lad.y_minus.assign(sz, 0.0);
    lad.y_plus.assign(sz, 0.0);

    const double a0 = w.pik_alpha(0);
    const bool constant = window_is_constant(w, 0, depth > 0 ? depth - 1 : 0);

    // x arrays plus the shifted penultimate values feeding the y arrays:
    // y_n^-(omega) = pullback of x_{n-1}^+(sigma omega) through minus/inner,
    // y_n^+(omega) = pullback of x_{n-1}^-(sigma omega) through plus/inner.
    if (constant) {
        double zp = 0.0, zm = 0.0;
        for (int n = 1; n <= depth; ++n) {
            lad.y_minus[static_cast<size_t>(n)] = pik::pull_minus_inner(a0, zp);
            lad.y_plus[static_cast<size_t>(n)] = pik::pull_plus_inner(a0, zm);
            zp = pik::pull_plus_outer(a0, zp);
            zm = pik::pull_minus_outer(a0, zm);
            lad.x_plus[static_cast<size_t>(n)] = zp;
            lad.x_minus[static_cast<size_t>(n)] = zm;
        }
    } else {
        for (int n = 1; n <= depth; ++n) {
            double zp = 0.0, zm = 0.0;  // backward passes ending at base omega
            for (int k = 1; k < n; ++k) {
                zp = pik::pull_plus_outer(w.pik_alpha(n - k), zp);
                zm = pik::pull_minus_outer(w.pik_alpha(n - k), zm);
            }
            // zp = x_{n-1}^+(sigma omega), zm = x_{n-1}^-(sigma omega)
            lad.y_minus[static_cast<size_t>(n)] = pik::pull_minus_inner(a0, zp);
            lad.y_plus[static_cast<size_t>(n)] = pik::pull_plus_inner(a0, zm);
            lad.x_plus[static_cast<size_t>(n)] = pik::pull_plus_outer(a0, zp);
            lad.x_minus[static_cast<size_t>(n)] = pik::pull_minus_outer(a0, zm);
        }
    }
    if (depth >= 1) {
        lad.y_plus[0] = lad.x_plus[1];
        lad.y_minus[0] = lad.x_minus[1];
    }

    if (check && depth >= 1) {
        // forward residuals on a subsample (checking every n doubles the cost)
        const PikParams p{a0};
        const int stride = depth <= 64 ? 1 : depth / 64;
        OmegaWindow ws = w.shifted(1);
        for (int n = 1; n <= depth; n += stride) {
            const size_t i = static_cast<size_t>(n);
            const double xp_prev = (n == 1) ? 0.0 : pik_x_at(ws, n - 1, Side::plus);
            const double xm_prev = (n == 1) ? 0.0 : pik_x_at(ws, n - 1, Side::minus);
            double r = std::abs(pik::forward(p, lad.x_plus[i]) - xp_prev);
            r = std::max(r, std::abs(pik::forward(p, lad.x_minus[i]) - xm_prev));
            r = std::max(r, std::abs(pik::forward(p, lad.y_minus[i]) - xp_prev));
            r = std::max(r, std::abs(pik::forward(p, lad.y_plus[i]) - xm_prev));
            lad.max_residual = std::max(lad.max_residual, r);
        }
    }
    return lad;
}

PreimageLadder build_gh(const OmegaWindow& w, int depth, bool check) {
    PreimageLadder lad;
    lad.family = Family::grassman_horner;
    lad.depth = depth;
    lad.window_seed = w.seed();
    lad.base_offset = w.offset();
    const size_t sz = static_cast<size_t>(depth) + 1;
    lad.x_minus.assign(sz, 0.0);
    lad.x_plus.assign(sz, 0.0);
    lad.y_minus.assign(sz, 0.0);
    lad.y_plus.assign(sz, 0.0);

    const GHMap& m0 = w.gh_map(0);
    const bool constant = window_is_constant(w, 0, depth > 0 ? depth - 1 : 0);

    if (constant) {
        double zm = 0.0;  // x_n^- for the constant fiber
        for (int n = 1; n <= depth; ++n) {
            // x_{n-1}^+(sigma omega): plus pullback of x_{n-2}^-(sigma^2 omega) = previous zm
            const double xp_prev =
                (n == 1) ? 0.0 : m0.inverse(lad.x_minus[static_cast<size_t>(n - 2)], Side::plus);
            lad.y_minus[static_cast<size_t>(n)] = m0.inverse(xp_prev, Side::minus);
            lad.y_plus[static_cast<size_t>(n)] = m0.inverse(xp_prev, Side::plus);
            zm = m0.inverse(zm, Side::minus);
            lad.x_minus[static_cast<size_t>(n)] = zm;
            lad.x_plus[static_cast<size_t>(n)] =
                m0.inverse(lad.x_minus[static_cast<size_t>(n - 1)], Side::plus);
        }
    } else {
        OmegaWindow ws = w.shifted(1);
        for (int n = 1; n <= depth; ++n) {
            const double xm_prev = gh_x_at(ws, n - 1, Side::minus);
            const double xp_prev = gh_x_at(ws, n - 1, Side::plus);
            lad.x_minus[static_cast<size_t>(n)] = m0.inverse(xm_prev, Side::minus);
            lad.x_plus[static_cast<size_t>(n)] = m0.inverse(xm_prev, Side::plus);
            lad.y_minus[static_cast<size_t>(n)] = m0.inverse(xp_prev, Side::minus);
            lad.y_plus[static_cast<size_t>(n)] = m0.inverse(xp_prev, Side::plus);
        }
    }
    if (depth >= 1) {
        lad.y_plus[0] = lad.x_plus[1];
        lad.y_minus[0] = lad.x_minus[1];
    }

    if (check && depth >= 1) {
        const int stride = depth <= 64 ? 1 : depth / 64;
        OmegaWindow ws = w.shifted(1);
        for (int n = 1; n <= depth; n += stride) {
            const size_t i = static_cast<size_t>(n);
            const double xm_prev = (n == 1) ? 0.0 : gh_x_at(ws, n - 1, Side::minus);
            const double xp_prev = (n == 1) ? 0.0 : gh_x_at(ws, n - 1, Side::plus);
            double r = std::abs(m0.forward(lad.x_minus[i]) - xm_prev);
            r = std::max(r, std::abs(m0.forward(lad.x_plus[i]) - xm_prev));
            r = std::max(r, std::abs(m0.forward(lad.y_minus[i]) - xp_prev));
            r = std::max(r, std::abs(m0.forward(lad.y_plus[i]) - xp_prev));
            lad.max_residual = std::max(lad.max_residual, r);
        }
    }
    return lad;
}

}  // namespace

PreimageLadder build_ladder(const OmegaWindow& w, int depth, bool check_residuals) {
    if (depth < 0) throw std::invalid_argument("build_ladder: negative depth");
    return w.family() == Family::pikovsky ? build_pik(w, depth, check_residuals)
                                          : build_gh(w, depth, check_residuals);
}

}  // namespace intermix
