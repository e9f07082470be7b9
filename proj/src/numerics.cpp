#include "intermix/numerics.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <thread>

namespace intermix {

RootResult newton_bisect(const std::function<double(double)>& f,
                         const std::function<double(double)>& df,
                         double lo, double hi,
                         double x_tol, int max_iter) {
    RootResult res;
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, 0.0, 0, true};
    if (fhi == 0.0) return {hi, 0.0, 0, true};
    if ((flo > 0.0) == (fhi > 0.0))
        throw NumericError("newton_bisect: root not bracketed");
    // orient so f(lo) < 0
    if (flo > 0.0) std::swap(lo, hi);

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        res.iterations = it + 1;
        res.residual = std::abs(fx);
        if (fx < 0.0) lo = x; else hi = x;
        if (std::abs(hi - lo) <= x_tol || fx == 0.0) {
            res.x = x;
            res.converged = true;
            return res;
        }
        const double d = df(x);
        double xn = (d != 0.0) ? x - fx / d : x;
        // Newton step must land strictly inside the current bracket
        if (!(std::min(lo, hi) < xn && xn < std::max(lo, hi)))
            xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 0.25 * x_tol) {
            res.x = xn;
            res.converged = true;
            return res;
        }
        x = xn;
    }
    res.x = x;
    return res;
}

double solve_monotone(const std::function<double(double)>& f,
                      const std::function<double(double)>& df,
                      double lo, double hi, double x_tol, int max_iter) {
    const RootResult r = newton_bisect(f, df, lo, hi, x_tol, max_iter);
    if (!r.converged)
        throw NumericError("monotone solve did not converge, residual " +
                           std::to_string(r.residual));
    return r.x;
}

namespace {

// Legendre nodes by Newton on P_n with the Chebyshev initial guess.
std::vector<std::pair<double, double>> make_gl(int n) {
    std::vector<std::pair<double, double>> nw(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nw[i] = {x, 2.0 / ((1.0 - x * x) * pp * pp)};
    }
    return nw;
}

}  // namespace

const std::vector<std::pair<double, double>>& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::vector<std::pair<double, double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gl(n)).first;
    return it->second;
}

double integrate_panels(const std::function<double(double)>& f,
                        double a, double b, int panels, int nodes_per_panel) {
    const auto& nw = gauss_legendre(nodes_per_panel);
    const double h = (b - a) / panels;
    CompensatedSum acc;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (const auto& [t, w] : nw) acc.add(w * f(mid + 0.5 * h * t));
    }
    return 0.5 * h * acc.value();
}

QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              double a, double b,
                              int initial_panels, int max_panels,
                              int nodes_per_panel, double abs_tol) {
    QuadResult q;
    q.panels = initial_panels;
    q.value = integrate_panels(f, a, b, q.panels, nodes_per_panel);
    while (q.panels < max_panels) {
        const int next = q.panels * 2;
        const double refined = integrate_panels(f, a, b, next, nodes_per_panel);
        q.last_change = std::abs(refined - q.value);
        q.value = refined;
        q.panels = next;
        if (q.last_change < abs_tol) {
            q.converged = true;
            return q;
        }
    }
    q.converged = q.last_change < abs_tol;
    return q;
}

namespace {

PowerLawFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    PowerLawFit fit;
    std::vector<double> lx, ly;
    int last_sign = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const int s = (y[i] > 0) - (y[i] < 0);
        if (s != 0 && last_sign != 0 && s != last_sign) ++fit.sign_changes;
        if (s != 0) last_sign = s;
        if (x[i] > 0.0 && y[i] != 0.0 && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(std::abs(y[i])));
        }
    }
    fit.points = static_cast<int>(lx.size());
    if (fit.points < 2) return fit;
    fit.x_lo = std::exp(*std::min_element(lx.begin(), lx.end()));
    fit.x_hi = std::exp(*std::max_element(lx.begin(), lx.end()));

    const int n = fit.points;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        sx += lx[i]; sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
        syy += ly[i] * ly[i];
    }
    const double ssxx = sxx - sx * sx / n;
    const double ssxy = sxy - sx * sy / n;
    const double ssyy = syy - sy * sy / n;
    fit.exponent = (ssxx > 0) ? ssxy / ssxx : 0.0;
    fit.intercept = (sy - fit.exponent * sx) / n;
    fit.r2 = (ssxx * ssyy > 0) ? (ssxy * ssxy) / (ssxx * ssyy) : 1.0;

    // quadratic log-log fit; strong negative curvature marks decay faster
    // than any power over the fitted range
    if (n >= 3) {
        double s1 = n, s2 = sx, s3 = sxx, s4 = 0, s5 = 0, t0 = sy, t1 = sxy, t2 = 0;
        for (int i = 0; i < n; ++i) {
            const double x2 = lx[i] * lx[i];
            s4 += x2 * lx[i];
            s5 += x2 * x2;
            t2 += x2 * ly[i];
        }
        // Solve the 3x3 normal equations by Cramer's rule.
        const double A[3][3] = {{s1, s2, s3}, {s2, s3, s4}, {s3, s4, s5}};
        const double rhs[3] = {t0, t1, t2};
        auto det3 = [](const double m[3][3]) {
            return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                   m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                   m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        };
        const double d = det3(A);
        if (std::abs(d) > 1e-12) {
            double m2[3][3];
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) m2[r][c] = (c == 2) ? rhs[r] : A[r][c];
            fit.curvature = det3(m2) / d;
            const double span = lx.back() - lx.front();
            // curvature * span = change of local slope across the range
            fit.superpolynomial = (fit.curvature * span < -0.75);
        }
    }
    return fit;
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    return fit_loglog(x, y);
}

PowerLawFit fit_power_law_envelope(const std::vector<double>& x,
                                   const std::vector<double>& y) {
    // running maxima of |y| scanned from the right: env[i] = max_{j>=i} |y[j]|
    std::vector<double> env(y.size());
    double m = 0.0;
    for (size_t i = y.size(); i-- > 0;) {
        m = std::max(m, std::abs(y[i]));
        env[i] = m;
    }
    return fit_loglog(x, env);
}

LimitFit fit_limit_power_correction(const std::vector<double>& x,
                                    const std::vector<double>& y) {
    LimitFit best;
    best.rms = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(x.size());
    if (n < 3) {
        if (n > 0) best.limit = y.back();
        best.rms = 0.0;
        return best;
    }
    for (double delta = 0.02; delta <= 1.5001; delta += 0.01) {
        double su = 0, sy = 0, suu = 0, suy = 0;
        for (int i = 0; i < n; ++i) {
            const double u = std::pow(x[i], -delta);
            su += u; sy += y[i]; suu += u * u; suy += u * y[i];
        }
        const double den = n * suu - su * su;
        if (std::abs(den) < 1e-300) continue;
        const double beta = (n * suy - su * sy) / den;
        const double c = (sy - beta * su) / n;
        double rss = 0;
        for (int i = 0; i < n; ++i) {
            const double r = y[i] - c - beta * std::pow(x[i], -delta);
            rss += r * r;
        }
        const double rms = std::sqrt(rss / n);
        if (rms < best.rms) best = {c, beta, delta, rms};
    }
    return best;
}

double fit_limit_log_correction(const std::vector<double>& x, const std::vector<double>& y,
                                int degree) {
    const int m = degree + 1;
    if (static_cast<int>(x.size()) < m + 1) return x.empty() ? 0.0 : y.back();
    std::vector<std::vector<double>> A(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (size_t i = 0; i < x.size(); ++i) {
        const double z = 1.0 / std::log(x[i]);
        std::vector<double> zp(static_cast<size_t>(2 * m), 1.0);
        for (int p = 1; p < 2 * m; ++p) zp[static_cast<size_t>(p)] = zp[static_cast<size_t>(p - 1)] * z;
        for (int r = 0; r < m; ++r) {
            rhs[static_cast<size_t>(r)] += y[i] * zp[static_cast<size_t>(r)];
            for (int c = 0; c < m; ++c)
                A[static_cast<size_t>(r)][static_cast<size_t>(c)] += zp[static_cast<size_t>(r + c)];
        }
    }
    // small Gauss-Jordan solve of the normal equations
    for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r = c + 1; r < m; ++r)
            if (std::abs(A[static_cast<size_t>(r)][static_cast<size_t>(c)]) >
                std::abs(A[static_cast<size_t>(piv)][static_cast<size_t>(c)]))
                piv = r;
        std::swap(A[static_cast<size_t>(c)], A[static_cast<size_t>(piv)]);
        std::swap(rhs[static_cast<size_t>(c)], rhs[static_cast<size_t>(piv)]);
        for (int r = 0; r < m; ++r) {
            if (r == c) continue;
            const double f = A[static_cast<size_t>(r)][static_cast<size_t>(c)] /
                             A[static_cast<size_t>(c)][static_cast<size_t>(c)];
            for (int cc = c; cc < m; ++cc)
                A[static_cast<size_t>(r)][static_cast<size_t>(cc)] -=
                    f * A[static_cast<size_t>(c)][static_cast<size_t>(cc)];
            rhs[static_cast<size_t>(r)] -= f * rhs[static_cast<size_t>(c)];
        }
    }
    return rhs[0] / A[0][0];
}

void parallel_for(int64_t count, const std::function<void(int64_t)>& fn, int threads) {
    if (count <= 0) return;
    int nthreads = threads > 0 ? threads
                               : static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads <= 0) nthreads = 4;
    nthreads = static_cast<int>(std::min<int64_t>(nthreads, count));
    if (nthreads == 1) {
        for (int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int64_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int64_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

double ks_uniform_statistic(std::vector<double> sample, double lo, double hi) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        const double cdf = (sample[i] - lo) / (hi - lo);
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    return d;
}

uint64_t fnv1a64(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace intermix
