#pragma once

// Small numerical toolbox shared by the map/tower/correlation modules:
// bracketed Newton for monotone implicit functions, composite Gauss-Legendre
// panels, Neumaier-compensated accumulation for long polynomial tails,
// log-log power-law fits, and a splittable counter-based RNG.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace intermix {

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// x^a with fast paths for the half-integer exponents that dominate the
// default parameter grids (alpha in {1.5, 2, 2.5}).
inline double pow_pos(double x, double a) {
    if (a == 2.0) return x * x;
    if (a == 1.5) return x * std::sqrt(x);
    if (a == 2.5) return x * x * std::sqrt(x);
    if (a == 1.0) return x;
    if (a == 0.5) return std::sqrt(x);
    return std::pow(x, a);
}

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Bisection-safeguarded Newton on a bracketed monotone function.
// f(lo) and f(hi) must have opposite signs (or one endpoint is a root).
// Falls back to a bisection step whenever the Newton step leaves the
// bracket or fails to shrink it.
RootResult newton_bisect(const std::function<double(double)>& f,
                         const std::function<double(double)>& df,
                         double lo, double hi,
                         double x_tol = 1e-14, int max_iter = 200);

// Throwing wrapper: returns the root, raises NumericError with the residual
// on non-convergence.
double solve_monotone(const std::function<double(double)>& f,
                      const std::function<double(double)>& df,
                      double lo, double hi,
                      double x_tol = 1e-14, int max_iter = 200);

// Neumaier-compensated accumulator; deep-cell tail sums lose all
// significance in plain double accumulation past ~1e4 terms.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            carry_ += (sum_ - t) + v;
        else
            carry_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

// Nodes/weights for n-point Gauss-Legendre on [-1,1]; cached per n.
const std::vector<std::pair<double, double>>& gauss_legendre(int n);

// Composite Gauss-Legendre over [a,b] with `panels` equal panels.
double integrate_panels(const std::function<double(double)>& f,
                        double a, double b, int panels, int nodes_per_panel);

// Panel-doubling integration: refine until two refinements agree within
// abs_tol or the panel cap is hit. `converged=false` marks a flagged
// estimate (caller decides whether that is an error).
struct QuadResult {
    double value = 0.0;
    double last_change = 0.0;
    int panels = 0;
    bool converged = false;
};
QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              double a, double b,
                              int initial_panels, int max_panels,
                              int nodes_per_panel, double abs_tol);

// Least-squares power-law fit on (log x, log |y|).
struct PowerLawFit {
    double exponent = 0.0;   // slope in log-log
    double intercept = 0.0;  // log-intercept
    double r2 = 0.0;
    double curvature = 0.0;  // quadratic coefficient of a 2nd-order log-log fit
    bool superpolynomial = false;
    int points = 0;
    int sign_changes = 0;    // sign changes among the raw y before |.|
    double x_lo = 0.0, x_hi = 0.0;
};

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// Upper-envelope variant: fits through the running maxima of |y| scanned
// from the right (theorems give upper bounds, not asymptotics).
PowerLawFit fit_power_law_envelope(const std::vector<double>& x, const std::vector<double>& y);

// Fit y ~ c + beta * x^{-delta} on the tail of a convergent curve and report
// the extrapolated limit c. delta is grid-searched, (c, beta) solved linearly.
struct LimitFit {
    double limit = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double rms = 0.0;
};
LimitFit fit_limit_power_correction(const std::vector<double>& x, const std::vector<double>& y);

// Fit y ~ c + b1 z + ... + b_deg z^deg with z = 1/log x and report c: the
// right model when the corrections form a series in 1/log n (weighted Cesaro
// averages of ~1/log k summands do; a power-correction fit misses them badly).
double fit_limit_log_correction(const std::vector<double>& x, const std::vector<double>& y,
                                int degree = 3);

// SplitMix64-style counter RNG: the value at counter i is a pure function of
// (seed, i), so windows extend in either direction without replaying streams
// and parallel sweeps get independent, replayable streams.
struct CounterRng {
    uint64_t seed = 0;

    static uint64_t mix(uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    uint64_t at(int64_t counter) const {
        return mix(seed ^ (0x9E3779B97F4A7C15ull * static_cast<uint64_t>(counter)));
    }
    // uniform in [0,1)
    double uniform_at(int64_t counter) const {
        return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
    }
    // derive an independent stream (e.g. one per trial or per task)
    CounterRng substream(uint64_t tag) const { return CounterRng{mix(seed ^ mix(tag))}; }
};

// Sequential convenience view over a CounterRng.
class RngStream {
public:
    explicit RngStream(CounterRng rng) : rng_(rng) {}
    double uniform() { return rng_.uniform_at(next_++); }
    uint64_t bits() { return rng_.at(next_++); }

private:
    CounterRng rng_;
    int64_t next_ = 0;
};

// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware).
// Tasks are indexed, so deterministic outputs only require the caller to
// write into per-index slots.
void parallel_for(int64_t count, const std::function<void(int64_t)>& fn, int threads = 0);

// Kolmogorov-Smirnov distance between a sample and the uniform law on [lo,hi].
double ks_uniform_statistic(std::vector<double> sample, double lo, double hi);

// FNV-1a 64-bit over a byte buffer (manifest checksums).
uint64_t fnv1a64(const void* data, size_t n);

}  // namespace intermix
