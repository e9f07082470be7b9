#include "intermix/correlation.hpp"

#include <algorithm>
#include <cmath>

namespace intermix {

Observable obs_identity() {
    Observable o;
    o.f = [](double x) { return x; };
    o.kind = Observable::Kind::holder;
    o.holder_exponent = 1.0;
    o.holder_constant = 1.0;
    o.name = "identity";
    return o;
}

Observable obs_centered_indicator() {
    Observable o;
    o.f = [](double x) { return x >= 0.0 ? 0.5 : -0.5; };
    o.kind = Observable::Kind::bounded;
    o.holder_constant = 0.5;
    o.name = "centered_indicator";
    return o;
}

double holder_quotient(const Observable& obs, int pairs, uint64_t seed) {
    RngStream rng{CounterRng{seed}};
    double worst = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const double x = -1.0 + 2.0 * rng.uniform();
        const double y = -1.0 + 2.0 * rng.uniform();
        if (x == y) continue;
        const double q = std::abs(obs(x) - obs(y)) /
                         std::pow(std::abs(x - y), obs.holder_exponent);
        worst = std::max(worst, q);
    }
    return worst;
}

namespace {

// cocycle evaluation that sidesteps the measure-zero singular hits a fixed
// quadrature node can produce
double orbit_value(const OmegaWindow& w, int n, double x) {
    try {
        return cocycle_apply(w, n, x);
    } catch (const OrbitError&) {
        return cocycle_apply(w, n, x + 1e-12);
    }
}

CorrelationEstimate correlation_quad_impl(const OmegaWindow& w, int n,
                                          const Observable& phi, const Observable& psi,
                                          const QuadSpec& spec) {
    // normalized Lebesgue on [-1,1]
    auto inner = [&](double x) { return phi(orbit_value(w, n, x)) * psi(x); };
    const QuadResult cross = integrate_adaptive(inner, -1.0, 1.0, spec.initial_panels,
                                                spec.max_panels, spec.nodes_per_panel,
                                                spec.abs_tol * 2.0);
    auto phi_only = [&](double x) { return phi(x); };
    auto psi_only = [&](double x) { return psi(x); };
    const QuadResult iphi =
        integrate_adaptive(phi_only, -1.0, 1.0, 256, 1 << 14, spec.nodes_per_panel, 1e-12);
    const QuadResult ipsi =
        integrate_adaptive(psi_only, -1.0, 1.0, 256, 1 << 14, spec.nodes_per_panel, 1e-12);

    CorrelationEstimate est;
    est.value = 0.5 * cross.value - 0.25 * iphi.value * ipsi.value;
    est.error = 0.5 * cross.last_change;
    est.flagged = !cross.converged;
    return est;
}

}  // namespace

CorrelationEstimate correlation_future_quad(const OmegaWindow& w, int n,
                                            const Observable& phi, const Observable& psi,
                                            const QuadSpec& spec) {
    return correlation_quad_impl(w, n, phi, psi, spec);
}

CorrelationEstimate correlation_past_quad(const OmegaWindow& w, int n,
                                          const Observable& phi, const Observable& psi,
                                          const QuadSpec& spec) {
    // past(omega, n) = future(sigma^{-n} omega, n): Lebesgue is equivariant
    return correlation_quad_impl(w.shifted(-n), n, phi, psi, spec);
}

McCorrelations correlation_future_mc(const OmegaWindow& w, const std::vector<int>& ns,
                                     const Observable& phi, const Observable& psi,
                                     int points, uint64_t seed, int equil_depth) {
    if (ns.empty()) throw std::invalid_argument("correlation_future_mc: empty grid");
    McCorrelations out;
    out.ns = ns;
    out.points = points;
    std::vector<int> sorted = ns;
    std::sort(sorted.begin(), sorted.end());

    const OmegaWindow start = equil_depth > 0 ? w.shifted(-equil_depth) : w;
    const CounterRng rng{seed};

    std::vector<double> x(static_cast<size_t>(points));
    std::vector<double> x0(static_cast<size_t>(points));
    std::vector<uint8_t> alive(static_cast<size_t>(points), 1);
    for (int i = 0; i < points; ++i)
        x[static_cast<size_t>(i)] = -1.0 + 2.0 * rng.uniform_at(i);

    int discards = 0;
    auto evolve = [&](const OmegaWindow& base, int from, int to) {
        const int chunk = 8192;
        const int64_t chunks = (points + chunk - 1) / chunk;
        std::vector<int> chunk_discards(static_cast<size_t>(chunks), 0);
        parallel_for(chunks, [&](int64_t c) {
            const int lo = static_cast<int>(c) * chunk;
            const int hi = std::min(points, lo + chunk);
            for (int i = lo; i < hi; ++i) {
                if (!alive[static_cast<size_t>(i)]) continue;
                double v = x[static_cast<size_t>(i)];
                for (int t = from; t < to; ++t) {
                    if (std::abs(v) < pik::kSingularGuard) {
                        alive[static_cast<size_t>(i)] = 0;
                        ++chunk_discards[static_cast<size_t>(c)];
                        break;
                    }
                    v = fiber_forward(base, t, v);
                }
                x[static_cast<size_t>(i)] = v;
            }
        });
        for (int d : chunk_discards) discards += d;
    };

    if (equil_depth > 0) {
        evolve(start, 0, equil_depth);
    }
    for (size_t i = 0; i < x.size(); ++i) x0[i] = x[i];

    // means of psi at time 0
    double psi_mean = 0.0;
    int n_alive = 0;
    for (int i = 0; i < points; ++i)
        if (alive[static_cast<size_t>(i)]) {
            psi_mean += psi(x0[static_cast<size_t>(i)]);
            ++n_alive;
        }
    psi_mean /= std::max(1, n_alive);

    out.cor.resize(sorted.size());
    out.stderr_.resize(sorted.size());
    int current = 0;
    for (size_t gi = 0; gi < sorted.size(); ++gi) {
        evolve(w, current, sorted[gi]);
        current = sorted[gi];
        // phi mean at time n, then centered products
        double phi_mean = 0.0;
        n_alive = 0;
        for (int i = 0; i < points; ++i)
            if (alive[static_cast<size_t>(i)]) {
                phi_mean += phi(x[static_cast<size_t>(i)]);
                ++n_alive;
            }
        phi_mean /= std::max(1, n_alive);
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < points; ++i)
            if (alive[static_cast<size_t>(i)]) {
                const double prod = (phi(x[static_cast<size_t>(i)]) - phi_mean) *
                                    (psi(x0[static_cast<size_t>(i)]) - psi_mean);
                s += prod;
                s2 += prod * prod;
            }
        const double mean = s / std::max(1, n_alive);
        out.cor[gi] = mean;
        out.stderr_[gi] =
            n_alive > 1 ? std::sqrt((s2 / n_alive - mean * mean) / (n_alive - 1.0)) : 0.0;
    }
    // restore the caller's grid order
    McCorrelations reordered = out;
    for (size_t i = 0; i < ns.size(); ++i) {
        const auto it = std::find(sorted.begin(), sorted.end(), ns[i]);
        const size_t k = static_cast<size_t>(it - sorted.begin());
        reordered.ns[i] = ns[i];
        reordered.cor[i] = out.cor[k];
        reordered.stderr_[i] = out.stderr_[k];
    }
    reordered.singular_discards = discards;
    return reordered;
}

CorrelationEstimate correlation_past_equilibrium(const OmegaWindow& w, int n,
                                                 const Observable& phi,
                                                 const Observable& psi, int points,
                                                 uint64_t seed, int equil_depth) {
    const McCorrelations mc =
        correlation_future_mc(w.shifted(-n), {n}, phi, psi, points, seed, equil_depth);
    CorrelationEstimate est;
    est.value = mc.cor[0];
    est.error = mc.stderr_[0];
    return est;
}

double DensityApprox::l1_distance(const DensityApprox& other) const {
    if (other.bins() != bins())
        throw std::invalid_argument("DensityApprox::l1_distance: bin mismatch");
    double d = 0.0;
    for (size_t i = 0; i < mass.size(); ++i) d += std::abs(mass[i] - other.mass[i]);
    return d;
}

DensityApprox equivariant_density(const OmegaWindow& w, int pullback_depth, int bins,
                                  int points, uint64_t seed) {
    if (bins < 2 || points < 1)
        throw std::invalid_argument("equivariant_density: bad bins/points");
    DensityApprox d;
    d.mass.assign(static_cast<size_t>(bins), 0.0);
    d.depth = pullback_depth;
    d.base_offset = w.offset();
    d.sample_seed = seed;
    d.points = points;

    const OmegaWindow start = w.shifted(-pullback_depth);
    const CounterRng rng{seed};
    std::vector<double> counts(static_cast<size_t>(bins), 0.0);
    std::mutex merge_mu;
    const int chunk = 16384;
    const int64_t chunks = (points + chunk - 1) / chunk;
    int64_t kept_total = 0;
    parallel_for(chunks, [&](int64_t c) {
        std::vector<double> local(static_cast<size_t>(bins), 0.0);
        int64_t kept = 0;
        const int lo = static_cast<int>(c) * chunk;
        const int hi = std::min(points, lo + chunk);
        for (int i = lo; i < hi; ++i) {
            double v = -1.0 + 2.0 * rng.uniform_at(i);
            bool ok = true;
            for (int t = 0; t < pullback_depth; ++t) {
                if (std::abs(v) < pik::kSingularGuard) {
                    ok = false;
                    break;
                }
                v = fiber_forward(start, t, v);
            }
            if (!ok) continue;
            int b = static_cast<int>((v + 1.0) * 0.5 * bins);
            b = std::clamp(b, 0, bins - 1);
            local[static_cast<size_t>(b)] += 1.0;
            ++kept;
        }
        std::lock_guard<std::mutex> lock(merge_mu);
        for (int b = 0; b < bins; ++b) counts[static_cast<size_t>(b)] += local[static_cast<size_t>(b)];
        kept_total += kept;
    });
    if (kept_total == 0) throw NumericError("equivariant_density: all samples discarded");
    for (int b = 0; b < bins; ++b)
        d.mass[static_cast<size_t>(b)] = counts[static_cast<size_t>(b)] / static_cast<double>(kept_total);
    return d;
}

DecayFit decay_fit(const std::vector<double>& ns, const std::vector<double>& cors,
                   double burn_in) {
    if (ns.size() != cors.size())
        throw std::invalid_argument("decay_fit: size mismatch");
    std::vector<double> xs, ys;
    for (size_t i = 0; i < ns.size(); ++i)
        if (ns[i] >= burn_in) {
            xs.push_back(ns[i]);
            ys.push_back(cors[i]);
        }
    DecayFit fit;
    fit.least_squares = fit_power_law(xs, ys);
    fit.envelope = fit_power_law_envelope(xs, ys);
    if (!xs.empty()) {
        fit.n_lo = *std::min_element(xs.begin(), xs.end());
        fit.n_hi = *std::max_element(xs.begin(), xs.end());
    }
    return fit;
}

double exact_dyadic_autocorrelation(int n) {
    // The alpha = 1 fiber is x -> 2x+1 (mod 2); conjugating by x = 2v-1 gives
    // v -> frac(2v). int x T^n(x) dm splits over the 2^n linear pieces:
    //   I_n = sum_{j<2^n} 4^{-n} (j/2 + 1/3),  Cor_n = 4 I_n - 1.
    if (n < 0) throw std::invalid_argument("exact_dyadic_autocorrelation: n < 0");
    if (n > 40) return 0.0;
    const double pieces = std::ldexp(1.0, n);     // 2^n
    const double w = std::ldexp(1.0, -2 * n);     // 4^{-n}
    // sum_j j = 2^n (2^n - 1)/2, summed exactly in closed dyadic arithmetic
    const double sum_j = pieces * (pieces - 1.0) * 0.5;
    const double integral = w * (0.5 * sum_j + pieces / 3.0);
    return 4.0 * integral - 1.0;
}

}  // namespace intermix
