#pragma once

// Fibre-wise future/past correlations, equivariant density approximation for
// the GH family, and polynomial decay-exponent fits.
//
//   Cor_n(omega) = int (phi o f_omega^n) psi dmu_omega
//                - int phi dmu_{sigma^n omega} int psi dmu_omega
//
// For Pikovsky maps mu_omega is normalized Lebesgue on [-1,1] for every
// fiber; for GH maps mu_omega is approximated by pushing uniform mass
// forward p steps from sigma^{-p} omega.

#include <functional>
#include <string>

#include "intermix/cocycle.hpp"
#include "intermix/numerics.hpp"

namespace intermix {

struct Observable {
    std::function<double(double)> f;
    enum class Kind { holder, bounded } kind = Kind::bounded;
    double holder_exponent = 1.0;
    double holder_constant = 1.0;  // Holder constant, or the sup bound
    std::string name;

    double operator()(double x) const { return f(x); }
};

Observable obs_identity();            // psi(x) = x, Lipschitz (eta = 1, C = 1)
Observable obs_centered_indicator();  // phi = 1_{[0,1]} - 1/2, bounded

// Verifies |psi(x)-psi(y)| <= C |x-y|^eta on sampled pairs; returns the
// largest observed quotient.
double holder_quotient(const Observable& obs, int pairs, uint64_t seed);

struct QuadSpec {
    int initial_panels = 1 << 14;
    int max_panels = 1 << 18;
    int nodes_per_panel = 8;
    double abs_tol = 1e-8;
};

struct CorrelationEstimate {
    double value = 0.0;
    double error = 0.0;   // last refinement change (quadrature) or MC stderr
    bool flagged = false; // refinement did not reach tolerance
};

// Quadrature path against normalized Lebesgue (exact invariant family for
// Pikovsky). Cost grows like panels * n; intended for small n.
CorrelationEstimate correlation_future_quad(const OmegaWindow& w, int n,
                                            const Observable& phi, const Observable& psi,
                                            const QuadSpec& spec = {});
CorrelationEstimate correlation_past_quad(const OmegaWindow& w, int n,
                                          const Observable& phi, const Observable& psi,
                                          const QuadSpec& spec = {});

// Monte Carlo ensemble path: evolves one ensemble and reads correlations at
// the requested checkpoints. equil_depth > 0 first equilibrates the ensemble
// from sigma^{-equil_depth} omega (the DensityApprox measure); 0 = Lebesgue.
struct McCorrelations {
    std::vector<int> ns;
    std::vector<double> cor;
    std::vector<double> stderr_;
    int points = 0;
    int singular_discards = 0;
};
McCorrelations correlation_future_mc(const OmegaWindow& w, const std::vector<int>& ns,
                                     const Observable& phi, const Observable& psi,
                                     int points, uint64_t seed, int equil_depth = 0);

// past correlations = future correlations started at sigma^{-n} omega
CorrelationEstimate correlation_past_equilibrium(const OmegaWindow& w, int n,
                                                 const Observable& phi,
                                                 const Observable& psi, int points,
                                                 uint64_t seed, int equil_depth);

struct DensityApprox {
    std::vector<double> mass;  // per-bin probability over [-1,1]
    int depth = 0;             // pullback depth used
    int64_t base_offset = 0;
    uint64_t sample_seed = 0;
    int points = 0;

    int bins() const { return static_cast<int>(mass.size()); }
    double l1_distance(const DensityApprox& other) const;
};

// Histogram of the p-step pushforward of uniform mass from sigma^{-p} omega.
DensityApprox equivariant_density(const OmegaWindow& w, int pullback_depth, int bins,
                                  int points, uint64_t seed);

struct DecayFit {
    PowerLawFit least_squares;
    PowerLawFit envelope;
    double n_lo = 0.0, n_hi = 0.0;
};

// Log-log fits of |cor| vs n above the burn-in.
DecayFit decay_fit(const std::vector<double>& ns, const std::vector<double>& cors,
                   double burn_in = 0.0);

// Exact autocorrelation of psi(x) = x for the alpha = 1 (doubling) fiber
// under normalized Lebesgue: the dyadic sum over the 2^n linear pieces of the
// n-fold map (independent oracle for the quadrature/MC paths).
double exact_dyadic_autocorrelation(int n);

}  // namespace intermix
