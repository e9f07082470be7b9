#pragma once

// The A_k/B_k random variables behind the Cesaro convergence assumption,
// their nu-expectations, the closed-form limits for discrete/uniform
// parameter laws, Hoeffding concentration of the partial sums, and the
// quenched preimage lower bound with its n_1(omega) statistics.
//
// A_k in the single-coordinate reading (used for expectations, matching the
// worked discrete/uniform computations):
//
//   A_k(alpha) = (a1-1) f_k(alpha) * g1_k^{alpha-a1}
//              - (a1(a1-1)/2) f_k(alpha)^2 * g2_k^{2 alpha-a1-1}
//
// with f_k(alpha) = 1/(2 alpha) + m_k(alpha), m_k(alpha) = u_alpha(x_k^+(alpha)),
// g1_k = 1-x_k^+(a1), g2_k = 1-x_k^+(a2) evaluated on the deterministic
// corner ladders. The GH analogue B_k replaces f by a + m_k(gamma) and the
// gaps by 1+x_k^-(gamma_i). Pointwise inequality checks use the literal
// sigma^{n-k} indexing with the random-fiber ladder instead.

#include <optional>

#include "intermix/ladder.hpp"

namespace intermix {

class AkSpec {
public:
    // Builds corner ladders and expectation tables to depth n_max.
    AkSpec(const ParamDistribution& d, int n_max);

    const ParamDistribution& distribution() const { return dist_; }
    Family family() const { return dist_.family; }
    int n_max() const { return n_max_; }
    double corner_lo() const { return corner_lo_; }  // alpha_1 / gamma_1
    double corner_hi() const { return corner_hi_; }

    // corner-ladder gaps (1 - x_k^+(a_i), resp. 1 + x_k^-(g_i)), k in [1, n_max]
    double gap_lo(int k) const { return gap_lo_[static_cast<size_t>(k)]; }
    double gap_hi(int k) const { return gap_hi_[static_cast<size_t>(k)]; }
    // c_k(corner) = gap * k^{1/(corner-1)}
    double c_k_lo(int k) const;
    double c_k_hi(int k) const;

    // single-coordinate A_k/B_k at one parameter value
    double value(const MapParams& m, int k) const;
    double expectation(int k) const { return ea_[static_cast<size_t>(k)]; }

    // measured sup |u| over the parameter box (lazy, cached); Hoeffding span
    // s = (1/2+M)+(1/2+M)^2 (Pikovsky) / (a+M) + ((g1-1)/2)(a+M)^2 (GH);
    // analytic range bounds for A_k.
    double bound_M() const;
    double hoeffding_span() const;
    double lower_bound() const;
    double upper_bound() const;

    int default_q() const;  // 0 for discrete, 1 for uniform
    std::optional<double> closed_form_c_nu() const;

private:
    double m_k_of(double param, int k) const;  // deterministic m_k, interpolated for uniform

    ParamDistribution dist_;
    int n_max_ = 0;
    double corner_lo_ = 0.0, corner_hi_ = 0.0;
    std::vector<double> gap_lo_, gap_hi_;  // index 0 unused
    std::vector<double> ea_;               // E_nu A_k
    // per-support-point m_k tables: discrete -> one per atom; uniform -> a
    // fixed parameter grid, linearly interpolated in the parameter
    std::vector<double> m_grid_params_;
    std::vector<std::vector<double>> m_grid_;
    mutable double cached_M_ = -1.0;
};

// A_k at the window's current coordinate (expectation-compatible reading).
double compute_Ak(const AkSpec& spec, const OmegaWindow& w, int k);
inline double compute_Bk(const AkSpec& spec, const OmegaWindow& w, int k) {
    return compute_Ak(spec, w, k);  // same formula family, GH parameters
}

// Pointwise inequality of the telescoped preimage estimate with the literal
// sigma^{n-k} indexing: lhs = [1 -+ x_n(omega)]^{-(c1-1)} >= sum_k A_k(omega).
struct ChainCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};
ChainCheck inequality_chain(const AkSpec& spec, const OmegaWindow& w, int n);

struct CesaroResult {
    int q = 0;
    std::vector<std::pair<int, double>> curve;  // (n, (log n)^q/n * sum_{k<=n} E A_k)
    double fitted_limit = 0.0;
    std::optional<double> closed_form;
    bool diverged = false;  // curve not Cauchy on the log grid (reported, not thrown)
};
CesaroResult cesaro_limit(const AkSpec& spec, int n_max, std::optional<int> q = {});

struct HoeffdingPoint {
    double t = 0.0;
    double frequency = 0.0;  // empirical exceedance over the trials
    double bound = 0.0;      // exp(-2 n t^2 / ((log n)^{2q} s^2))
};
std::vector<HoeffdingPoint> hoeffding_check(const AkSpec& spec, int n,
                                            const std::vector<double>& t_grid,
                                            int trials, uint64_t seed);

struct QuenchedSample {
    int n1 = 1;           // smallest m with the bound holding on (m, n_max]
    bool censored = false;
    double limsup_stat = 0.0;  // max over the top half of n of n^{1/(c1-1)} gap / (log n)^{q/(c1-1)}
};
struct QuenchedReport {
    std::vector<QuenchedSample> samples;
    double c_nu = 0.0;
    double c_used = 0.0;
    double bound_stat = 0.0;  // c_nu^{-1/(c1-1)}
    double censored_fraction = 0.0;
    int q = 0;
};
QuenchedReport quenched_bound_report(const AkSpec& spec, int n_max, int trials,
                                     double c_fraction, uint64_t seed);

}  // namespace intermix
