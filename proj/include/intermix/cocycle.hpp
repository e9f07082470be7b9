#pragma once

// Driving system: i.i.d. windows of map parameters under nu^Z, the shift,
// fiber-map composition along a window, and integration against nu.

#include <memory>
#include <variant>
#include <vector>

#include "intermix/grassman_horner.hpp"
#include "intermix/pikovsky.hpp"

namespace intermix {

enum class Family { pikovsky, grassman_horner };

// flat parameter record for one fiber map
struct MapParams {
    Family family = Family::pikovsky;
    double alpha = 2.0;                      // Pikovsky
    GHParams gh;                             // Grassman-Horner

    static MapParams pik(double alpha) {
        MapParams m;
        m.family = Family::pikovsky;
        m.alpha = alpha;
        return m;
    }
    static MapParams grassman(const GHParams& p) {
        MapParams m;
        m.family = Family::grassman_horner;
        m.gh = p;
        return m;
    }
};

struct ParamDistribution {
    enum class Kind { discrete, uniform };

    Family family = Family::pikovsky;
    Kind kind = Kind::discrete;

    // discrete: atoms with probabilities summing to 1 (+-1e-12)
    std::vector<std::pair<MapParams, double>> atoms;

    // uniform: Pikovsky alpha ~ U[lo,hi]; GH gamma ~ U[lo,hi] with the
    // remaining (k,a,b) taken from `gh_template`
    double lo = 0.0, hi = 0.0;
    GHParams gh_template;

    static ParamDistribution discrete_pik(std::vector<std::pair<double, double>> alpha_p);
    static ParamDistribution uniform_pik(double lo, double hi);
    static ParamDistribution discrete_gh(std::vector<std::pair<GHParams, double>> atom_p);
    static ParamDistribution uniform_gh_gamma(double lo, double hi, const GHParams& tmpl);

    void validate() const;
    MapParams draw(double u01) const;  // quantile transform of one uniform

    // parameter-box corners (alpha_1/alpha_2 or gamma_1/gamma_2)
    double corner_lo() const;
    double corner_hi() const;
    bool degenerate() const;  // single atom or zero-width interval
};

// A finite realized window omega[-L_past .. L_future] with a shift offset.
// Values (and for GH the built fiber maps) are materialized eagerly and
// shared immutably; shifting is O(1). Regeneration from the same
// (seed, distribution, extents) is bit-identical: entry i is a pure function
// of CounterRng(seed) at counter i.
class OmegaWindow {
public:
    OmegaWindow() = default;

    const MapParams& at(int64_t rel) const;        // values[offset + rel]
    const MapParams& current() const { return at(0); }  // alpha(omega)
    double pik_alpha(int64_t rel) const { return at(rel).alpha; }
    const GHMap& gh_map(int64_t rel) const;

    int64_t lo() const { return lo_; }              // smallest absolute index
    int64_t hi() const { return hi_; }              // largest absolute index
    int64_t offset() const { return offset_; }
    uint64_t seed() const { return seed_; }
    Family family() const { return dist_ ? dist_->family : Family::pikovsky; }
    const ParamDistribution& distribution() const { return *dist_; }

    OmegaWindow shifted(int64_t j) const;

    static OmegaWindow sample(const ParamDistribution& d, int64_t l_past,
                              int64_t l_future, uint64_t seed);

private:
    std::shared_ptr<const std::vector<MapParams>> values_;
    std::shared_ptr<const std::vector<GHMap>> gh_maps_;
    std::shared_ptr<const ParamDistribution> dist_;
    int64_t lo_ = 0, hi_ = -1;
    int64_t offset_ = 0;
    uint64_t seed_ = 0;
};

inline OmegaWindow sample_omega(const ParamDistribution& d, int64_t l_past,
                                int64_t l_future, uint64_t seed) {
    return OmegaWindow::sample(d, l_past, l_future, seed);
}
inline OmegaWindow shift(const OmegaWindow& w, int64_t j) { return w.shifted(j); }

struct OrbitError : std::runtime_error {
    OrbitError(const std::string& what, int step) : std::runtime_error(what), step(step) {}
    int step;
};

// One fiber-map application at relative offset `rel`.
double fiber_forward(const OmegaWindow& w, int64_t rel, double x);
double fiber_derivative(const OmegaWindow& w, int64_t rel, double x);
double fiber_second_derivative(const OmegaWindow& w, int64_t rel, double x);

// f_omega^n(x) = f_{sigma^{n-1}omega} o ... o f_omega; throws OrbitError when
// the orbit hits the singular point within 1e-13 (counted, never interpolated).
double cocycle_apply(const OmegaWindow& w, int64_t n, double x);

// E_nu[fn]: exact weighted sum for discrete nu, panel-refined 64-node
// Gauss-Legendre for uniform nu (refined until successive values differ
// by < 1e-10).
double expect_nu(const std::function<double(const MapParams&)>& fn,
                 const ParamDistribution& d);

// Scalar-parameter convenience (alpha for Pikovsky, gamma for GH).
double expect_nu_scalar(const std::function<double(double)>& fn,
                        const ParamDistribution& d);

}  // namespace intermix
