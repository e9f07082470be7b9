#include "intermix/cocycle.hpp"

#include <cmath>

namespace intermix {

ParamDistribution ParamDistribution::discrete_pik(
    std::vector<std::pair<double, double>> alpha_p) {
    ParamDistribution d;
    d.family = Family::pikovsky;
    d.kind = Kind::discrete;
    for (auto& [a, p] : alpha_p) d.atoms.emplace_back(MapParams::pik(a), p);
    d.validate();
    return d;
}

ParamDistribution ParamDistribution::uniform_pik(double lo, double hi) {
    ParamDistribution d;
    d.family = Family::pikovsky;
    d.kind = Kind::uniform;
    d.lo = lo;
    d.hi = hi;
    d.validate();
    return d;
}

ParamDistribution ParamDistribution::discrete_gh(
    std::vector<std::pair<GHParams, double>> atom_p) {
    ParamDistribution d;
    d.family = Family::grassman_horner;
    d.kind = Kind::discrete;
    for (auto& [g, p] : atom_p) d.atoms.emplace_back(MapParams::grassman(g), p);
    d.validate();
    return d;
}

ParamDistribution ParamDistribution::uniform_gh_gamma(double lo, double hi,
                                                      const GHParams& tmpl) {
    ParamDistribution d;
    d.family = Family::grassman_horner;
    d.kind = Kind::uniform;
    d.lo = lo;
    d.hi = hi;
    d.gh_template = tmpl;
    d.validate();
    return d;
}

void ParamDistribution::validate() const {
    if (kind == Kind::discrete) {
        if (atoms.empty())
            throw std::invalid_argument("ParamDistribution: no atoms");
        double total = 0.0;
        for (const auto& [m, p] : atoms) {
            if (p < 0.0) throw std::invalid_argument("ParamDistribution: negative probability");
            if (m.family != family)
                throw std::invalid_argument("ParamDistribution: atom family mismatch");
            if (family == Family::pikovsky)
                pik::validate(PikParams{m.alpha}, /*sanity_mode=*/true);
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("ParamDistribution: probabilities sum to " +
                                        std::to_string(total));
    } else {
        if (!(lo <= hi))
            throw std::invalid_argument("ParamDistribution: lo > hi");
        if (family == Family::pikovsky) {
            pik::validate(PikParams{lo}, true);
            pik::validate(PikParams{hi}, true);
        } else {
            if (!(lo > 1.0 && hi <= 2.0))
                throw std::invalid_argument("ParamDistribution: gamma interval outside (1,2]");
        }
    }
}

MapParams ParamDistribution::draw(double u) const {
    if (kind == Kind::discrete) {
        double c = 0.0;
        for (const auto& [m, p] : atoms) {
            c += p;
            if (u < c) return m;
        }
        return atoms.back().first;
    }
    const double t = lo + u * (hi - lo);
    if (family == Family::pikovsky) return MapParams::pik(t);
    GHParams g = gh_template;
    g.gamma = t;
    return MapParams::grassman(g);
}

double ParamDistribution::corner_lo() const {
    if (kind == Kind::uniform) return lo;
    double m = 1e300;
    for (const auto& [mp, p] : atoms)
        m = std::min(m, family == Family::pikovsky ? mp.alpha : mp.gh.gamma);
    return m;
}

double ParamDistribution::corner_hi() const {
    if (kind == Kind::uniform) return hi;
    double m = -1e300;
    for (const auto& [mp, p] : atoms)
        m = std::max(m, family == Family::pikovsky ? mp.alpha : mp.gh.gamma);
    return m;
}

bool ParamDistribution::degenerate() const {
    if (kind == Kind::uniform) return hi == lo;
    return atoms.size() == 1;
}

const MapParams& OmegaWindow::at(int64_t rel) const {
    const int64_t abs_idx = offset_ + rel;
    if (!values_ || abs_idx < lo_ || abs_idx > hi_)
        throw std::out_of_range("OmegaWindow: index " + std::to_string(abs_idx) +
                                " outside realized range [" + std::to_string(lo_) + "," +
                                std::to_string(hi_) + "]");
    return (*values_)[static_cast<size_t>(abs_idx - lo_)];
}

const GHMap& OmegaWindow::gh_map(int64_t rel) const {
    at(rel);  // bounds check
    return (*gh_maps_)[static_cast<size_t>(offset_ + rel - lo_)];
}

OmegaWindow OmegaWindow::shifted(int64_t j) const {
    const int64_t target = offset_ + j;
    if (target < lo_ || target > hi_)
        throw std::out_of_range("OmegaWindow::shifted: offset " + std::to_string(target) +
                                " outside realized range");
    OmegaWindow w = *this;
    w.offset_ = target;
    return w;
}

OmegaWindow OmegaWindow::sample(const ParamDistribution& d, int64_t l_past,
                                int64_t l_future, uint64_t seed) {
    if (l_past < 0 || l_future < 0)
        throw std::invalid_argument("sample_omega: negative extents");
    d.validate();
    OmegaWindow w;
    w.lo_ = -l_past;
    w.hi_ = l_future;
    w.offset_ = 0;
    w.seed_ = seed;
    w.dist_ = std::make_shared<const ParamDistribution>(d);

    const CounterRng rng{seed};
    auto vals = std::make_shared<std::vector<MapParams>>();
    vals->reserve(static_cast<size_t>(l_past + l_future + 1));
    for (int64_t i = w.lo_; i <= w.hi_; ++i)
        vals->push_back(d.draw(rng.uniform_at(i)));
    w.values_ = vals;

    if (d.family == Family::grassman_horner) {
        auto maps = std::make_shared<std::vector<GHMap>>();
        maps->reserve(vals->size());
        for (const auto& m : *vals)
            maps->push_back(GHMap::build(m.gh, GHMap::Validation::light));
        w.gh_maps_ = maps;
    }
    return w;
}

double fiber_forward(const OmegaWindow& w, int64_t rel, double x) {
    if (w.family() == Family::pikovsky)
        return pik::forward(PikParams{w.at(rel).alpha}, x);
    return w.gh_map(rel).forward(x);
}

double fiber_derivative(const OmegaWindow& w, int64_t rel, double x) {
    if (w.family() == Family::pikovsky)
        return pik::derivative(PikParams{w.at(rel).alpha}, x);
    return w.gh_map(rel).derivative(x);
}

double fiber_second_derivative(const OmegaWindow& w, int64_t rel, double x) {
    if (w.family() == Family::pikovsky)
        return pik::second_derivative(PikParams{w.at(rel).alpha}, x);
    return w.gh_map(rel).second_derivative(x);
}

double cocycle_apply(const OmegaWindow& w, int64_t n, double x) {
    for (int64_t t = 0; t < n; ++t) {
        if (std::abs(x) < pik::kSingularGuard)
            throw OrbitError("cocycle_apply: orbit hit the singular point at step " +
                                 std::to_string(t),
                             static_cast<int>(t));
        x = fiber_forward(w, t, x);
    }
    return x;
}

double expect_nu(const std::function<double(const MapParams&)>& fn,
                 const ParamDistribution& d) {
    auto check = [](double v) {
        if (!std::isfinite(v)) throw NumericError("expect_nu: non-finite integrand value");
        return v;
    };
    if (d.kind == ParamDistribution::Kind::discrete) {
        double s = 0.0;
        for (const auto& [m, p] : d.atoms) s += p * check(fn(m));
        return s;
    }
    if (d.hi == d.lo) {
        return check(fn(d.draw(0.0)));
    }
    auto integrand = [&](double t) {
        if (d.family == Family::pikovsky) return check(fn(MapParams::pik(t)));
        GHParams g = d.gh_template;
        g.gamma = t;
        return check(fn(MapParams::grassman(g)));
    };
    const QuadResult q =
        integrate_adaptive(integrand, d.lo, d.hi, 1, 1024, 64, 1e-10 * (d.hi - d.lo));
    if (!q.converged)
        throw NumericError("expect_nu: quadrature did not stabilize");
    return q.value / (d.hi - d.lo);
}

double expect_nu_scalar(const std::function<double(double)>& fn,
                        const ParamDistribution& d) {
    return expect_nu(
        [&](const MapParams& m) {
            return fn(d.family == Family::pikovsky ? m.alpha : m.gh.gamma);
        },
        d);
}

}  // namespace intermix
