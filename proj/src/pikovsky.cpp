#include "intermix/pikovsky.hpp"

#include <cmath>

namespace intermix {
namespace pik {

void validate(const PikParams& p, bool sanity_mode) {
    const double lo = sanity_mode ? 1.0 : 1.0 + 1e-9;
    if (!(p.alpha >= lo && p.alpha < 3.0))
        throw std::invalid_argument("PikParams: alpha=" + std::to_string(p.alpha) +
                                    " outside [" + std::to_string(lo) + ", 3)");
}

BranchId branch_of(const PikParams& p, double x) {
    if (std::abs(x) < kSingularGuard)
        throw SingularPointError("branch_of: x at singular point 0");
    const double split = branch_split(p);
    BranchId b;
    b.side = (x < 0.0) ? Side::minus : Side::plus;
    // at |x| == split choose inner (the map is continuous there)
    b.sub = (std::abs(x) <= split) ? Sub::inner : Sub::outer;
    return b;
}

namespace {

// outer piece on I+: x = phi(g) = g + (1-g)^a/(2a), increasing on [0,1]
double forward_plus(const PikParams& p, double x) {
    const double a = p.alpha;
    const double split = branch_split(p);
    if (x <= split) {
        // explicit inner piece: g = (2 a x)^{1/a} - 1
        return std::pow(2.0 * a * x, 1.0 / a) - 1.0;
    }
    if (x >= 1.0) return 1.0;
    auto f = [&](double g) { return g + pow_pos(1.0 - g, a) / (2.0 * a) - x; };
    auto df = [&](double g) { return 1.0 - 0.5 * pow_pos(1.0 - g, a - 1.0); };
    const RootResult r = newton_bisect(f, df, 0.0, 1.0, 1e-14, 200);
    if (!r.converged)
        throw NumericError("pik::forward: outer-branch solve stalled, residual " +
                           std::to_string(r.residual));
    return r.x;
}

}  // namespace

double forward(const PikParams& p, double x) {
    if (std::abs(x) < kSingularGuard)
        throw SingularPointError("pik::forward: x at singular point 0");
    if (x < -1.0 || x > 1.0)
        throw std::domain_error("pik::forward: x outside [-1,1]");
    return x > 0.0 ? forward_plus(p, x) : -forward_plus(p, -x);
}

double inverse(const PikParams& p, double y, BranchId branch) {
    const double a = p.alpha;
    if (branch.side == Side::plus) {
        if (branch.sub == Sub::inner) {
            if (y < -1.0 || y > 0.0)
                throw BranchRangeError("pik::inverse: y outside plus/inner image (-1,0]");
            return pull_plus_inner(a, y);
        }
        if (y < 0.0 || y > 1.0)
            throw BranchRangeError("pik::inverse: y outside plus/outer image [0,1]");
        return pull_plus_outer(a, y);
    }
    if (branch.sub == Sub::inner) {
        if (y < 0.0 || y > 1.0)
            throw BranchRangeError("pik::inverse: y outside minus/inner image [0,1)");
        return pull_minus_inner(a, y);
    }
    if (y < -1.0 || y > 0.0)
        throw BranchRangeError("pik::inverse: y outside minus/outer image [-1,0]");
    return pull_minus_outer(a, y);
}

double derivative(const PikParams& p, double x) {
    if (std::abs(x) < kSingularGuard)
        throw SingularPointError("pik::derivative: x at singular point 0");
    const double a = p.alpha;
    const double g = forward_plus(p, std::abs(x));  // g' is even
    if (std::abs(x) <= branch_split(p)) {
        // dx/dg = (1+g)^{a-1}/2
        return 2.0 * std::pow(1.0 + g, 1.0 - a);
    }
    return 1.0 / (1.0 - 0.5 * pow_pos(1.0 - g, a - 1.0));
}

double second_derivative(const PikParams& p, double x) {
    if (std::abs(x) < kSingularGuard)
        throw SingularPointError("pik::second_derivative: x at singular point 0");
    const double a = p.alpha;
    const double ax = std::abs(x);
    const double g = forward_plus(p, ax);
    double d2;  // value on I+; g'' is odd
    if (ax <= branch_split(p)) {
        // x(g) = (1+g)^a/(2a):  g'' = -x''(g) g'^3 = 4(1-a)(1+g)^{1-2a}
        d2 = 4.0 * (1.0 - a) * std::pow(1.0 + g, 1.0 - 2.0 * a);
    } else {
        const double dp = 1.0 - 0.5 * pow_pos(1.0 - g, a - 1.0);
        const double d2p = 0.5 * (a - 1.0) * pow_pos(1.0 - g, a - 2.0);
        d2 = -d2p / (dp * dp * dp);
    }
    return x > 0.0 ? d2 : -d2;
}

double schwarzian(const PikParams& p, double x) {
    const double h = 1e-5 * (1.0 + std::abs(x));
    const double d3 =
        (second_derivative(p, x + h) - second_derivative(p, x - h)) / (2.0 * h);
    const double d1 = derivative(p, x);
    const double d2 = second_derivative(p, x);
    const double r = d2 / d1;
    return d3 / d1 - 1.5 * r * r;
}

double u_error(const PikParams& p, double x) {
    const double a = p.alpha;
    const double g = forward_plus(p, std::abs(x));
    const double ratio = (1.0 - g) / (1.0 - std::abs(x));
    return (pow_pos(ratio, a) - 1.0) / (2.0 * a);
}

}  // namespace pik
}  // namespace intermix
