#pragma once

// Pikovsky family g_alpha on I = [-1,1], defined implicitly on I+ by
//
//   x = (1/2a)(1+g)^a          0 <= x <= 1/(2a)   (inner piece)
//   x = g + (1/2a)(1-g)^a      1/(2a) <= x <= 1   (outer piece)
//
// extended oddly, g(-x) = -g(x). Both halves are full increasing branches:
// inner maps (0,1/(2a)] onto (-1,0], outer maps [1/(2a),1] onto [0,1].
// alpha = 1 is the doubling map (sanity mode), alpha > 1 has a neutral fixed
// point at 1 and a derivative singularity ~ x^{1/a-1} at the origin.

#include <stdexcept>
#include <string>

#include "intermix/numerics.hpp"

namespace intermix {

struct PikParams {
    double alpha = 2.0;
};

// smoothness components of one fiber map
enum class Side { minus, plus };
enum class Sub { inner, outer };  // |x| below / above 1/(2a); unused for GH

struct BranchId {
    Side side = Side::plus;
    Sub sub = Sub::inner;
};

struct SingularPointError : std::domain_error {
    explicit SingularPointError(const std::string& w) : std::domain_error(w) {}
};
struct BranchRangeError : std::domain_error {
    explicit BranchRangeError(const std::string& w) : std::domain_error(w) {}
};

namespace pik {

constexpr double kSingularGuard = 1e-13;  // derivative blow-up makes closer evaluation meaningless

void validate(const PikParams& p, bool sanity_mode = false);

inline double branch_split(const PikParams& p) { return 1.0 / (2.0 * p.alpha); }

BranchId branch_of(const PikParams& p, double x);

// g_alpha(x). Inner pieces are explicit; the outer piece inverts the
// monotone implicit relation with bisection-safeguarded Newton
// (abs tol 1e-14, <= 200 iterations).
double forward(const PikParams& p, double x);

// x with g_alpha(x) = y on the requested branch (all four closed forms).
double inverse(const PikParams& p, double y, BranchId branch);

// g', g'' via the closed-form inverse branches (implicit differentiation).
double derivative(const PikParams& p, double x);
double second_derivative(const PikParams& p, double x);

// Schwarzian derivative g'''/g' - (3/2)(g''/g')^2 with g''' obtained by
// centered differencing of the analytic g'' (step 1e-5 * (1+|x|)).
double schwarzian(const PikParams& p, double x);

// u_alpha(x) = (1/2a)(((1-g(x))/(1-x))^a - 1), the outer-piece error term
// appearing in the A_k random variables; defined for x in the outer region.
double u_error(const PikParams& p, double x);

// One-step preimage recursions used by ladders (closed forms):
//   x_{n}^+ = y + (1/2a)(1-y)^a  with y = x_{n-1}^+  (plus/outer)
//   x_{n}^- = y - (1/2a)(1+y)^a  with y = x_{n-1}^-  (minus/outer)
//   y_n^-   = -(1/2a)(1-y)^a     with y = x_{n-1}^+  (minus/inner)
//   y_n^+   =  (1/2a)(1+y)^a     with y = x_{n-1}^-  (plus/inner)
inline double pull_plus_outer(double alpha, double y) {
    return y + pow_pos(1.0 - y, alpha) / (2.0 * alpha);
}
inline double pull_minus_outer(double alpha, double y) {
    return y - pow_pos(1.0 + y, alpha) / (2.0 * alpha);
}
inline double pull_minus_inner(double alpha, double y) {
    return -pow_pos(1.0 - y, alpha) / (2.0 * alpha);
}
inline double pull_plus_inner(double alpha, double y) {
    return pow_pos(1.0 + y, alpha) / (2.0 * alpha);
}

// Limit of (1 - x_n^+) n^{1/(a-1)} for the constant-parameter ladder
// (= the c_k(alpha) limit; from z_{n+1} = z_n - z_n^a/(2a)).
inline double ladder_constant(double alpha) {
    return std::pow(2.0 * alpha / (alpha - 1.0), 1.0 / (alpha - 1.0));
}

}  // namespace pik
}  // namespace intermix
