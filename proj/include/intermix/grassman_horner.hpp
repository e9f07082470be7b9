#pragma once

// Concrete Grassman-Horner representative h on I = [-1,1]:
//
//   h(x) = 1 - b|x|^k            |x| <= eps      (exact near the singularity)
//   h(x) = -|x| + a(1-|x|)^gamma |x| >= 1 - rho  (exact near the neutral points)
//
// h is even, strictly increasing on I^- and strictly decreasing on I^+, with
// h(+-1) = -1 and h(0+-) = 1; both halves are full branches onto I. On the
// glue region eps <= |x| <= 1-rho the derivative H' is piecewise linear with
// a single interior knee, solved so that h is C^1 at both junctions and the
// value change matches exactly. That makes the glue convex, monotone and
// expanding by construction whenever the chord condition
//     H'(eps) <= (H(1-rho)-H(eps))/(1-rho-eps) <= H'(1-rho)
// holds; eps (and if needed rho) is shrunk from its cap until it does, and
// construction fails with the violated condition otherwise.

#include <optional>
#include <string>
#include <vector>

#include "intermix/pikovsky.hpp"  // Side, errors

namespace intermix {

struct GlueSpec {
    double eps_cap = 0.25;  // upper bound for the near-0 exact region
    double rho = 0.25;      // width of the near-(+-1) exact region
};

struct GHParams {
    double gamma = 1.5;  // 1 < gamma <= 2
    double k = 0.5;      // 0 < k < 1, k(gamma-1) < 1
    double a = 1.0;
    double b = 1.0;
    GlueSpec glue;

    double zeta() const { return k * (gamma - 1.0); }
};

struct GHCheck {
    std::string name;
    bool pass = false;
    double witness = 0.0;  // x realizing the extremal value
    double value = 0.0;
};

struct GHValidation {
    std::vector<GHCheck> checks;
    bool all_pass = false;
    const GHCheck* find(const std::string& name) const;
};

struct GHBuildError : std::runtime_error {
    GHBuildError(const std::string& condition, double witness, double value);
    std::string condition;
    double witness;
    double value;
};

class GHMap {
public:
    enum class Validation { light, full };

    static GHMap build(const GHParams& p, Validation level = Validation::full);

    double forward(double x) const;
    double inverse(double y, Side side) const;
    double derivative(double x) const;
    double second_derivative(double x) const;
    double schwarzian(double x) const;  // third derivative by FD of the analytic second

    // error term of the local normal forms: near +-1 it is
    // (h(x) -+ x)/(1 -+ x)^gamma - a (zero on the exact pieces), near 0 it is
    // (1 - h(x))/|x|^k - b.
    double u_error_neutral(double x) const;
    double u_error_origin(double x) const;

    const GHParams& params() const { return params_; }
    double eps() const { return eps_; }
    double rho() const { return rho_; }
    double knee() const { return knee_; }
    const GHValidation& validation() const { return validation_; }
    // junction abscissae on I+ where h is only C^1; grids should avoid them
    std::vector<double> junctions() const { return {eps_, knee_, 1.0 - rho_}; }

private:
    GHMap() = default;

    // half-map H on (0,1] and derivatives
    double eval_half(double u) const;
    double deriv_half(double u) const;
    double second_half(double u) const;
    double invert_half(double y) const;

    void run_validation(int grid_points);

    GHParams params_;
    double eps_ = 0.0, rho_ = 0.0;
    double knee_ = 0.0;        // interior knee of the glue
    double d0_ = 0.0, dm_ = 0.0, d1_ = 0.0;  // H' at eps, knee, 1-rho
    double h_eps_ = 0.0, h_knee_ = 0.0;      // H values at the left piece anchors
    double s0_ = 0.0, s1_ = 0.0;             // H'' on the two glue pieces
    GHValidation validation_;
};

// Convenience wrapper matching the operation vocabulary used elsewhere.
inline GHMap gh_build(const GHParams& p,
                      GHMap::Validation level = GHMap::Validation::full) {
    return GHMap::build(p, level);
}

namespace gh {
// Limit of (1 + x_n^-) n^{1/(gamma-1)} for the constant-parameter ladder,
// (a(gamma-1))^{-1/(gamma-1)}; same constant for 1 - x_n^+.
inline double ladder_constant(double gamma, double a) {
    return std::pow(a * (gamma - 1.0), -1.0 / (gamma - 1.0));
}
}  // namespace gh

}  // namespace intermix
