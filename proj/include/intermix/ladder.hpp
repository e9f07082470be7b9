#pragma once

// Boundary sequences of the inducing construction. x_n^{+-}(omega) are the
// n-step preimages of 0 through the one-sided branches; y_n^{-+}(omega) pull
// x_{n-1}^{+-}(sigma omega) back through the opposite-side branch:
//
//   Delta_n^-(omega) = (x_{n+1}^-, x_n^-),  Delta_n^+(omega) = (x_n^+, x_{n+1}^+)
//   delta_n^-(omega) = (y_n^-, y_{n+1}^-),  delta_n^+(omega) = (y_{n+1}^+, y_n^+)   [Pikovsky]
//
// Every endpoint is computed by one-step pullback through the explicit
// inverse branches (never by forward root-finding on composed maps):
// pullbacks contract, composed forward maps amplify like 2^n.

#include <vector>

#include "intermix/cocycle.hpp"

namespace intermix {

struct PreimageLadder {
    Family family = Family::pikovsky;
    int depth = 0;
    uint64_t window_seed = 0;
    int64_t base_offset = 0;

    // index n in [0, depth]; y_*[0] is the convention y_0^+ = x_1^+ (resp.
    // y_0^- = x_1^-) so that (0, y_m^+) = union of delta_j^+ over j > m.
    std::vector<double> x_minus, x_plus, y_minus, y_plus;

    double max_residual = 0.0;  // forward-consistency residual over all checked n
};

// Full ladder at the window's current offset. Cost O(depth) for constant
// windows, O(depth^2) otherwise (each x_n(omega) is its own backward pass).
// `check_residuals` forward-applies the fiber maps and records the largest
// |g_omega(x_n(omega)) - x_{n-1}(sigma omega)| on a subsample.
PreimageLadder build_ladder(const OmegaWindow& w, int depth, bool check_residuals = true);

// Backward-pass antidiagonal for the Pikovsky plus/minus chains:
// result[k] = x_k^{side}(sigma^{n-k} omega), k = 0..n. O(n) time.
std::vector<double> pik_antidiagonal(const OmegaWindow& w, int n, Side side);

// Single deep value x_n^{side}(omega) without storing the whole ladder.
double pik_x_at(const OmegaWindow& w, int n, Side side);
double gh_x_at(const OmegaWindow& w, int n, Side side);

bool window_is_constant(const OmegaWindow& w, int64_t rel_lo, int64_t rel_hi);

}  // namespace intermix
