#pragma once

// Induced partitions with return times, exact tail measures, tower mass.
//
// Pikovsky: cells delta_ij^-(omega) = delta_i^-(omega) ∩ g_omega^{-i}(delta_j^+(sigma^i omega)),
// return time i+j >= 2; the full-branch induced map g^{i+j}: delta_ij^- -> Lambda_{sigma^{i+j} omega}.
// Grassman-Horner: cells delta_n^-(omega) (n >= 2, return n) and
// delta_{1,n}^-(omega) = h_omega^{-1}(delta_n^+(sigma omega)) (return n+1).
//
// Cell endpoints are exact inverse-branch pullbacks; measures are endpoint
// differences accumulated with compensation (deep cells are ~ n^{-a/(a-1)-1}).

#include <vector>

#include "intermix/ladder.hpp"

namespace intermix {

struct InducedCell {
    int i = 0;  // Pikovsky: i >= 1; GH: 0 for delta_n^-, 1 for delta_{1,n}^-
    int j = 0;
    double left = 0.0, right = 0.0;
    int return_time = 0;
    double length() const { return right - left; }
};

struct InducedPartition {
    Family family = Family::pikovsky;
    uint64_t window_seed = 0;
    int64_t base_offset = 0;
    int return_cutoff = 0;  // cells with return_time <= cutoff are materialized

    std::vector<InducedCell> cells;  // ordered by (i, j)
    double lambda_left = 0.0;        // Lambda_omega = (lambda_left, 0)
    double lambda_length = 0.0;
    double covered = 0.0;
    double uncovered = 0.0;
};

struct StructuralError : std::runtime_error {
    explicit StructuralError(const std::string& w) : std::runtime_error(w) {}
};

InducedPartition build_partition(const OmegaWindow& w, int return_cutoff);

// m(R_omega > n) summed over the materialized cells (n < cutoff).
double tail_measure(const InducedPartition& p, int n);

// Exact m(R_omega > n) by interval pullback, no cell enumeration. O(n^2)
// pullback steps for Pikovsky, O(ladder) for GH.
double tail_exact(const OmegaWindow& w, int n);

// Exact tails on a grid of n values (shares nothing between entries; cost is
// the sum of the single-n costs).
std::vector<double> tail_exact_curve(const OmegaWindow& w, const std::vector<int>& ns);

// Monte Carlo annealed cell mass: mean and standard error over `n_samples`
// windows of m{x : R_omega(x) = n}.
struct AnnealedTail {
    int n = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    int samples = 0;
};
AnnealedTail annealed_tail(const ParamDistribution& d, int n, int n_samples,
                           uint64_t seed, int l_past = 0);

// Partial tower mass sum_{l<=L} sum_{2<=k<=K} m{R_{sigma^{-l} omega} = l+k}
// plus the truncation remainder sum_{l<=L} m{R_{sigma^{-l} omega} > l+K}.
struct TowerMass {
    double partial = 0.0;
    double truncation_tail = 0.0;             // remainder of the k-sum
    std::vector<double> partial_by_level;     // running partial sums over l
    double last_level_increment = 0.0;        // contribution of level L
    double last_block_increment = 0.0;        // sum_l m{R = l+K}
};
TowerMass tower_mass(const OmegaWindow& w, int levels, int block_cutoff);

// Itinerary verification for one cell: runs the cocycle from the cell
// midpoint and checks the sign pattern (I^-, then the Delta^+ chain, then the
// Delta^- chain) and the final landing in Lambda_{sigma^R omega}.
// Returns false with a reason on mismatch.
bool verify_cell_itinerary(const OmegaWindow& w, const InducedCell& cell,
                           std::string* reason = nullptr);

}  // namespace intermix
