#pragma once

// Separation time, induced-map Jacobians, the two-layer distortion bound,
// Schwarzian sign scans and the Koebe gap-ratio check.

#include <map>

#include "intermix/partition.hpp"

namespace intermix {

// Per-offset ladders built on demand with doubling depth; used to locate the
// induced-partition cell containing a point without materializing cells.
class LadderCache {
public:
    explicit LadderCache(const OmegaWindow& w, int initial_depth = 64,
                         int max_depth = 4096)
        : w_(w), init_(initial_depth), cap_(max_depth) {}

    // ladder at sigma^{off} omega with depth >= min_depth (nullptr if over cap)
    const PreimageLadder* at(int64_t off, int min_depth);
    const OmegaWindow& window() const { return w_; }

private:
    OmegaWindow w_;
    int init_, cap_;
    std::map<int64_t, PreimageLadder> cache_;
};

struct CellRef {
    int i = 0, j = 0;
    int return_time = 0;
    bool ok = false;       // located
    bool censored = false; // left the covered region / beyond ladder cap
};

// Locates the induced cell of x in Lambda_{sigma^off omega}.
CellRef locate_cell(LadderCache& cache, int64_t off, double x);

struct SeparationResult {
    int s = 0;
    bool censored = false;  // orbit left the covered partition region
    bool exceeded = false;  // still together after max_steps
};

// Number of induced-map iterations until x and y land in distinct cells.
SeparationResult separation_time(LadderCache& cache, double x, double y, int max_steps);

// |(f_omega^R)'(x)| accumulated in log space along the cell itinerary.
double induced_jacobian(const OmegaWindow& w, const InducedCell& cell, double x);

struct DistortionSample {
    int i = 0, j = 0;
    int s = 0;
    double ratio = 0.0;        // J(x)/J(y)
    double image_gap = 0.0;    // |f^R x - f^R y|
    double log_ratio = 0.0;
    bool censored = false;
};

struct DistortionScan {
    std::vector<DistortionSample> samples;
    double fitted_D = 0.0;      // max |ratio-1| / gamma^s over samples, gamma = 1/2
    double fitted_D_hat = 0.0;  // max |log ratio| / image gap (one-step layer)
    double max_ratio_minus_1 = 0.0;
    int censored = 0;
};

// Samples pairs inside each cell (base point + dyadic offsets, to populate
// all separation times) and records Jacobian ratios against both layers of
// the distortion bound. gamma is fixed at 1/2 (induced expansion > 2), not
// fitted.
DistortionScan distortion_scan(const OmegaWindow& w, const std::vector<InducedCell>& cells,
                               int pairs_per_cell, uint64_t seed);

struct SchwarzianScan {
    double max_value = -1e300;
    double arg_max = 0.0;
    double min_value = 1e300;
    double arg_min = 0.0;
    int points = 0;
    bool negative = false;  // max < 1e-8 (roundoff margin)
};

// Sg on I^+ \ Delta_0^+ = (x_1^+, 1), grid avoiding branch points (and for
// GH the glue junctions).
SchwarzianScan schwarzian_scan(const MapParams& m, int grid_points);

struct KoebeScan {
    double max_ratio = 0.0;
    int arg_max = 0;
    double min_ratio = 1e300;
    // spacing hypothесis diagnostics on the first four preimages of 0
    double spacing_tau = 0.0;        // per-omega bridge ratio max
    bool cross_omega_spacing = false;  // sup_omega x_i^- < inf_omega x_{i-1}^- over the box
    std::vector<double> ratios;      // (x_{n+1}^- - x_{n+2}^-)/(x_{n+2}^- - x_{n+3}^-)
};

KoebeScan koebe_ratio_scan(const OmegaWindow& w, int n_max);

}  // namespace intermix
