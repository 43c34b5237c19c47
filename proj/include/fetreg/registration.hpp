#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fetreg/affine.hpp"
#include "fetreg/image.hpp"
#include "fetreg/pyramid.hpp"

namespace fetreg {

/// Solver knobs for pairwise direct registration.
struct RegistrationOptions {
    int pyramid_levels = 4;
    double scale_factor = 0.5;
    int max_iterations_per_level = 50;
    double param_tolerance = 1e-6;
    double lm_lambda_init = 1e-3;
    double lm_lambda_up = 10.0;
    double lm_lambda_down = 10.0;
    /// Huber threshold in intensity units; residuals beyond it are
    /// down-weighted linearly.
    double robust_threshold = 0.1;
    /// Add the backward (moving vs inverse-warped fixed) residuals.
    bool bidirectional = true;

    void validate() const;  // throws on out-of-range values
};

/// Outcome of a pairwise registration. transform maps moving-frame
/// coordinates into fixed-frame coordinates.
struct RegistrationResult {
    AffineTransform transform;
    double final_cost = 0.0;
    /// Indexed by pyramid level (0 = full resolution).
    std::vector<int> iterations_per_level;
    bool converged = false;
    double valid_pixel_fraction = 0.0;
};

/// Robust bidirectional photometric cost and its analytic derivatives.
/// Row layout: one row per fixed-frame pixel (row-major); with
/// bidirectional, the moving-frame rows follow. Invalid rows are zero.
struct CostEval {
    double cost = 0.0;  // sum of Huber(e) over valid pixels / n_valid
    Eigen::VectorXd residuals;            // sqrt(Huber weight) * e
    Eigen::MatrixXd jacobian;             // d residual / d (a11,a12,a21,a22,tx,ty)
    std::vector<std::uint8_t> row_valid;  // 1 where the sample footprint was valid
    double valid_fraction = 0.0;          // valid rows / candidate rows
    long n_valid = 0;
};

/// Evaluate the photometric cost of sampling transform t. t maps FIXED-frame
/// coordinates into MOVING-frame coordinates (the warp used to resample the
/// moving image); the backward direction uses invert(t). The Jacobian
/// differentiates the sqrt-weighted residuals with respect to t's six
/// parameters, treating the Huber weights as constants (IRLS). Throws
/// InsufficientOverlapError when fewer than 5% of candidate pixels have a
/// valid sample footprint.
CostEval photometric_cost(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                          const ScalarImage& moving, const BinaryMask& moving_mask,
                          const AffineTransform& t, double robust_threshold, bool bidirectional);

/// Single-level Levenberg-Marquardt minimisation of the photometric cost.
/// T_init and the returned transform map moving-frame coordinates into
/// fixed-frame coordinates. Accepted steps never increase the cost.
RegistrationResult lm_solve(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                            const ScalarImage& moving, const BinaryMask& moving_mask,
                            const AffineTransform& t_init, const RegistrationOptions& opts);

/// Full coarse-to-fine registration: builds pyramids for both frames, runs
/// lm_solve per level, rescaling translations by 1/scale_factor between
/// levels. The cost is evaluated on lightly smoothed copies of the frames
/// (masks eroded accordingly), which suppresses the sub-pixel bias that
/// resampled sensor noise otherwise induces. Non-convergence is reported
/// through converged=false with the best-effort transform still returned.
RegistrationResult register_pair(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                                 const ScalarImage& moving, const BinaryMask& moving_mask,
                                 const AffineTransform& t_init, const RegistrationOptions& opts);

}  // namespace fetreg
