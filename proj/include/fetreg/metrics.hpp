#pragma once

#include <vector>

#include "fetreg/image.hpp"

namespace fetreg {

/// Flattened label/prediction pair for the combined segmentation loss.
/// p holds ground-truth labels in {0,1}, p_hat predictions in [0,1].
struct LossInputs {
    std::vector<double> p;
    std::vector<double> p_hat;
    double delta = 1e-5;  // smoothing constant guarding the IoU denominator
};

/// Mean binary cross-entropy. Predictions are clamped to
/// [1e-7, 1 - 1e-7] before the logarithms so saturated values stay finite.
double bce_loss(const LossInputs& in);

/// Soft Jaccard loss: 1 - (sum(p*p_hat)+delta) / (sum(p+p_hat)-sum(p*p_hat)+delta).
double iou_loss(const LossInputs& in);

/// bce_loss + iou_loss.
double combined_loss(const LossInputs& in);

/// 2|A∩B| / (|A|+|B|); 1 when both masks are empty.
double dice_score(const BinaryMask& a, const BinaryMask& b);

/// |A∩B| / |A∪B|; 1 when both masks are empty.
double iou_score(const BinaryMask& a, const BinaryMask& b);

struct SsimParams {
    int window = 11;      // odd, >= 3
    double k1 = 0.01;
    double k2 = 0.03;
    int stride = 1;

    void validate() const;
};

/// Mean SSIM over square windows fully inside joint_validity, with uniform
/// window weighting and dynamic range L = 1. Windows touching any invalid
/// pixel are skipped entirely. Throws InsufficientOverlapError when no
/// window qualifies.
double ssim(const ScalarImage& a, const ScalarImage& b, const BinaryMask& joint_validity,
            const SsimParams& params = {});

}  // namespace fetreg
