#pragma once

#include <vector>

#include "fetreg/image.hpp"

namespace fetreg {

/// Coarse-to-fine image stack. Level 0 is the input at full resolution;
/// level l+1 is level l smoothed with a 5x5 Gaussian and resampled by
/// scale_factor (dimensions ceil(previous * scale_factor)). Masks shrink
/// conservatively: a coarse pixel is valid only if every fine pixel under
/// its smoothing + resampling footprint is valid.
struct PyramidLevel {
    ScalarImage image;
    BinaryMask mask;
};

struct Pyramid {
    std::vector<PyramidLevel> levels;  // [0] = full resolution
    double scale_factor = 0.5;

    int num_levels() const { return static_cast<int>(levels.size()); }
};

/// Builds at most `levels` levels; stops early (auto-reduction, not an error)
/// once the next level would fall below 32x32. levels must be >= 1.
Pyramid build_pyramid(const ScalarImage& img, const BinaryMask& mask, int levels,
                      double scale_factor);

/// 5x5 Gaussian smoothing with clamped borders; sigma is picked from the
/// scale factor so the follow-up resampling stays alias-free. Exposed for
/// tests.
ScalarImage gaussian5_smooth(const ScalarImage& img, double scale_factor);

/// Same separable 5x5 pass with an explicit sigma.
ScalarImage gaussian5_smooth_sigma(const ScalarImage& img, double sigma);

}  // namespace fetreg
