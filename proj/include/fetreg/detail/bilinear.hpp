#pragma once

#include <cmath>

#include "fetreg/image.hpp"

namespace fetreg::detail {

/// Bilinear sample of img at (sx,sy) with the strict validity rule: the
/// sample is valid only if all four interpolation neighbors lie inside the
/// image and inside mask. Pixel centers sit at integer coordinates.
/// Returns false (and leaves value untouched) when invalid.
inline bool sample_bilinear(const ScalarImage& img, const BinaryMask& mask, double sx, double sy,
                            double& value) {
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const int x1 = x0 + 1;
    const int y1 = y0 + 1;
    if (x0 < 0 || y0 < 0 || x1 >= img.width() || y1 >= img.height()) return false;
    if (!mask.at(x0, y0) || !mask.at(x1, y0) || !mask.at(x0, y1) || !mask.at(x1, y1)) return false;

    const double fx = sx - x0;
    const double fy = sy - y0;
    const double v00 = img.at(x0, y0), v10 = img.at(x1, y0);
    const double v01 = img.at(x0, y1), v11 = img.at(x1, y1);
    const double top = v00 + fx * (v10 - v00);
    const double bot = v01 + fx * (v11 - v01);
    value = top + fy * (bot - top);
    return true;
}

/// Same as sample_bilinear but also returns the exact partial derivatives of
/// the interpolated surface with respect to sx and sy (the per-cell forward
/// differences blended across the cell). These are the derivatives the
/// photometric cost actually has, so analytic Jacobians built from them match
/// finite differences of the residuals to rounding error.
inline bool sample_bilinear_grad(const ScalarImage& img, const BinaryMask& mask, double sx,
                                 double sy, double& value, double& gx, double& gy) {
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const int x1 = x0 + 1;
    const int y1 = y0 + 1;
    if (x0 < 0 || y0 < 0 || x1 >= img.width() || y1 >= img.height()) return false;
    if (!mask.at(x0, y0) || !mask.at(x1, y0) || !mask.at(x0, y1) || !mask.at(x1, y1)) return false;

    const double fx = sx - x0;
    const double fy = sy - y0;
    const double v00 = img.at(x0, y0), v10 = img.at(x1, y0);
    const double v01 = img.at(x0, y1), v11 = img.at(x1, y1);
    const double top = v00 + fx * (v10 - v00);
    const double bot = v01 + fx * (v11 - v01);
    value = top + fy * (bot - top);
    gx = (1.0 - fy) * (v10 - v00) + fy * (v11 - v01);
    gy = bot - top;
    return true;
}

/// Bilinear sample with coordinates clamped into the image; ignores masks.
/// Used for pyramid resampling where the footprint may poke half a pixel
/// past the last row/column.
inline double sample_bilinear_clamped(const ScalarImage& img, double sx, double sy) {
    sx = std::min(std::max(sx, 0.0), static_cast<double>(img.width() - 1));
    sy = std::min(std::max(sy, 0.0), static_cast<double>(img.height() - 1));
    const int x0 = std::min(static_cast<int>(std::floor(sx)), img.width() - 1);
    const int y0 = std::min(static_cast<int>(std::floor(sy)), img.height() - 1);
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    const double top = img.at(x0, y0) + fx * (img.at(x1, y0) - img.at(x0, y0));
    const double bot = img.at(x0, y1) + fx * (img.at(x1, y1) - img.at(x0, y1));
    return top + fy * (bot - top);
}

}  // namespace fetreg::detail
