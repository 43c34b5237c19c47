#pragma once

#include "fetreg/affine.hpp"
#include "fetreg/image.hpp"

namespace fetreg {

/// Warped image plus per-pixel validity. Pixels whose source sample fell
/// outside the image or the source visibility mask carry value 0 and
/// validity false.
struct WarpResult {
    ScalarImage image;
    BinaryMask validity;
};

/// Inverse warp: iterates over output pixels (x,y) and samples src at T(x,y)
/// with bilinear interpolation. T therefore maps output coordinates into
/// source coordinates. A pixel is valid only if all four interpolation
/// neighbors are inside src and inside src_visibility.
WarpResult warp_image(const ScalarImage& src, const BinaryMask& src_visibility,
                      const AffineTransform& t, int out_width, int out_height);

/// Disk mask: true iff (x-cx)^2 + (y-cy)^2 <= r^2. Models the circular
/// fetoscope field of view.
BinaryMask circular_mask(int width, int height, double cx, double cy, double r);

/// Inscribed-circle visibility mask with a small margin (fraction of the
/// radius). The default 2% margin keeps the vignetted rim out.
BinaryMask default_fov_mask(int width, int height, double margin = 0.02);

/// Morphological erosion with a (2*radius+1)^2 square; pixels whose
/// neighborhood leaves the image become false.
BinaryMask erode(const BinaryMask& mask, int radius);

}  // namespace fetreg
