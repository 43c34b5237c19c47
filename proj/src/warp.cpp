#include "fetreg/warp.hpp"

#include <algorithm>

#include "fetreg/detail/bilinear.hpp"
#include "fetreg/error.hpp"

namespace fetreg {

WarpResult warp_image(const ScalarImage& src, const BinaryMask& src_visibility,
                      const AffineTransform& t, int out_width, int out_height) {
    if (src.width() != src_visibility.width() || src.height() != src_visibility.height()) {
        throw Error("warp_image: source image and visibility mask dimensions differ");
    }
    WarpResult out{ScalarImage(out_width, out_height, 0.0), BinaryMask(out_width, out_height)};
    for (int y = 0; y < out_height; ++y) {
        const double row_x = t.a12 * y + t.tx;
        const double row_y = t.a22 * y + t.ty;
        for (int x = 0; x < out_width; ++x) {
            const double sx = t.a11 * x + row_x;
            const double sy = t.a21 * x + row_y;
            double v;
            if (detail::sample_bilinear(src, src_visibility, sx, sy, v)) {
                out.image.set(x, y, std::clamp(v, 0.0, 1.0));
                out.validity.set(x, y, true);
            }
        }
    }
    return out;
}

BinaryMask circular_mask(int width, int height, double cx, double cy, double r) {
    if (r <= 0.0) throw Error("circular_mask: radius must be positive");
    const double r2 = r * r;
    BinaryMask m(width, height);
    for (int y = 0; y < height; ++y) {
        const double dy2 = (y - cy) * (y - cy);
        for (int x = 0; x < width; ++x) {
            const double dx = x - cx;
            m.set(x, y, dx * dx + dy2 <= r2);
        }
    }
    return m;
}

BinaryMask default_fov_mask(int width, int height, double margin) {
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    const double r = std::min(width, height) / 2.0 * (1.0 - margin);
    return circular_mask(width, height, cx, cy, r);
}

BinaryMask erode(const BinaryMask& mask, int radius) {
    const int w = mask.width(), h = mask.height();
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool ok = true;
            for (int dy = -radius; ok && dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int sx = x + dx, sy = y + dy;
                    if (sx < 0 || sy < 0 || sx >= w || sy >= h || !mask.at(sx, sy)) {
                        ok = false;
                        break;
                    }
                }
            }
            out.set(x, y, ok);
        }
    }
    return out;
}

}  // namespace fetreg
