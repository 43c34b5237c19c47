#include "fetreg/pyramid.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fetreg/detail/bilinear.hpp"
#include "fetreg/error.hpp"
#include "fetreg/warp.hpp"

namespace fetreg {

namespace {

constexpr int kMinLevelSize = 32;
constexpr int kKernelRadius = 2;

std::array<double, 5> gaussian5_kernel(double sigma) {
    std::array<double, 5> k{};
    double sum = 0.0;
    for (int i = -kKernelRadius; i <= kKernelRadius; ++i) {
        k[i + kKernelRadius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + kKernelRadius];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Anti-aliasing sigma for downsampling by scale_factor (< 1).
double antialias_sigma(double scale_factor) {
    const double inv = 1.0 / scale_factor;
    return std::max(0.5, 0.8 * std::sqrt(inv * inv - 1.0));
}

int clamp_index(int i, int n) { return std::min(std::max(i, 0), n - 1); }

}  // namespace

ScalarImage gaussian5_smooth(const ScalarImage& img, double scale_factor) {
    return gaussian5_smooth_sigma(img, antialias_sigma(scale_factor));
}

ScalarImage gaussian5_smooth_sigma(const ScalarImage& img, double sigma) {
    const auto k = gaussian5_kernel(sigma);
    const int w = img.width(), h = img.height();
    // Separable pass, clamped borders so constants are preserved.
    std::vector<double> tmp(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -kKernelRadius; i <= kKernelRadius; ++i) {
                acc += k[i + kKernelRadius] * img.at(clamp_index(x + i, w), y);
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    ScalarImage out(w, h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -kKernelRadius; i <= kKernelRadius; ++i) {
                acc += k[i + kKernelRadius] * tmp[static_cast<std::size_t>(clamp_index(y + i, h)) * w + x];
            }
            out.set(x, y, std::clamp(acc, 0.0, 1.0));
        }
    }
    return out;
}

Pyramid build_pyramid(const ScalarImage& img, const BinaryMask& mask, int levels,
                      double scale_factor) {
    if (levels < 1) throw Error("build_pyramid: levels must be >= 1");
    if (!(scale_factor > 0.0 && scale_factor < 1.0)) {
        throw Error("build_pyramid: scale_factor must lie in (0,1)");
    }
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw Error("build_pyramid: image and mask dimensions differ");
    }

    Pyramid pyr;
    pyr.scale_factor = scale_factor;
    pyr.levels.push_back({img, mask});

    for (int l = 1; l < levels; ++l) {
        const PyramidLevel& prev = pyr.levels.back();
        const int nw = static_cast<int>(std::ceil(prev.image.width() * scale_factor));
        const int nh = static_cast<int>(std::ceil(prev.image.height() * scale_factor));
        if (nw < kMinLevelSize || nh < kMinLevelSize) break;  // auto-reduce

        const ScalarImage smoothed = gaussian5_smooth(prev.image, scale_factor);
        const BinaryMask eroded = erode(prev.mask, kKernelRadius);

        ScalarImage level(nw, nh, 0.0);
        BinaryMask level_mask(nw, nh);
        const double inv = 1.0 / scale_factor;
        for (int y = 0; y < nh; ++y) {
            for (int x = 0; x < nw; ++x) {
                const double sx = x * inv;
                const double sy = y * inv;
                level.set(x, y, std::clamp(detail::sample_bilinear_clamped(smoothed, sx, sy), 0.0, 1.0));
                // Strict AND over the (clamped) bilinear footprint.
                const int x0 = clamp_index(static_cast<int>(std::floor(sx)), eroded.width());
                const int y0 = clamp_index(static_cast<int>(std::floor(sy)), eroded.height());
                const int x1 = clamp_index(x0 + 1, eroded.width());
                const int y1 = clamp_index(y0 + 1, eroded.height());
                level_mask.set(x, y, eroded.at(x0, y0) && eroded.at(x1, y0) && eroded.at(x0, y1) &&
                                         eroded.at(x1, y1));
            }
        }
        pyr.levels.push_back({std::move(level), std::move(level_mask)});
    }
    return pyr;
}

}  // namespace fetreg
