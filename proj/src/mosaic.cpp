#include "fetreg/mosaic.hpp"

#include <algorithm>
#include <cmath>

#include "fetreg/detail/bilinear.hpp"
#include "fetreg/error.hpp"
#include "fetreg/image_io.hpp"

namespace fetreg {

namespace {

std::array<std::array<double, 2>, 4> frame_corners(int width, int height,
                                                   const AffineTransform& t) {
    const double w = width - 1, h = height - 1;
    std::array<std::array<double, 2>, 4> corners{};
    const double xs[4] = {0.0, w, w, 0.0};
    const double ys[4] = {0.0, 0.0, h, h};
    for (int i = 0; i < 4; ++i) {
        t.apply(xs[i], ys[i], corners[i][0], corners[i][1]);
    }
    return corners;
}

// 1-px anti-clutter line rasterizer: walks the segment in sub-pixel steps and
// sets the nearest pixel.
void draw_line(std::vector<std::uint8_t>& rgb, int width, int height, double x0, double y0,
               double x1, double y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double len = std::hypot(x1 - x0, y1 - y0);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        const int px = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
        const int py = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
        if (px < 0 || py < 0 || px >= width || py >= height) continue;
        const std::size_t idx = (static_cast<std::size_t>(py) * width + px) * 3;
        rgb[idx] = r;
        rgb[idx + 1] = g;
        rgb[idx + 2] = b;
    }
}

void draw_quad(std::vector<std::uint8_t>& rgb, int width, int height,
               const std::array<std::array<double, 2>, 4>& quad, std::uint8_t r, std::uint8_t g,
               std::uint8_t b) {
    for (int i = 0; i < 4; ++i) {
        const auto& p0 = quad[i];
        const auto& p1 = quad[(i + 1) % 4];
        draw_line(rgb, width, height, p0[0], p0[1], p1[0], p1[1], r, g, b);
    }
}

}  // namespace

ScalarImage Mosaic::rendered() const {
    ScalarImage out(width, height, 0.0);
    auto& d = out.data();
    for (std::size_t i = 0; i < sum.size(); ++i) {
        if (count[i] > 0) d[i] = std::clamp(sum[i] / count[i], 0.0, 1.0);
    }
    return out;
}

TransformChain chain_transforms(const std::vector<AffineTransform>& pairwise,
                                int reference_index) {
    const int n = static_cast<int>(pairwise.size()) + 1;
    if (reference_index < 0 || reference_index >= n) {
        throw Error("chain_transforms: reference index " + std::to_string(reference_index) +
                    " out of range for " + std::to_string(n) + " frames");
    }
    TransformChain chain;
    chain.reference_index = reference_index;
    chain.absolute.assign(static_cast<std::size_t>(n), AffineTransform::identity());
    // Walk outward from the reference; pairwise[k] maps frame k+1 into frame k.
    for (int k = reference_index + 1; k < n; ++k) {
        chain.absolute[k] = compose(chain.absolute[k - 1], pairwise[k - 1]);
    }
    for (int k = reference_index - 1; k >= 0; --k) {
        chain.absolute[k] = compose(chain.absolute[k + 1], invert(pairwise[k]));
    }
    return chain;
}

CanvasSpec compute_canvas(int frame_width, int frame_height, const TransformChain& chain,
                          int max_dim) {
    if (chain.absolute.empty()) throw Error("compute_canvas: empty transform chain");
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    bool first = true;
    for (const auto& t : chain.absolute) {
        for (const auto& c : frame_corners(frame_width, frame_height, t)) {
            if (first) {
                min_x = max_x = c[0];
                min_y = max_y = c[1];
                first = false;
            } else {
                min_x = std::min(min_x, c[0]);
                max_x = std::max(max_x, c[0]);
                min_y = std::min(min_y, c[1]);
                max_y = std::max(max_y, c[1]);
            }
        }
    }
    CanvasSpec spec;
    spec.offset_x = std::floor(min_x);
    spec.offset_y = std::floor(min_y);
    spec.width = static_cast<int>(std::ceil(max_x) - spec.offset_x) + 1;
    spec.height = static_cast<int>(std::ceil(max_y) - spec.offset_y) + 1;
    if (spec.width > max_dim || spec.height > max_dim) {
        throw DegenerateChainError("degenerate chain: canvas " + std::to_string(spec.width) +
                                   "x" + std::to_string(spec.height) + " exceeds limit " +
                                   std::to_string(max_dim));
    }
    return spec;
}

Mosaic blend(const std::vector<ScalarImage>& frames, const std::vector<BinaryMask>& visibility,
             const TransformChain& chain, int max_dim) {
    if (frames.empty() || frames.size() != visibility.size() ||
        frames.size() != chain.absolute.size()) {
        throw Error("blend: frames, masks and chain must be non-empty and the same length");
    }
    const int fw = frames[0].width(), fh = frames[0].height();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].width() != fw || frames[i].height() != fh ||
            visibility[i].width() != fw || visibility[i].height() != fh) {
            throw Error("blend: all frames and masks must share dimensions");
        }
    }

    const CanvasSpec spec = compute_canvas(fw, fh, chain, max_dim);
    Mosaic m;
    m.width = spec.width;
    m.height = spec.height;
    m.offset_x = spec.offset_x;
    m.offset_y = spec.offset_y;
    m.sum.assign(static_cast<std::size_t>(spec.width) * spec.height, 0.0);
    m.count.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);

    const AffineTransform canvas_to_ref = AffineTransform::translation(m.offset_x, m.offset_y);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        // Canvas pixel -> reference coords -> frame-k coords.
        const AffineTransform sample = compose(invert(chain.absolute[k]), canvas_to_ref);
        for (int y = 0; y < m.height; ++y) {
            const double row_x = sample.a12 * y + sample.tx;
            const double row_y = sample.a22 * y + sample.ty;
            for (int x = 0; x < m.width; ++x) {
                const double sx = sample.a11 * x + row_x;
                const double sy = sample.a21 * x + row_y;
                double v;
                if (detail::sample_bilinear(frames[k], visibility[k], sx, sy, v)) {
                    const std::size_t idx = static_cast<std::size_t>(y) * m.width + x;
                    m.sum[idx] += std::clamp(v, 0.0, 1.0);
                    m.count[idx] += 1;
                }
            }
        }
    }

    const AffineTransform ref_to_canvas = AffineTransform::translation(-m.offset_x, -m.offset_y);
    m.first_frame_quad = frame_corners(fw, fh, compose(ref_to_canvas, chain.absolute.front()));
    m.last_frame_quad = frame_corners(fw, fh, compose(ref_to_canvas, chain.absolute.back()));
    return m;
}

void render(const Mosaic& m, const std::filesystem::path& path, bool annotate) {
    if (m.width <= 0 || m.height <= 0) throw Error("render: empty mosaic");
    const ScalarImage img = m.rendered();
    save_image(img, path, 16);

    if (!annotate) return;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(m.width) * m.height * 3);
    for (std::size_t i = 0; i < img.data().size(); ++i) {
        const auto v = static_cast<std::uint8_t>(std::floor(img.data()[i] * 255.0 + 0.5));
        rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = v;
    }
    draw_quad(rgb, m.width, m.height, m.first_frame_quad, 0, 0, 255);  // first: blue
    draw_quad(rgb, m.width, m.height, m.last_frame_quad, 255, 0, 0);   // last: red
    std::filesystem::path annotated = path;
    annotated.replace_extension();
    annotated += "_annotated.png";
    save_png_rgb(rgb, m.width, m.height, annotated);
}

}  // namespace fetreg
