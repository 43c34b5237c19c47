#include <doctest.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "fetreg/error.hpp"
#include "fetreg/image_io.hpp"
#include "fetreg/mosaic.hpp"
#include "fetreg/warp.hpp"
#include "helpers.hpp"

using namespace fetreg;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<AffineTransform> unit_steps(int n_pairs, double tx, double ty) {
    return std::vector<AffineTransform>(static_cast<std::size_t>(n_pairs),
                                        AffineTransform::translation(tx, ty));
}

struct Rgb {
    int width = 0, height = 0;
    std::vector<std::uint8_t> data;  // interleaved
};

Rgb read_rgb_png(const std::filesystem::path& path) {
    std::FILE* fp = std::fopen(path.string().c_str(), "rb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_read_info(png, info);
    Rgb out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    REQUIRE(png_get_color_type(png, info) == PNG_COLOR_TYPE_RGB);
    REQUIRE(png_get_bit_depth(png, info) == 8);
    out.data.resize(static_cast<std::size_t>(out.width) * out.height * 3);
    for (int y = 0; y < out.height; ++y) {
        png_read_row(png, out.data.data() + static_cast<std::size_t>(y) * out.width * 3, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return out;
}

}  // namespace

TEST_SUITE("mosaic") {

TEST_CASE("chain of a single frame") {
    const TransformChain chain = chain_transforms({}, 0);
    REQUIRE(chain.absolute.size() == 1);
    CHECK(chain.absolute[0].tx == 0.0);
    CHECK(chain.absolute[0].a11 == 1.0);
}

TEST_CASE("chain accumulates translations") {
    const TransformChain chain = chain_transforms(unit_steps(3, 1, 0), 0);
    REQUIRE(chain.absolute.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(chain.absolute[k].tx == doctest::Approx(k));
}

TEST_CASE("chain with a center reference") {
    // Hand-composed oracle: with pairwise translate(1,0) and reference 2 the
    // absolute translations are -2,-1,0,1.
    const TransformChain chain = chain_transforms(unit_steps(3, 1, 0), 2);
    const double expect[4] = {-2.0, -1.0, 0.0, 1.0};
    for (int k = 0; k < 4; ++k) CHECK(chain.absolute[k].tx == doctest::Approx(expect[k]));
    CHECK(chain.absolute[2].tx == 0.0);
    CHECK(chain.absolute[2].a11 == 1.0);
}

TEST_CASE("chain rejects out-of-range reference") {
    CHECK_THROWS_AS(chain_transforms(unit_steps(3, 1, 0), 4), Error);
    CHECK_THROWS_AS(chain_transforms(unit_steps(3, 1, 0), -1), Error);
}

TEST_CASE("relative transforms are reference-invariant") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> lin(-0.02, 0.02);
    std::uniform_real_distribution<double> tr(-8.0, 8.0);
    std::vector<AffineTransform> pairwise;
    for (int i = 0; i < 6; ++i) {
        pairwise.push_back(AffineTransform::from_params(1 + lin(rng), lin(rng), lin(rng),
                                                        1 + lin(rng), tr(rng), tr(rng)));
    }
    const TransformChain a = chain_transforms(pairwise, 0);
    const TransformChain b = chain_transforms(pairwise, 4);
    for (std::size_t j = 0; j < a.absolute.size(); ++j) {
        for (std::size_t k = 0; k < a.absolute.size(); ++k) {
            const AffineTransform ra = compose(invert(a.absolute[j]), a.absolute[k]);
            const AffineTransform rb = compose(invert(b.absolute[j]), b.absolute[k]);
            CHECK(std::abs(ra.a11 - rb.a11) < 1e-9);
            CHECK(std::abs(ra.a12 - rb.a12) < 1e-9);
            CHECK(std::abs(ra.tx - rb.tx) < 1e-9);
            CHECK(std::abs(ra.ty - rb.ty) < 1e-9);
        }
    }
}

TEST_CASE("canvas of a single identity frame") {
    const CanvasSpec spec = compute_canvas(448, 448, chain_transforms({}, 0));
    CHECK(spec.width == 448);
    CHECK(spec.height == 448);
    CHECK(spec.offset_x == 0.0);
    CHECK(spec.offset_y == 0.0);
}

TEST_CASE("canvas grows with a translated second frame") {
    const CanvasSpec spec = compute_canvas(448, 448, chain_transforms(unit_steps(1, 100, 0), 0));
    CHECK(spec.width == 548);
    CHECK(spec.height == 448);
}

TEST_CASE("canvas of a rotated frame matches the corner-geometry oracle") {
    const int s = 101;
    const double c = (s - 1) / 2.0;
    std::vector<AffineTransform> pairwise{similarity_about(kPi / 4.0, 1.0, c, c)};
    const CanvasSpec spec = compute_canvas(s, s, chain_transforms(pairwise, 0));

    // Oracle: transform the corner pixel centers directly, round outward.
    double min_x = 0, max_x = s - 1, min_y = 0, max_y = s - 1;
    const double xs[4] = {0, double(s - 1), double(s - 1), 0};
    const double ys[4] = {0, 0, double(s - 1), double(s - 1)};
    const AffineTransform rot = pairwise[0];
    for (int i = 0; i < 4; ++i) {
        const auto p = rot(xs[i], ys[i]);
        min_x = std::min(min_x, p[0]);
        max_x = std::max(max_x, p[0]);
        min_y = std::min(min_y, p[1]);
        max_y = std::max(max_y, p[1]);
    }
    CHECK(spec.width == static_cast<int>(std::ceil(max_x) - std::floor(min_x)) + 1);
    CHECK(spec.height == static_cast<int>(std::ceil(max_y) - std::floor(min_y)) + 1);
    // and is about sqrt(2) times the frame side
    CHECK(spec.width >= static_cast<int>(s * std::sqrt(2.0)) - 1);
    CHECK(spec.width <= static_cast<int>(s * std::sqrt(2.0)) + 2);
}

TEST_CASE("oversized canvases are rejected as degenerate chains") {
    CHECK_THROWS_AS(compute_canvas(448, 448, chain_transforms(unit_steps(1, 9000, 0), 0)),
                    DegenerateChainError);
    CHECK_THROWS_AS(compute_canvas(448, 448, chain_transforms(unit_steps(1, 500, 0), 0), 600),
                    DegenerateChainError);
}

TEST_CASE("single-frame mosaic reproduces the frame") {
    const ScalarImage img = testutil::random_image(64, 64, 6);
    const BinaryMask mask = default_fov_mask(64, 64);
    const Mosaic m = blend({img}, {mask}, chain_transforms({}, 0));
    const ScalarImage out = m.rendered();
    REQUIRE(out.width() == 64);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * 64 + x;
            if (m.count[i] > 0) {
                CHECK(out.at(x, y) == doctest::Approx(img.at(x, y)).epsilon(1e-15));
            } else {
                CHECK(out.at(x, y) == 0.0);
            }
        }
    }
}

TEST_CASE("two identical aligned frames blend to the frame") {
    const ScalarImage img = testutil::random_image(48, 48, 7);
    const BinaryMask mask(48, 48, true);
    const Mosaic m = blend({img, img}, {mask, mask}, chain_transforms(unit_steps(1, 0, 0), 0));
    const ScalarImage out = m.rendered();
    for (int y = 0; y < 47; ++y) {
        for (int x = 0; x < 47; ++x) {
            CHECK(out.at(x, y) == doctest::Approx(img.at(x, y)).epsilon(1e-15));
        }
    }
}

TEST_CASE("overlap of 0.2 and 0.8 renders exactly 0.5") {
    const ScalarImage a(32, 32, 0.2);
    const ScalarImage b(32, 32, 0.8);
    const BinaryMask mask(32, 32, true);
    const Mosaic m = blend({a, b}, {mask, mask}, chain_transforms(unit_steps(1, 10, 0), 0));
    const ScalarImage out = m.rendered();
    bool saw_overlap = false;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * m.width + x;
            if (m.count[i] == 2) {
                CHECK(out.at(x, y) == 0.5);
                saw_overlap = true;
            }
        }
    }
    CHECK(saw_overlap);
}

TEST_CASE("blending is order-invariant") {
    std::vector<ScalarImage> frames;
    std::vector<BinaryMask> masks;
    for (unsigned s = 0; s < 3; ++s) {
        frames.push_back(testutil::random_image(40, 40, 100 + s));
        masks.push_back(default_fov_mask(40, 40));
    }
    std::vector<AffineTransform> pairwise{AffineTransform::translation(5.5, 1.25),
                                          AffineTransform::translation(-3.25, 4.0)};
    const TransformChain fwd = chain_transforms(pairwise, 0);

    // Reversed frame order with the matching chain: absolute transforms are
    // the same set, attached to the same images.
    TransformChain rev = fwd;
    std::reverse(rev.absolute.begin(), rev.absolute.end());
    std::vector<ScalarImage> rframes(frames.rbegin(), frames.rend());
    std::vector<BinaryMask> rmasks(masks.rbegin(), masks.rend());

    const ScalarImage a = blend(frames, masks, fwd).rendered();
    const ScalarImage b = blend(rframes, rmasks, rev).rendered();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a.data()[i] - b.data()[i]) < 1e-12);
    }
}

TEST_CASE("rendered values stay in [0,1]") {
    std::vector<ScalarImage> frames;
    std::vector<BinaryMask> masks;
    for (unsigned s = 0; s < 4; ++s) {
        frames.push_back(testutil::random_image(32, 32, 200 + s));
        masks.push_back(BinaryMask(32, 32, true));
    }
    const Mosaic m =
        blend(frames, masks, chain_transforms(unit_steps(3, 2.5, -1.5), 1));
    for (double v : m.rendered().data()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("render writes the mosaic and a two-outline annotation") {
    testutil::TempDir dir;
    const ScalarImage img = testutil::random_image(64, 64, 8);
    const BinaryMask mask(64, 64, true);
    const Mosaic m =
        blend({img, img}, {mask, mask}, chain_transforms(unit_steps(1, 20, 6), 0));
    render(m, dir / "mosaic.pgm", true);

    const ScalarImage back = load_image(dir / "mosaic.pgm");
    const ScalarImage direct = m.rendered();
    REQUIRE(back.size() == direct.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(std::abs(back.data()[i] - direct.data()[i]) <= 1.0 / 65535.0);
    }

    // Count-outlines oracle: exactly two colored quadrilateral outlines,
    // pure blue for the first frame and pure red for the last; every other
    // pixel stays gray.
    const std::filesystem::path annotated = dir / "mosaic_annotated.png";
    REQUIRE(std::filesystem::exists(annotated));
    const Rgb png = read_rgb_png(annotated);
    long n_blue = 0, n_red = 0, n_other = 0;
    for (std::size_t i = 0; i < png.data.size(); i += 3) {
        const int r = png.data[i], g = png.data[i + 1], b = png.data[i + 2];
        if (r == g && g == b) continue;  // gray mosaic content
        if (r == 0 && g == 0 && b == 255) ++n_blue;
        else if (r == 255 && g == 0 && b == 0) ++n_red;
        else ++n_other;
    }
    CHECK(n_other == 0);
    // A 64x64 frame outline covers roughly its 4*63 px perimeter; the red
    // outline may overdraw part of the blue one where they cross.
    CHECK(n_blue >= 200);
    CHECK(n_blue <= 300);
    CHECK(n_red >= 200);
    CHECK(n_red <= 300);
}

}  // TEST_SUITE
