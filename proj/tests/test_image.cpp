#include <doctest.h>
#include <png.h>

#include <cstdio>
#include <fstream>

#include "fetreg/error.hpp"
#include "fetreg/image.hpp"
#include "fetreg/image_io.hpp"
#include "helpers.hpp"

using namespace fetreg;
using testutil::TempDir;

namespace {

void write_raw(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_gray_png(const std::filesystem::path& path, int width, int height,
                    const std::vector<std::uint8_t>& gray) {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(gray.data() + static_cast<std::size_t>(y) * width));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace

TEST_SUITE("image") {

TEST_CASE("scalar image invariants") {
    CHECK_THROWS_AS(ScalarImage(0, 4), Error);
    CHECK_THROWS_AS(ScalarImage(4, 0), Error);
    CHECK_THROWS_AS(ScalarImage(2, 2, 1.5), Error);
    CHECK_THROWS_AS(ScalarImage(2, 2, std::vector<double>{0.0, 0.5}), Error);
    CHECK_THROWS_AS(ScalarImage(2, 1, std::vector<double>{0.0, 1.2}), Error);
    const ScalarImage img(3, 2, 0.25);
    CHECK(img.size() == 6);
    CHECK(img.at(2, 1) == 0.25);
}

TEST_CASE("16-bit pgm max sample maps to 1") {
    TempDir dir;
    // 1x1, maxval 65535, sample 0xFFFF.
    write_raw(dir / "a.pgm", std::string("P5\n1 1\n65535\n") + '\xff' + '\xff');
    const ScalarImage img = load_image(dir / "a.pgm");
    CHECK(img.width() == 1);
    CHECK(img.at(0, 0) == 1.0);
}

TEST_CASE("8-bit pgm min and mid samples") {
    TempDir dir;
    write_raw(dir / "b.pgm", std::string("P5\n2 1\n255\n") + '\x00' + '\x80');
    const ScalarImage img = load_image(dir / "b.pgm");
    CHECK(img.at(0, 0) == 0.0);
    // Hand-computed scaling: 128/255.
    CHECK(img.at(1, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
}

TEST_CASE("pgm header with comments and arbitrary maxval") {
    TempDir dir;
    write_raw(dir / "c.pgm", std::string("P5\n# comment line\n 2 1 # dims\n100\n") + '\x32' + '\x64');
    const ScalarImage img = load_image(dir / "c.pgm");
    CHECK(img.at(0, 0) == doctest::Approx(0.5));
    CHECK(img.at(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("load errors carry the path") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(load_image(dir / "missing.pgm"),
                         doctest::Contains("missing.pgm"), IoError);
    write_raw(dir / "bad.pgm", "P5\nnot a number\n");
    CHECK_THROWS_AS(load_image(dir / "bad.pgm"), IoError);
    write_raw(dir / "trunc.pgm", "P5\n4 4\n255\nxx");
    CHECK_THROWS_AS(load_image(dir / "trunc.pgm"), IoError);
    write_raw(dir / "weird.bin", "GIF89a");
    CHECK_THROWS_AS(load_image(dir / "weird.bin"), IoError);
    write_raw(dir / "huge.pgm", "P5\n1 1\n70000\n..");
    CHECK_THROWS_AS(load_image(dir / "huge.pgm"), IoError);
}

TEST_CASE("save round-trip within quantization") {
    TempDir dir;
    const ScalarImage img = testutil::random_image(17, 13, 7);
    for (int depth : {8, 16}) {
        const auto path = dir / ("rt" + std::to_string(depth) + ".pgm");
        save_image(img, path, depth);
        const ScalarImage back = load_image(path);
        REQUIRE(back.width() == img.width());
        const double bound = 1.0 / (depth == 16 ? 65535.0 : 255.0);
        for (std::size_t i = 0; i < img.size(); ++i) {
            CHECK(std::abs(back.data()[i] - img.data()[i]) <= bound);
        }
    }
}

TEST_CASE("save rounds half up") {
    TempDir dir;
    const ScalarImage img(1, 1, 0.5);
    save_image(img, dir / "half.pgm", 8);
    std::ifstream in(dir / "half.pgm", std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // 0.5 * 255 = 127.5 -> 128.
    CHECK(static_cast<unsigned char>(content.back()) == 128);
}

TEST_CASE("save rejects bad depth and path") {
    const ScalarImage img(2, 2, 0.5);
    CHECK_THROWS_AS(save_image(img, "/nonexistent_dir_xyz/out.pgm", 16), IoError);
    TempDir dir;
    CHECK_THROWS_AS(save_image(img, dir / "x.pgm", 12), IoError);
}

TEST_CASE("grayscale png load") {
    TempDir dir;
    write_gray_png(dir / "g.png", 3, 2, {0, 64, 128, 192, 255, 32});
    const ScalarImage img = load_image(dir / "g.png");
    CHECK(img.width() == 3);
    CHECK(img.height() == 2);
    CHECK(img.at(0, 0) == 0.0);
    CHECK(img.at(1, 0) == doctest::Approx(64.0 / 255.0));
    CHECK(img.at(1, 1) == doctest::Approx(255.0 / 255.0));
}

TEST_CASE("binarize thresholds and boundary") {
    const ScalarImage a(4, 4, 0.7);
    CHECK(binarize(a, 0.5).count() == 16);
    const ScalarImage b(4, 4, 0.3);
    CHECK(binarize(b, 0.5).count() == 0);
    const ScalarImage c(4, 4, 0.5);
    CHECK(binarize(c, 0.5).count() == 16);  // >= convention
    CHECK_THROWS_AS(binarize(a, 0.0), Error);
    CHECK_THROWS_AS(binarize(a, 1.0), Error);
    CHECK_THROWS_AS(binarize(a, -3.0), Error);
}

TEST_CASE("binarize is monotone in the threshold") {
    const ScalarImage img = testutil::random_image(32, 32, 11);
    const BinaryMask lo = binarize(img, 0.3);
    const BinaryMask hi = binarize(img, 0.6);
    for (std::size_t i = 0; i < img.size(); ++i) {
        if (hi.data()[i]) CHECK(lo.data()[i]);  // raising the threshold never adds pixels
    }
}

}  // TEST_SUITE
