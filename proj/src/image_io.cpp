#include "fetreg/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "fetreg/error.hpp"

namespace fetreg {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& reason) {
    throw IoError("cannot load '" + path.string() + "': " + reason);
}

// Skips PGM whitespace and '#' comment lines, then reads one unsigned integer.
bool read_pgm_token(std::istream& in, unsigned long& value) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) return false;
    value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + static_cast<unsigned long>(c - '0');
        if (value > 1u << 30) return false;
        c = in.get();
    }
    // The single whitespace byte after maxval was just consumed.
    return c == EOF || std::isspace(c);
}

ScalarImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");

    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') fail(path, "not a binary PGM (P5)");

    unsigned long width = 0, height = 0, maxval = 0;
    if (!read_pgm_token(in, width) || !read_pgm_token(in, height) || !read_pgm_token(in, maxval)) {
        fail(path, "corrupt PGM header");
    }
    if (width == 0 || height == 0) fail(path, "corrupt PGM header: zero dimension");
    if (maxval == 0 || maxval > 65535) {
        fail(path, "corrupt PGM header: maxval " + std::to_string(maxval));
    }

    const std::size_t n = static_cast<std::size_t>(width) * height;
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) fail(path, "truncated pixel data");

    std::vector<double> data(n);
    const double scale = 1.0 / static_cast<double>(maxval);
    if (bytes == 1) {
        for (std::size_t i = 0; i < n; ++i) data[i] = raw[i] * scale;
    } else {
        // PGM 16-bit samples are big-endian.
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned s = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
            data[i] = s * scale;
        }
    }
    for (double& v : data) {
        if (v > 1.0) fail(path, "sample exceeds declared maxval");
    }
    return ScalarImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

ScalarImage load_png(const std::filesystem::path& path) {
    PngReader r;
    r.fp = std::fopen(path.string().c_str(), "rb");
    if (!r.fp) fail(path, "cannot open file");

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, r.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        fail(path, "not a PNG file");
    }

    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) fail(path, "libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) fail(path, "libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) fail(path, "corrupt PNG data");

    png_init_io(r.png, r.fp);
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    const png_uint_32 width = png_get_image_width(r.png, r.info);
    const png_uint_32 height = png_get_image_height(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);
    int bit_depth = png_get_bit_depth(r.png, r.info);

    if (color_type != PNG_COLOR_TYPE_GRAY) {
        fail(path, "unsupported format: only grayscale PNG is accepted");
    }
    if (bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(r.png);
        bit_depth = 8;
    }
    png_read_update_info(r.png, r.info);

    const int bytes = bit_depth == 16 ? 2 : 1;
    const double scale = 1.0 / (bit_depth == 16 ? 65535.0 : 255.0);
    std::vector<unsigned char> row(static_cast<std::size_t>(width) * bytes);
    std::vector<double> data(static_cast<std::size_t>(width) * height);
    for (png_uint_32 y = 0; y < height; ++y) {
        png_read_row(r.png, row.data(), nullptr);
        double* out = data.data() + static_cast<std::size_t>(y) * width;
        if (bytes == 1) {
            for (png_uint_32 x = 0; x < width; ++x) out[x] = row[x] * scale;
        } else {
            // PNG 16-bit samples are big-endian in the byte stream.
            for (png_uint_32 x = 0; x < width; ++x) {
                out[x] = ((static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1]) * scale;
            }
        }
    }
    png_read_end(r.png, nullptr);
    return ScalarImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

bool has_extension(const std::filesystem::path& path, const char* ext) {
    std::string e = path.extension().string();
    for (char& c : e) c = static_cast<char>(std::tolower(c));
    return e == ext;
}

}  // namespace

ScalarImage load_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(path, "no such file");
    if (has_extension(path, ".png")) return load_png(path);
    if (has_extension(path, ".pgm")) return load_pgm(path);
    // No recognised extension: sniff the first bytes.
    std::ifstream probe(path, std::ios::binary);
    char head[2] = {0, 0};
    probe.read(head, 2);
    if (head[0] == 'P' && head[1] == '5') return load_pgm(path);
    if (static_cast<unsigned char>(head[0]) == 0x89 && head[1] == 'P') return load_png(path);
    fail(path, "unsupported format (expected binary PGM or grayscale PNG)");
}

void save_image(const ScalarImage& img, const std::filesystem::path& path, int depth) {
    if (depth != 8 && depth != 16) {
        throw IoError("save_image depth must be 8 or 16, got " + std::to_string(depth));
    }
    if (img.width() <= 0 || img.height() <= 0) {
        throw IoError("cannot save empty image to '" + path.string() + "'");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "': cannot open for writing");

    const unsigned maxval = depth == 16 ? 65535u : 255u;
    out << "P5\n" << img.width() << " " << img.height() << "\n" << maxval << "\n";

    const auto& data = img.data();
    std::vector<unsigned char> raw(data.size() * (depth == 16 ? 2 : 1));
    for (std::size_t i = 0; i < data.size(); ++i) {
        // Round half up for bit-exact reproducibility.
        const unsigned s = static_cast<unsigned>(std::floor(data[i] * maxval + 0.5));
        if (depth == 16) {
            raw[2 * i] = static_cast<unsigned char>(s >> 8);
            raw[2 * i + 1] = static_cast<unsigned char>(s & 0xFF);
        } else {
            raw[i] = static_cast<unsigned char>(s);
        }
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("cannot write '" + path.string() + "': write failed");
}

void save_png_rgb(const std::vector<std::uint8_t>& rgb, int width, int height,
                  const std::filesystem::path& path) {
    if (width <= 0 || height <= 0 ||
        rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        throw IoError("save_png_rgb: data length does not match dimensions");
    }
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw IoError("cannot write '" + path.string() + "': cannot open for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw IoError("cannot write '" + path.string() + "': libpng failure");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace fetreg
