#include "fetreg/image.hpp"

#include <numeric>

#include "fetreg/error.hpp"

namespace fetreg {

namespace {

void check_dims(int width, int height) {
    if (width <= 0 || height <= 0) {
        throw Error("image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
    }
}

}  // namespace

ScalarImage::ScalarImage(int width, int height, double fill)
    : width_(width), height_(height) {
    check_dims(width, height);
    if (fill < 0.0 || fill > 1.0) {
        throw Error("fill value outside [0,1]: " + std::to_string(fill));
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ScalarImage::ScalarImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw Error("image data length " + std::to_string(data_.size()) + " does not match " +
                    std::to_string(width) + "x" + std::to_string(height));
    }
    for (double v : data_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error("image value outside [0,1]: " + std::to_string(v));
        }
    }
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const noexcept {
    std::size_t n = 0;
    for (std::uint8_t v : data_) n += v != 0;
    return n;
}

BinaryMask binarize(const ScalarImage& p, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error("binarize threshold must lie in (0,1), got " + std::to_string(threshold));
    }
    BinaryMask out(p.width(), p.height());
    const auto& src = p.data();
    auto& dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] >= threshold ? 1 : 0;
    }
    return out;
}

}  // namespace fetreg
