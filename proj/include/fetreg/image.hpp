#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace fetreg {

/// 2-D grid of intensities in [0,1], row-major. Carrier for video frames and
/// vessel probability maps. Operations treat images as immutable; the mutable
/// accessors exist for construction code, which is responsible for keeping
/// values inside [0,1].
class ScalarImage {
public:
    ScalarImage() = default;
    ScalarImage(int width, int height, double fill = 0.0);
    /// Takes ownership of row-major data. Throws if the length does not match
    /// width*height or any value falls outside [0,1].
    ScalarImage(int width, int height, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    double at(int x, int y) const {
        assert(in_bounds(x, y));
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    void set(int x, int y, double v) {
        assert(in_bounds(x, y));
        data_[static_cast<std::size_t>(y) * width_ + x] = v;
    }
    bool in_bounds(int x, int y) const noexcept {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Row-major boolean mask; true marks valid/foreground pixels.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    bool at(int x, int y) const {
        assert(in_bounds(x, y));
        return data_[static_cast<std::size_t>(y) * width_ + x] != 0;
    }
    void set(int x, int y, bool v) {
        assert(in_bounds(x, y));
        data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
    }
    bool in_bounds(int x, int y) const noexcept {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    /// Number of true pixels.
    std::size_t count() const noexcept;

    const std::vector<std::uint8_t>& data() const noexcept { return data_; }
    std::vector<std::uint8_t>& data() noexcept { return data_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Threshold a probability map: output true iff p >= threshold.
/// The >= convention makes exactly-threshold pixels foreground.
/// Throws if threshold is outside the open interval (0,1).
BinaryMask binarize(const ScalarImage& p, double threshold);

}  // namespace fetreg
