#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "fetreg/image.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("fetreg_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline fetreg::ScalarImage random_image(int width, int height, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> data(static_cast<std::size_t>(width) * height);
    for (double& v : data) v = dist(rng);
    return fetreg::ScalarImage(width, height, std::move(data));
}

inline fetreg::BinaryMask random_mask(int width, int height, unsigned seed, double p_true = 0.5) {
    std::mt19937 rng(seed);
    std::bernoulli_distribution dist(p_true);
    fetreg::BinaryMask m(width, height);
    for (auto& v : m.data()) v = dist(rng) ? 1 : 0;
    return m;
}

/// Random image smoothed by box passes; has structure at the pixel scale but
/// no white-noise roughness.
inline fetreg::ScalarImage smooth_random_image(int width, int height, unsigned seed,
                                               int passes = 2) {
    fetreg::ScalarImage img = random_image(width, height, seed);
    for (int p = 0; p < passes; ++p) {
        fetreg::ScalarImage out(width, height, 0.0);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                double acc = 0.0;
                int n = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int sx = x + dx, sy = y + dy;
                        if (sx < 0 || sy < 0 || sx >= width || sy >= height) continue;
                        acc += img.at(sx, sy);
                        ++n;
                    }
                }
                out.set(x, y, acc / n);
            }
        }
        img = std::move(out);
    }
    return img;
}

}  // namespace testutil
