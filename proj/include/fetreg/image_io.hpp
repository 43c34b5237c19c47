#pragma once

#include <filesystem>

#include "fetreg/image.hpp"

namespace fetreg {

/// Load an 8- or 16-bit grayscale image (binary PGM "P5" or grayscale PNG).
/// Integer sample s with file maximum M maps to s/M. Throws IoError with the
/// path and reason on missing files, unsupported formats or corrupt headers.
ScalarImage load_image(const std::filesystem::path& path);

/// Write a binary PGM (P5). depth selects 8- or 16-bit samples; values are
/// quantized with round-half-up so results are identical across platforms.
/// Round-trip error per pixel is at most 1/(2^depth - 1).
void save_image(const ScalarImage& img, const std::filesystem::path& path, int depth = 16);

/// Write an 8-bit RGB PNG from interleaved row-major data (3 bytes per pixel).
void save_png_rgb(const std::vector<std::uint8_t>& rgb, int width, int height,
                  const std::filesystem::path& path);

}  // namespace fetreg
