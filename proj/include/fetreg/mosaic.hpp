#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fetreg/affine.hpp"
#include "fetreg/image.hpp"

namespace fetreg {

/// Per-frame absolute transforms into a chosen reference frame.
/// absolute[reference_index] is the identity.
struct TransformChain {
    std::vector<AffineTransform> absolute;
    int reference_index = 0;
};

/// Accumulation canvas for average-probability blending. Canvas pixel (x,y)
/// corresponds to reference-frame coordinates (x + offset_x, y + offset_y).
/// Rendered value is sum/count where count > 0, else 0.
struct Mosaic {
    int width = 0;
    int height = 0;
    double offset_x = 0.0;
    double offset_y = 0.0;
    std::vector<double> sum;         // row-major accumulated probabilities
    std::vector<std::int32_t> count;  // contributing frames per pixel

    /// Frame outlines in canvas coordinates (corner pixel centers of the
    /// first and last frames), kept for annotated rendering.
    std::array<std::array<double, 2>, 4> first_frame_quad{};
    std::array<std::array<double, 2>, 4> last_frame_quad{};

    ScalarImage rendered() const;
};

struct CanvasSpec {
    int width = 0;
    int height = 0;
    double offset_x = 0.0;
    double offset_y = 0.0;
};

/// Accumulate pairwise transforms (entry k maps frame k+1 coordinates into
/// frame k coordinates) into absolute transforms relative to reference_index.
TransformChain chain_transforms(const std::vector<AffineTransform>& pairwise,
                                int reference_index);

/// Axis-aligned bounding box of all frames' transformed corner pixel
/// centers, rounded outward. Throws DegenerateChainError if either dimension
/// exceeds max_dim.
CanvasSpec compute_canvas(int frame_width, int frame_height, const TransformChain& chain,
                          int max_dim = 8192);

/// Warp every frame into canvas coordinates and average overlapping
/// probabilities per pixel.
Mosaic blend(const std::vector<ScalarImage>& frames, const std::vector<BinaryMask>& visibility,
             const TransformChain& chain, int max_dim = 8192);

/// Write the rendered mosaic as 16-bit PGM at `path`. With annotate, also
/// write <path stem>_annotated.png with the first frame outlined in blue and
/// the last frame in red.
void render(const Mosaic& m, const std::filesystem::path& path, bool annotate);

}  // namespace fetreg
