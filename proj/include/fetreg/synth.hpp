#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fetreg/affine.hpp"
#include "fetreg/image.hpp"

namespace fetreg {

/// Smooth camera trajectory over the latent scene. The scope moves at
/// constant speed translation_px_per_frame along a slowly wandering heading
/// (reflected at the safe-region boundary), while rotation and log-scale
/// follow bounded sinusoids whose per-frame rates match the configured
/// amounts.
struct TrajectoryConfig {
    double translation_px_per_frame = 2.0;
    double rotation_deg_per_frame = 0.15;
    double scale_per_frame = 1.0005;  // multiplicative rate, 1.0 = no zoom
    /// Heading wander half-amplitude in radians; 0 gives a straight path.
    double heading_wiggle = 1.2;
    /// Initial heading in degrees; NaN draws it from the seed.
    double initial_heading_deg = std::numeric_limits<double>::quiet_NaN();
};

struct SynthConfig {
    std::uint64_t seed = 1;
    int canvas = 1024;  // latent scene side
    int frame = 448;    // view side
    int n_frames = 20;
    int n_vessels = 12;
    double vessel_width_min = 3.0;
    double vessel_width_max = 9.0;
    TrajectoryConfig trajectory;
    double noise_sigma = 0.0;    // additive Gaussian noise on frames
    double occluder_rate = 0.0;  // per-frame spawn probability of a drifting blob

    void validate() const;  // throws on inconsistent values
};

/// Latent canvases: the composite scene (textured background with bright
/// vessels) and the vessel-only raster used as the probability-map source.
struct SynthScene {
    ScalarImage frame_canvas;
    ScalarImage vessel_canvas;
};

struct RenderedView {
    ScalarImage frame;
    ScalarImage prob_map;
};

struct SynthSequence {
    std::vector<ScalarImage> frames;
    std::vector<ScalarImage> prob_maps;
    /// gt_pairwise[k] maps frame k+1 coordinates into frame k coordinates.
    std::vector<AffineTransform> gt_pairwise;
    BinaryMask visibility;
    /// Exact view transforms (frame k coordinates -> canvas coordinates).
    std::vector<AffineTransform> views;
};

/// Deterministic function of cfg.seed: branching quadratic-spline vessels
/// with Gaussian cross-sections over value-noise background.
ScalarImage generate_scene(const SynthConfig& cfg);
SynthScene generate_scene_canvases(const SynthConfig& cfg);

/// Sample one view of the scene. `view` maps frame coordinates into canvas
/// coordinates; pixels outside `visibility` are zero. noise_sigma adds
/// Gaussian noise (keyed by noise_key) to the frame only; the probability
/// map stays clean.
RenderedView render_view(const SynthScene& scene, const AffineTransform& view, int frame_size,
                         const BinaryMask& visibility, double noise_sigma = 0.0,
                         std::uint64_t noise_key = 0);

/// Full synthetic sequence with exact ground-truth transforms. Throws if the
/// configured trajectory would break the >= 50% consecutive-overlap
/// guarantee of the circular field of view.
SynthSequence generate_sequence(const SynthConfig& cfg);

}  // namespace fetreg
