#include "fetreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fetreg/detail/bilinear.hpp"
#include "fetreg/error.hpp"
#include "fetreg/rng.hpp"
#include "fetreg/warp.hpp"

namespace fetreg {

namespace {

// RNG stream ids; every draw below is (seed, stream, counter)-addressed so
// frames and vessels can be generated independently and reproducibly.
constexpr std::uint64_t kStreamBackground = 1;
constexpr std::uint64_t kStreamVesselBase = 100;     // + vessel index
constexpr std::uint64_t kStreamTrajectory = 50'000;
constexpr std::uint64_t kStreamOccluderBase = 60'000;  // + frame index
constexpr std::uint64_t kStreamNoiseBase = 1'000'000;  // + frame index

constexpr double kFovMargin = 0.02;
constexpr double kScaleMaxLog = 0.05;  // scale sinusoid clamp, ~ +-5%

double fov_radius(int frame) { return std::min(frame, frame) / 2.0 * (1.0 - kFovMargin); }

/// Overlap area of two radius-r disks with centers d apart, as a fraction of
/// the disk area.
double disk_overlap_fraction(double d, double r) {
    if (d >= 2.0 * r) return 0.0;
    if (d <= 0.0) return 1.0;
    const double lens =
        2.0 * r * r * std::acos(d / (2.0 * r)) - 0.5 * d * std::sqrt(4.0 * r * r - d * d);
    return lens / (std::numbers::pi * r * r);
}

/// Bilinearly interpolated lattice of uniform values: cheap smooth noise.
void add_value_noise(std::vector<double>& field, int size, const CounterRng& rng, int spacing,
                     double lo, double hi, std::uint64_t counter_base) {
    const int cells = size / spacing + 2;
    std::vector<double> lattice(static_cast<std::size_t>(cells) * cells);
    for (int i = 0; i < cells * cells; ++i) {
        lattice[static_cast<std::size_t>(i)] = rng.uniform(counter_base + i, lo, hi);
    }
    for (int y = 0; y < size; ++y) {
        const double fy = static_cast<double>(y) / spacing;
        const int y0 = static_cast<int>(fy);
        const double wy = fy - y0;
        for (int x = 0; x < size; ++x) {
            const double fx = static_cast<double>(x) / spacing;
            const int x0 = static_cast<int>(fx);
            const double wx = fx - x0;
            const double v00 = lattice[static_cast<std::size_t>(y0) * cells + x0];
            const double v10 = lattice[static_cast<std::size_t>(y0) * cells + x0 + 1];
            const double v01 = lattice[static_cast<std::size_t>(y0 + 1) * cells + x0];
            const double v11 = lattice[static_cast<std::size_t>(y0 + 1) * cells + x0 + 1];
            const double top = v00 + wx * (v10 - v00);
            const double bot = v01 + wx * (v11 - v01);
            field[static_cast<std::size_t>(y) * size + x] += top + wy * (bot - top);
        }
    }
}

struct QuadCurve {
    double x0, y0, cx, cy, x1, y1;  // quadratic Bezier control points
    double sigma;                   // Gaussian cross-section width

    void point(double t, double& px, double& py) const {
        const double u = 1.0 - t;
        px = u * u * x0 + 2.0 * u * t * cx + t * t * x1;
        py = u * u * y0 + 2.0 * u * t * cy + t * t * y1;
    }
};

/// Stamp max(value, gaussian cross-section) along the curve.
void rasterize_curve(std::vector<double>& vessel, int size, const QuadCurve& c) {
    const double approx_len =
        std::hypot(c.cx - c.x0, c.cy - c.y0) + std::hypot(c.x1 - c.cx, c.y1 - c.cy);
    const int steps = std::max(8, static_cast<int>(std::ceil(approx_len * 2.0)));
    const double reach = 3.0 * c.sigma;
    const double inv2s2 = 1.0 / (2.0 * c.sigma * c.sigma);
    for (int i = 0; i <= steps; ++i) {
        double px, py;
        c.point(static_cast<double>(i) / steps, px, py);
        const int x_lo = std::max(0, static_cast<int>(std::floor(px - reach)));
        const int x_hi = std::min(size - 1, static_cast<int>(std::ceil(px + reach)));
        const int y_lo = std::max(0, static_cast<int>(std::floor(py - reach)));
        const int y_hi = std::min(size - 1, static_cast<int>(std::ceil(py + reach)));
        for (int y = y_lo; y <= y_hi; ++y) {
            for (int x = x_lo; x <= x_hi; ++x) {
                const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
                double& v = vessel[static_cast<std::size_t>(y) * size + x];
                v = std::max(v, std::exp(-d2 * inv2s2));
            }
        }
    }
}

struct Occluder {
    int birth = 0;
    int lifetime = 0;
    double x = 0.0, y = 0.0;  // frame coords at birth
    double vx = 0.0, vy = 0.0;
    double radius = 0.0;
    double brightness = 0.0;
};

void paint_occluder(ScalarImage& frame, const Occluder& o, int age) {
    const double cx = o.x + o.vx * age;
    const double cy = o.y + o.vy * age;
    const double edge = 8.0;
    const double reach = o.radius + edge;
    const int x_lo = std::max(0, static_cast<int>(std::floor(cx - reach)));
    const int x_hi = std::min(frame.width() - 1, static_cast<int>(std::ceil(cx + reach)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(cy - reach)));
    const int y_hi = std::min(frame.height() - 1, static_cast<int>(std::ceil(cy + reach)));
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            const double d = std::hypot(x - cx, y - cy);
            const double alpha = std::clamp((o.radius + edge - d) / edge, 0.0, 1.0);
            if (alpha > 0.0) {
                frame.set(x, y, std::clamp(frame.at(x, y) * (1.0 - alpha) +
                                               o.brightness * alpha, 0.0, 1.0));
            }
        }
    }
}

/// View transform: frame coords -> canvas coords, rotation + isotropic scale
/// about the frame center, frame center placed at (cx, cy).
AffineTransform make_view(double frame_center, double cx, double cy, double theta, double s) {
    const double c = std::cos(theta) * s;
    const double sn = std::sin(theta) * s;
    AffineTransform v;
    v.a11 = c;
    v.a12 = -sn;
    v.a21 = sn;
    v.a22 = c;
    v.tx = cx - (c * frame_center - sn * frame_center);
    v.ty = cy - (sn * frame_center + c * frame_center);
    return v;
}

struct Pose {
    double cx, cy, theta, log_s;
};

/// Deterministic camera poses: constant-speed meander with boundary
/// reflection, sinusoidal rotation and log-scale.
std::vector<Pose> make_trajectory(const SynthConfig& cfg) {
    const TrajectoryConfig& tr = cfg.trajectory;
    const CounterRng rng(cfg.seed, kStreamTrajectory);

    const double center = (cfg.canvas - 1) / 2.0;
    const double r_fov = fov_radius(cfg.frame);
    const double s_max = std::exp(kScaleMaxLog);
    // The FoV disk (plus an interpolation pixel) must stay inside the canvas.
    const double safe = center - (r_fov * s_max + 4.0);
    if (safe <= 0.0) throw Error("synth: canvas too small for the frame size");

    const double tau = tr.translation_px_per_frame;
    const double rot_rate = tr.rotation_deg_per_frame * std::numbers::pi / 180.0;
    const double log_rate = std::log(tr.scale_per_frame);

    const double heading0 = std::isnan(tr.initial_heading_deg)
                                ? rng.uniform(0, 0.0, 2.0 * std::numbers::pi)
                                : tr.initial_heading_deg * std::numbers::pi / 180.0;
    const double heading_freq = 2.0 * std::numbers::pi / 90.0;  // ~90-frame wander period
    const double heading_phase = rng.uniform(1, 0.0, 2.0 * std::numbers::pi);

    const double rot_freq = std::max(tau > 0.0 ? tau / safe : 0.0, 0.008);
    const double rot_amp = rot_rate > 0.0 ? std::min(rot_rate / rot_freq, 0.5) : 0.0;
    const double rot_phase = rng.uniform(2, 0.0, 2.0 * std::numbers::pi);
    const double scale_freq = rot_freq * 1.31;
    const double scale_amp =
        log_rate != 0.0 ? std::clamp(log_rate / scale_freq, -kScaleMaxLog, kScaleMaxLog) : 0.0;
    const double scale_phase = rng.uniform(3, 0.0, 2.0 * std::numbers::pi);

    // Start off-center so short straight runs have room in every direction.
    double x = center + rng.uniform(4, -0.25, 0.25) * safe;
    double y = center + rng.uniform(5, -0.25, 0.25) * safe;

    std::vector<Pose> poses;
    poses.reserve(static_cast<std::size_t>(cfg.n_frames));
    for (int k = 0; k < cfg.n_frames; ++k) {
        poses.push_back({x, y,
                         rot_amp * std::sin(rot_freq * k + rot_phase),
                         scale_amp * std::sin(scale_freq * k + scale_phase)});
        const double heading =
            heading0 + tr.heading_wiggle * std::sin(heading_freq * k + heading_phase);
        double vx = tau * std::cos(heading);
        double vy = tau * std::sin(heading);
        double nx = x + vx, ny = y + vy;
        if (std::hypot(nx - center, ny - center) > safe && tau > 0.0) {
            // Reflect the step off the safe-disk boundary.
            const double dist = std::hypot(x - center, y - center);
            if (dist > 1e-9) {
                const double ux = (x - center) / dist, uy = (y - center) / dist;
                const double along = vx * ux + vy * uy;
                vx -= 2.0 * along * ux;
                vy -= 2.0 * along * uy;
                nx = x + vx;
                ny = y + vy;
            }
            if (std::hypot(nx - center, ny - center) > safe) {  // corner case: aim inward
                nx = x + tau * (center - x) / std::max(dist, 1.0);
                ny = y + tau * (center - y) / std::max(dist, 1.0);
            }
        }
        x = nx;
        y = ny;
    }
    return poses;
}

}  // namespace

void SynthConfig::validate() const {
    if (canvas < 64 || frame < 32) throw Error("synth: canvas/frame too small");
    if (frame > canvas) throw Error("synth: frame must not exceed canvas");
    if (n_frames < 1) throw Error("synth: n_frames must be >= 1");
    if (n_vessels < 0) throw Error("synth: n_vessels must be >= 0");
    if (!(vessel_width_min > 0.0) || vessel_width_max < vessel_width_min) {
        throw Error("synth: invalid vessel width range");
    }
    if (noise_sigma < 0.0) throw Error("synth: noise_sigma must be >= 0");
    if (occluder_rate < 0.0 || occluder_rate > 1.0) {
        throw Error("synth: occluder_rate must lie in [0,1]");
    }
    if (trajectory.translation_px_per_frame < 0.0) {
        throw Error("synth: translation amplitude must be >= 0");
    }
    if (trajectory.rotation_deg_per_frame < 0.0) throw Error("synth: rotation rate must be >= 0");
    if (!(trajectory.scale_per_frame > 0.0)) throw Error("synth: scale rate must be > 0");

    // Consecutive circular FoVs must keep >= 50% overlap.
    const double r = fov_radius(frame);
    const double d_max = trajectory.translation_px_per_frame +
                         trajectory.rotation_deg_per_frame * std::numbers::pi / 180.0 * r +
                         std::abs(std::log(trajectory.scale_per_frame)) * r;
    if (disk_overlap_fraction(d_max, r) < 0.5) {
        throw Error("synth: trajectory rates break the 50% consecutive-overlap guarantee");
    }
}

SynthScene generate_scene_canvases(const SynthConfig& cfg) {
    cfg.validate();
    const int size = cfg.canvas;
    const std::size_t n = static_cast<std::size_t>(size) * size;

    // Textured background in ~[0.15, 0.45].
    std::vector<double> bg(n, 0.0);
    const CounterRng bg_rng(cfg.seed, kStreamBackground);
    add_value_noise(bg, size, bg_rng, 64, 0.20, 0.40, 0);
    add_value_noise(bg, size, bg_rng, 16, -0.05, 0.05, 1u << 20);
    for (double& v : bg) v = std::clamp(v, 0.0, 1.0);

    // Vessel raster: each vessel depends only on (seed, index), so scenes
    // with more vessels are supersets of scenes with fewer.
    std::vector<double> vessel(n, 0.0);
    for (int v = 0; v < cfg.n_vessels; ++v) {
        const CounterRng rng(cfg.seed, kStreamVesselBase + static_cast<std::uint64_t>(v));
        const double margin = 0.08 * size;
        QuadCurve c{};
        c.x0 = rng.uniform(0, margin, size - margin);
        c.y0 = rng.uniform(1, margin, size - margin);
        const double angle = rng.uniform(2, 0.0, 2.0 * std::numbers::pi);
        const double len = rng.uniform(3, 0.3, 0.7) * size;
        c.x1 = std::clamp(c.x0 + len * std::cos(angle), 0.0, size - 1.0);
        c.y1 = std::clamp(c.y0 + len * std::sin(angle), 0.0, size - 1.0);
        const double bend = rng.uniform(4, -0.25, 0.25) * len;
        c.cx = 0.5 * (c.x0 + c.x1) - bend * std::sin(angle);
        c.cy = 0.5 * (c.y0 + c.y1) + bend * std::cos(angle);
        c.sigma = 0.5 * rng.uniform(5, cfg.vessel_width_min, cfg.vessel_width_max);
        rasterize_curve(vessel, size, c);

        if (rng.uniform(6) < 0.5) {  // one child branch from mid-curve
            QuadCurve b{};
            c.point(rng.uniform(7, 0.35, 0.75), b.x0, b.y0);
            const double bangle = angle + rng.uniform(8, 0.4, 1.1) * (rng.uniform(9) < 0.5 ? 1 : -1);
            const double blen = rng.uniform(10, 0.3, 0.6) * len;
            b.x1 = std::clamp(b.x0 + blen * std::cos(bangle), 0.0, size - 1.0);
            b.y1 = std::clamp(b.y0 + blen * std::sin(bangle), 0.0, size - 1.0);
            const double bbend = rng.uniform(11, -0.2, 0.2) * blen;
            b.cx = 0.5 * (b.x0 + b.x1) - bbend * std::sin(bangle);
            b.cy = 0.5 * (b.y0 + b.y1) + bbend * std::cos(bangle);
            b.sigma = std::max(0.5 * cfg.vessel_width_min, 0.7 * c.sigma);
            rasterize_curve(vessel, size, b);
        }
    }

    // Composite: vessels brighten toward 0.85 so they clear a 0.5 threshold.
    std::vector<double> composite(n);
    for (std::size_t i = 0; i < n; ++i) {
        composite[i] = std::clamp(bg[i] + (0.85 - bg[i]) * vessel[i], 0.0, 1.0);
    }
    SynthScene scene;
    scene.frame_canvas = ScalarImage(size, size, std::move(composite));
    scene.vessel_canvas = ScalarImage(size, size, std::move(vessel));
    return scene;
}

ScalarImage generate_scene(const SynthConfig& cfg) {
    return generate_scene_canvases(cfg).frame_canvas;
}

RenderedView render_view(const SynthScene& scene, const AffineTransform& view, int frame_size,
                         const BinaryMask& visibility, double noise_sigma,
                         std::uint64_t noise_key) {
    const BinaryMask all(scene.frame_canvas.width(), scene.frame_canvas.height(), true);
    const WarpResult wf = warp_image(scene.frame_canvas, all, view, frame_size, frame_size);
    const WarpResult wp = warp_image(scene.vessel_canvas, all, view, frame_size, frame_size);

    RenderedView out{ScalarImage(frame_size, frame_size, 0.0),
                     ScalarImage(frame_size, frame_size, 0.0)};
    const CounterRng noise_rng(noise_key, kStreamNoiseBase);
    std::uint64_t counter = 0;
    for (int y = 0; y < frame_size; ++y) {
        for (int x = 0; x < frame_size; ++x, ++counter) {
            if (!visibility.at(x, y)) continue;
            double v = wf.image.at(x, y);
            if (noise_sigma > 0.0) v += noise_sigma * noise_rng.normal(counter);
            out.frame.set(x, y, std::clamp(v, 0.0, 1.0));
            out.prob_map.set(x, y, wp.image.at(x, y));
        }
    }
    return out;
}

SynthSequence generate_sequence(const SynthConfig& cfg) {
    cfg.validate();
    const SynthScene scene = generate_scene_canvases(cfg);
    const std::vector<Pose> poses = make_trajectory(cfg);
    const double frame_center = (cfg.frame - 1) / 2.0;

    SynthSequence seq;
    seq.visibility = default_fov_mask(cfg.frame, cfg.frame, kFovMargin);
    seq.views.reserve(poses.size());
    for (const Pose& p : poses) {
        seq.views.push_back(make_view(frame_center, p.cx, p.cy, p.theta, std::exp(p.log_s)));
    }
    for (std::size_t k = 0; k + 1 < poses.size(); ++k) {
        seq.gt_pairwise.push_back(compose(invert(seq.views[k]), seq.views[k + 1]));
    }

    // Occluders are born per frame and drift over their lifetime; they are
    // painted on frames only, never on probability maps.
    std::vector<Occluder> occluders;
    const double r_fov = fov_radius(cfg.frame);
    for (int k = 0; k < cfg.n_frames; ++k) {
        const CounterRng rng(cfg.seed, kStreamOccluderBase + static_cast<std::uint64_t>(k));
        if (rng.uniform(0) >= cfg.occluder_rate) continue;
        Occluder o;
        o.birth = k;
        o.lifetime = static_cast<int>(rng.uniform(1, 4.0, 12.0));
        const double ang = rng.uniform(2, 0.0, 2.0 * std::numbers::pi);
        const double rad = rng.uniform(3, 0.0, 0.6) * r_fov;
        o.x = frame_center + rad * std::cos(ang);
        o.y = frame_center + rad * std::sin(ang);
        const double speed = rng.uniform(4, 3.0, 10.0);
        const double dir = rng.uniform(5, 0.0, 2.0 * std::numbers::pi);
        o.vx = speed * std::cos(dir);
        o.vy = speed * std::sin(dir);
        o.radius = rng.uniform(6, 35.0, 80.0);
        o.brightness = rng.uniform(7, 0.55, 0.95);
        occluders.push_back(o);
    }

    seq.frames.reserve(poses.size());
    seq.prob_maps.reserve(poses.size());
    for (int k = 0; k < cfg.n_frames; ++k) {
        RenderedView view = render_view(scene, seq.views[static_cast<std::size_t>(k)], cfg.frame,
                                        seq.visibility, 0.0, 0);
        for (const Occluder& o : occluders) {
            if (k >= o.birth && k < o.birth + o.lifetime) {
                paint_occluder(view.frame, o, k - o.birth);
            }
        }
        if (cfg.noise_sigma > 0.0) {
            const CounterRng noise(cfg.seed, kStreamNoiseBase + static_cast<std::uint64_t>(k));
            std::uint64_t counter = 0;
            for (int y = 0; y < cfg.frame; ++y) {
                for (int x = 0; x < cfg.frame; ++x, ++counter) {
                    if (!seq.visibility.at(x, y)) continue;
                    view.frame.set(x, y, std::clamp(view.frame.at(x, y) +
                                                        cfg.noise_sigma * noise.normal(counter),
                                                    0.0, 1.0));
                }
            }
        }
        // Occluders may spill past the FoV edge; re-zero outside.
        for (int y = 0; y < cfg.frame; ++y) {
            for (int x = 0; x < cfg.frame; ++x) {
                if (!seq.visibility.at(x, y)) view.frame.set(x, y, 0.0);
            }
        }
        seq.frames.push_back(std::move(view.frame));
        seq.prob_maps.push_back(std::move(view.prob_map));
    }
    return seq;
}

}  // namespace fetreg
