#include <doctest.h>

#include <random>

#include "fetreg/drift.hpp"
#include "fetreg/error.hpp"
#include "fetreg/synth.hpp"
#include "fetreg/warp.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace fetreg;

namespace {

std::vector<AffineTransform> identities(int n) {
    return std::vector<AffineTransform>(static_cast<std::size_t>(n),
                                        AffineTransform::identity());
}

}  // namespace

TEST_SUITE("drift") {

TEST_CASE("static scene with identity transforms scores 1 everywhere") {
    const ScalarImage frame = testutil::smooth_random_image(96, 96, 1);
    const ScalarImage probs = testutil::random_image(96, 96, 2);
    const BinaryMask vis = default_fov_mask(96, 96);
    const std::vector<ScalarImage> frames(10, frame), maps(10, probs);
    const DriftReport report = evaluate_drift(frames, maps, vis, identities(9), 5, 0.5);

    REQUIRE(report.per_window.size() == 8);  // 2 complete windows x offsets 1..4
    for (const auto& r : report.per_window) {
        REQUIRE(r.ssim.has_value());
        REQUIRE(r.iou.has_value());
        CHECK(*r.ssim == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(*r.ssim_maps == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(*r.iou == doctest::Approx(1.0));
        CHECK(r.valid_fraction > 0.5);
    }
}

TEST_CASE("window structure: starts at multiples of W, offsets 1..W-1, trailing skipped") {
    const ScalarImage frame(64, 64, 0.5);
    const BinaryMask vis(64, 64, true);
    const std::vector<ScalarImage> frames(13, frame), maps(13, frame);
    const DriftReport report = evaluate_drift(frames, maps, vis, identities(12), 5, 0.5);
    REQUIRE(report.per_window.size() == 8);  // 13 frames -> windows at 0 and 5 only
    int idx = 0;
    for (int start : {0, 5}) {
        for (int offset = 1; offset <= 4; ++offset, ++idx) {
            CHECK(report.per_window[static_cast<std::size_t>(idx)].window_start == start);
            CHECK(report.per_window[static_cast<std::size_t>(idx)].offset == offset);
        }
    }
    for (const auto& r : report.per_window) CHECK(r.offset != 0);
}

TEST_CASE("ground-truth transforms keep ssim >= 0.99 on a noise-free sequence") {
    SynthConfig cfg;
    cfg.seed = 77;
    cfg.frame = 128;
    cfg.canvas = 512;
    cfg.n_frames = 10;
    cfg.trajectory.translation_px_per_frame = 1.5;
    cfg.trajectory.rotation_deg_per_frame = 0.2;
    const SynthSequence seq = generate_sequence(cfg);
    const DriftReport report =
        evaluate_drift(seq.frames, seq.prob_maps, seq.visibility, seq.gt_pairwise, 5, 0.5);
    REQUIRE(!report.per_window.empty());
    for (const auto& r : report.per_window) {
        REQUIRE(r.ssim.has_value());
        CHECK(*r.ssim >= 0.99);
        CHECK(*r.iou >= 0.98);
    }
}

TEST_CASE("unreachable frames produce null metrics, not failures") {
    const ScalarImage frame = testutil::smooth_random_image(64, 64, 3);
    const BinaryMask vis = default_fov_mask(64, 64);
    const std::vector<ScalarImage> frames(5, frame), maps(5, frame);
    // Transforms push every later frame far outside the first one.
    const std::vector<AffineTransform> away(4, AffineTransform::translation(500, 0));
    const DriftReport report = evaluate_drift(frames, maps, vis, away, 5, 0.5);
    REQUIRE(report.per_window.size() == 4);
    for (const auto& r : report.per_window) {
        CHECK(!r.ssim.has_value());
        CHECK(!r.iou.has_value());
        CHECK(r.valid_fraction == 0.0);
    }
}

TEST_CASE("threaded evaluation matches sequential") {
    SynthConfig cfg;
    cfg.seed = 78;
    cfg.frame = 96;
    cfg.canvas = 512;
    cfg.n_frames = 15;
    const SynthSequence seq = generate_sequence(cfg);
    const DriftReport a =
        evaluate_drift(seq.frames, seq.prob_maps, seq.visibility, seq.gt_pairwise, 5, 0.5, {}, 1);
    const DriftReport b =
        evaluate_drift(seq.frames, seq.prob_maps, seq.visibility, seq.gt_pairwise, 5, 0.5, {}, 3);
    REQUIRE(a.per_window.size() == b.per_window.size());
    for (std::size_t i = 0; i < a.per_window.size(); ++i) {
        CHECK(a.per_window[i].window_start == b.per_window[i].window_start);
        CHECK(a.per_window[i].offset == b.per_window[i].offset);
        CHECK(a.per_window[i].ssim == b.per_window[i].ssim);
        CHECK(a.per_window[i].iou == b.per_window[i].iou);
    }
}

TEST_CASE("summarize: single window and degenerate spreads") {
    DriftReport report;
    report.window_size = 3;
    DriftRecord r1{0, 1, 0.9, 0.8, 0.7, 1.0};
    DriftRecord r2{0, 2, 0.6, 0.5, 0.4, 1.0};
    report.per_window = {r1, r2};
    const DriftSummary s = summarize(report);
    REQUIRE(s.ssim.size() == 2);
    CHECK(s.ssim[0].median == doctest::Approx(0.9));
    CHECK(s.ssim[1].median == doctest::Approx(0.6));
    CHECK(s.iou[0].median == doctest::Approx(0.7));
    CHECK(s.ssim[0].q1 == s.ssim[0].q3);  // single value: zero IQR

    DriftReport empty;
    CHECK_THROWS_AS(summarize(empty), Error);
}

TEST_CASE("summarize matches the sort-based oracle") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    DriftReport report;
    report.window_size = 2;
    std::vector<double> values;
    for (int w = 0; w < 11; ++w) {
        DriftRecord r;
        r.window_start = 2 * w;
        r.offset = 1;
        r.ssim = dist(rng);
        values.push_back(*r.ssim);
        report.per_window.push_back(r);
    }
    const DriftSummary s = summarize(report);
    const auto expect = oracle::five_numbers_direct(values);
    REQUIRE(s.ssim.size() == 1);
    CHECK(s.ssim[0].min == doctest::Approx(expect.min));
    CHECK(s.ssim[0].q1 == doctest::Approx(expect.q1));
    CHECK(s.ssim[0].median == doctest::Approx(expect.median));
    CHECK(s.ssim[0].q3 == doctest::Approx(expect.q3));
    CHECK(s.ssim[0].max == doctest::Approx(expect.max));
    CHECK(s.ssim[0].n == 11);
}

TEST_CASE("input validation") {
    const ScalarImage frame(64, 64, 0.5);
    const BinaryMask vis(64, 64, true);
    const std::vector<ScalarImage> frames(5, frame);
    const std::vector<ScalarImage> maps(4, frame);
    CHECK_THROWS_AS(evaluate_drift(frames, maps, vis, identities(4), 5, 0.5), Error);
    const std::vector<ScalarImage> maps5(5, frame);
    CHECK_THROWS_AS(evaluate_drift(frames, maps5, vis, identities(3), 5, 0.5), Error);
    CHECK_THROWS_AS(evaluate_drift(frames, maps5, vis, identities(4), 1, 0.5), Error);
}

}  // TEST_SUITE
