#pragma once

#include <optional>
#include <vector>

#include "fetreg/affine.hpp"
#include "fetreg/image.hpp"
#include "fetreg/metrics.hpp"

namespace fetreg {

/// One (window, offset) comparison: frame window_start vs frame
/// window_start + offset reprojected into it. Metrics are null when the
/// reprojected overlap was too small to evaluate.
struct DriftRecord {
    int window_start = 0;
    int offset = 0;                    // 1 .. window_size-1
    std::optional<double> ssim;        // on intensity frames
    std::optional<double> ssim_maps;   // on probability maps
    std::optional<double> iou;         // on binarized probability maps
    double valid_fraction = 0.0;       // jointly valid pixels / frame pixels
};

struct DriftReport {
    std::vector<DriftRecord> per_window;
    int window_size = 5;
};

/// Five-number summary per offset for one metric.
struct OffsetSummary {
    int offset = 0;
    int n = 0;  // records with a non-null value
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct DriftSummary {
    std::vector<OffsetSummary> ssim;
    std::vector<OffsetSummary> ssim_maps;
    std::vector<OffsetSummary> iou;
};

/// Sliding-window drift quantification without ground truth: non-overlapping
/// windows start at frames 0, W, 2W, ...; within each, frame start+offset is
/// reprojected onto frame start through the composed pairwise transforms
/// (entry k maps frame k+1 into frame k) and compared by SSIM (frames and
/// probability maps) and by IoU of the probability maps binarized at
/// `threshold`. Incomplete trailing windows are skipped. `threads` > 1
/// evaluates windows in parallel; record order is independent of it.
DriftReport evaluate_drift(const std::vector<ScalarImage>& frames,
                           const std::vector<ScalarImage>& prob_maps,
                           const BinaryMask& visibility,
                           const std::vector<AffineTransform>& pairwise, int window_size,
                           double threshold, const SsimParams& ssim_params = {},
                           int threads = 1);

/// Per-offset five-number summaries (min, quartiles, max) of a report.
/// Quartiles use linear interpolation between order statistics. Throws on an
/// empty report.
DriftSummary summarize(const DriftReport& report);

}  // namespace fetreg
