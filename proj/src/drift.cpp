#include "fetreg/drift.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "fetreg/error.hpp"
#include "fetreg/warp.hpp"

namespace fetreg {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<OffsetSummary> summarize_metric(const std::vector<DriftRecord>& records,
                                            int window_size,
                                            std::optional<double> DriftRecord::*field) {
    std::vector<OffsetSummary> out;
    for (int offset = 1; offset < window_size; ++offset) {
        std::vector<double> values;
        for (const auto& r : records) {
            if (r.offset == offset && (r.*field).has_value()) values.push_back(*(r.*field));
        }
        OffsetSummary s;
        s.offset = offset;
        s.n = static_cast<int>(values.size());
        if (!values.empty()) {
            std::sort(values.begin(), values.end());
            s.min = values.front();
            s.max = values.back();
            s.q1 = quantile_sorted(values, 0.25);
            s.median = quantile_sorted(values, 0.5);
            s.q3 = quantile_sorted(values, 0.75);
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace

DriftReport evaluate_drift(const std::vector<ScalarImage>& frames,
                           const std::vector<ScalarImage>& prob_maps,
                           const BinaryMask& visibility,
                           const std::vector<AffineTransform>& pairwise, int window_size,
                           double threshold, const SsimParams& ssim_params, int threads) {
    const int n = static_cast<int>(frames.size());
    if (prob_maps.size() != frames.size()) {
        throw Error("evaluate_drift: frames and probability maps count mismatch");
    }
    if (pairwise.size() + 1 != frames.size()) {
        throw Error("evaluate_drift: expected " + std::to_string(n - 1) + " pairwise transforms, got " +
                    std::to_string(pairwise.size()));
    }
    if (window_size < 2) throw Error("evaluate_drift: window size must be >= 2");

    DriftReport report;
    report.window_size = window_size;

    const int n_windows = n / window_size;
    const int per_window = window_size - 1;
    report.per_window.assign(static_cast<std::size_t>(n_windows) * per_window, DriftRecord{});

    auto eval_window = [&](int wi) {
        const int start = wi * window_size;
        AffineTransform to_start = AffineTransform::identity();
        for (int offset = 1; offset < window_size; ++offset) {
            // pairwise[k] maps frame k+1 into frame k; extend the chain by one.
            to_start = compose(to_start, pairwise[start + offset - 1]);

            DriftRecord rec;
            rec.window_start = start;
            rec.offset = offset;

            const int idx = start + offset;
            const WarpResult wf =
                warp_image(frames[idx], visibility, invert(to_start), frames[idx].width(),
                           frames[idx].height());
            const WarpResult wp =
                warp_image(prob_maps[idx], visibility, invert(to_start), prob_maps[idx].width(),
                           prob_maps[idx].height());

            // Joint validity: reference visibility AND reprojected validity.
            BinaryMask joint = wf.validity;
            for (std::size_t i = 0; i < joint.data().size(); ++i) {
                joint.data()[i] = joint.data()[i] && visibility.data()[i];
            }
            const std::size_t n_joint = joint.count();
            rec.valid_fraction = static_cast<double>(n_joint) / static_cast<double>(joint.size());

            try {
                rec.ssim = ssim(frames[start], wf.image, joint, ssim_params);
                rec.ssim_maps = ssim(prob_maps[start], wp.image, joint, ssim_params);
            } catch (const InsufficientOverlapError&) {
                // metrics stay null; valid_fraction still recorded
            }
            if (n_joint > 0) {
                // IoU over jointly valid pixels only.
                const BinaryMask ma = binarize(prob_maps[start], threshold);
                const BinaryMask mb = binarize(wp.image, threshold);
                std::size_t inter = 0, uni = 0;
                for (std::size_t i = 0; i < joint.data().size(); ++i) {
                    if (!joint.data()[i]) continue;
                    const bool va = ma.data()[i] != 0, vb = mb.data()[i] != 0;
                    inter += va && vb;
                    uni += va || vb;
                }
                rec.iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
            }
            report.per_window[static_cast<std::size_t>(wi) * per_window + offset - 1] = rec;
        }
    };

    if (threads <= 1 || n_windows <= 1) {
        for (int wi = 0; wi < n_windows; ++wi) eval_window(wi);
    } else {
        // Windows are independent; records land in preassigned slots, so the
        // result does not depend on scheduling.
        const int n_workers = std::min(threads, n_windows);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) {
            pool.emplace_back([&, t] {
                for (int wi = t; wi < n_windows; wi += n_workers) eval_window(wi);
            });
        }
        for (auto& th : pool) th.join();
    }
    return report;
}

DriftSummary summarize(const DriftReport& report) {
    if (report.per_window.empty()) throw Error("summarize: empty drift report");
    DriftSummary s;
    s.ssim = summarize_metric(report.per_window, report.window_size, &DriftRecord::ssim);
    s.ssim_maps = summarize_metric(report.per_window, report.window_size, &DriftRecord::ssim_maps);
    s.iou = summarize_metric(report.per_window, report.window_size, &DriftRecord::iou);
    return s;
}

}  // namespace fetreg
