#include "fetreg/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fetreg/error.hpp"

namespace fetreg {

namespace {

constexpr double kLogClamp = 1e-7;

void check_loss_inputs(const LossInputs& in) {
    if (in.p.size() != in.p_hat.size()) {
        throw Error("loss inputs length mismatch: " + std::to_string(in.p.size()) + " vs " +
                    std::to_string(in.p_hat.size()));
    }
    if (in.p.empty()) throw Error("loss inputs are empty");
    if (!(in.delta > 0.0)) throw Error("loss delta must be > 0");
}

void check_same_dims(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error("mask dimension mismatch");
    }
}

/// Summed-area table with a zero top row/left column; sums of any window in
/// O(1).
class Integral {
public:
    Integral(const std::vector<double>& v, int w, int h) : w_(w + 1) {
        table_.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
        for (int y = 0; y < h; ++y) {
            double row = 0.0;
            for (int x = 0; x < w; ++x) {
                row += v[static_cast<std::size_t>(y) * w + x];
                table_[idx(x + 1, y + 1)] = table_[idx(x + 1, y)] + row;
            }
        }
    }
    /// Sum over [x0, x0+n) x [y0, y0+n).
    double window(int x0, int y0, int n) const {
        return table_[idx(x0 + n, y0 + n)] - table_[idx(x0, y0 + n)] - table_[idx(x0 + n, y0)] +
               table_[idx(x0, y0)];
    }

private:
    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }
    int w_;
    std::vector<double> table_;
};

}  // namespace

double bce_loss(const LossInputs& in) {
    check_loss_inputs(in);
    double sum = 0.0;
    for (std::size_t i = 0; i < in.p.size(); ++i) {
        const double q = std::clamp(in.p_hat[i], kLogClamp, 1.0 - kLogClamp);
        sum += in.p[i] * std::log(q) + (1.0 - in.p[i]) * std::log(1.0 - q);
    }
    return -sum / static_cast<double>(in.p.size());
}

double iou_loss(const LossInputs& in) {
    check_loss_inputs(in);
    double inter = 0.0, total = 0.0;
    for (std::size_t i = 0; i < in.p.size(); ++i) {
        inter += in.p[i] * in.p_hat[i];
        total += in.p[i] + in.p_hat[i];
    }
    return 1.0 - (inter + in.delta) / (total - inter + in.delta);
}

double combined_loss(const LossInputs& in) { return bce_loss(in) + iou_loss(in); }

double dice_score(const BinaryMask& a, const BinaryMask& b) {
    check_same_dims(a, b);
    std::size_t na = 0, nb = 0, inter = 0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        na += da[i] != 0;
        nb += db[i] != 0;
        inter += (da[i] != 0) && (db[i] != 0);
    }
    if (na + nb == 0) return 1.0;  // empty vs empty: perfect agreement
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

double iou_score(const BinaryMask& a, const BinaryMask& b) {
    check_same_dims(a, b);
    std::size_t inter = 0, uni = 0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        const bool va = da[i] != 0, vb = db[i] != 0;
        inter += va && vb;
        uni += va || vb;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

void SsimParams::validate() const {
    if (window < 3 || window % 2 == 0) throw Error("ssim window must be odd and >= 3");
    if (!(k1 > 0.0) || !(k2 > 0.0)) throw Error("ssim stabilizers must be > 0");
    if (stride < 1) throw Error("ssim stride must be >= 1");
}

double ssim(const ScalarImage& a, const ScalarImage& b, const BinaryMask& joint_validity,
            const SsimParams& params) {
    params.validate();
    if (a.width() != b.width() || a.height() != b.height() ||
        a.width() != joint_validity.width() || a.height() != joint_validity.height()) {
        throw Error("ssim inputs must share dimensions");
    }
    const int w = a.width(), h = a.height(), n = params.window;
    if (w < n || h < n) {
        throw InsufficientOverlapError("ssim: image smaller than the window");
    }

    const std::size_t size = a.size();
    std::vector<double> aa(size), bb(size), ab(size), valid(size);
    const auto& va = a.data();
    const auto& vb = b.data();
    const auto& vm = joint_validity.data();
    for (std::size_t i = 0; i < size; ++i) {
        aa[i] = va[i] * va[i];
        bb[i] = vb[i] * vb[i];
        ab[i] = va[i] * vb[i];
        valid[i] = vm[i] != 0 ? 1.0 : 0.0;
    }
    const Integral ia(va, w, h), ib(vb, w, h), iaa(aa, w, h), ibb(bb, w, h), iab(ab, w, h),
        imask(valid, w, h);

    const double c1 = params.k1 * params.k1;  // (k1 * L)^2 with L = 1
    const double c2 = params.k2 * params.k2;
    const double inv_n = 1.0 / (static_cast<double>(n) * n);
    const double full = static_cast<double>(n) * n;

    double total = 0.0;
    long n_windows = 0;
    for (int y0 = 0; y0 + n <= h; y0 += params.stride) {
        for (int x0 = 0; x0 + n <= w; x0 += params.stride) {
            if (imask.window(x0, y0, n) < full - 0.5) continue;  // partially invalid: skip
            const double mu_a = ia.window(x0, y0, n) * inv_n;
            const double mu_b = ib.window(x0, y0, n) * inv_n;
            const double var_a = iaa.window(x0, y0, n) * inv_n - mu_a * mu_a;
            const double var_b = ibb.window(x0, y0, n) * inv_n - mu_b * mu_b;
            const double cov = iab.window(x0, y0, n) * inv_n - mu_a * mu_b;
            const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
            ++n_windows;
        }
    }
    if (n_windows == 0) {
        throw InsufficientOverlapError("ssim: no window fully inside the joint validity mask");
    }
    return total / n_windows;
}

}  // namespace fetreg
