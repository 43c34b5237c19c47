#include "fetreg/registration.hpp"

#include <cmath>
#include <optional>

#include "fetreg/detail/bilinear.hpp"
#include "fetreg/error.hpp"
#include "fetreg/warp.hpp"

namespace fetreg {

namespace {

constexpr double kMinValidFraction = 0.05;
constexpr double kLambdaCeiling = 1e8;
constexpr double kLambdaFloor = 1e-12;
constexpr double kPresmoothSigma = 2.0;

struct NormalEq {
    double jtj[6][6] = {};
    double g[6] = {};
    double cost_sum = 0.0;
    long n_valid = 0;
    long n_candidates = 0;

    void add_row(const double j[6], double e, double huber_k) {
        // Huber: quadratic inside the threshold, linear outside.
        const double ae = std::abs(e);
        double w, rho;
        if (ae <= huber_k) {
            w = 1.0;
            rho = e * e;
        } else {
            w = huber_k / ae;
            rho = huber_k * (2.0 * ae - huber_k);
        }
        cost_sum += rho;
        ++n_valid;
        for (int r = 0; r < 6; ++r) {
            const double jr = w * j[r];
            g[r] += jr * e;
            for (int c = r; c < 6; ++c) jtj[r][c] += jr * j[c];
        }
    }

    double cost() const { return n_valid > 0 ? cost_sum / n_valid : 0.0; }
    double valid_fraction() const {
        return n_candidates > 0 ? static_cast<double>(n_valid) / n_candidates : 0.0;
    }
};

struct CostOnly {
    double cost_sum = 0.0;
    long n_valid = 0;
    long n_candidates = 0;
    double cost() const { return n_valid > 0 ? cost_sum / n_valid : 0.0; }
    double valid_fraction() const {
        return n_candidates > 0 ? static_cast<double>(n_valid) / n_candidates : 0.0;
    }
};

// Forward pass: iterate fixed pixels x, sample moving at W(x).
// Jacobian row for residual e = fixed(x) - moving~(W(x)):
//   d e / d(a11,a12,a21,a22,tx,ty) = -(gx*x, gx*y, gy*x, gy*y, gx, gy)
// with (gx,gy) the derivative of the interpolated moving surface at W(x).
void accumulate_forward(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                        const ScalarImage& moving, const BinaryMask& moving_mask,
                        const AffineTransform& w, double huber_k, NormalEq& acc,
                        CostEval* full, long row_base) {
    const int width = fixed.width(), height = fixed.height();
    for (int y = 0; y < height; ++y) {
        const double row_x = w.a12 * y + w.tx;
        const double row_y = w.a22 * y + w.ty;
        for (int x = 0; x < width; ++x) {
            if (!fixed_mask.at(x, y)) continue;
            ++acc.n_candidates;
            const double sx = w.a11 * x + row_x;
            const double sy = w.a21 * x + row_y;
            double v, gx, gy;
            if (!detail::sample_bilinear_grad(moving, moving_mask, sx, sy, v, gx, gy)) continue;
            const double e = fixed.at(x, y) - v;
            const double j[6] = {-gx * x, -gx * y, -gy * x, -gy * y, -gx, -gy};
            acc.add_row(j, e, huber_k);
            if (full) {
                const long row = row_base + static_cast<long>(y) * width + x;
                const double ae = std::abs(e);
                const double sw = ae <= huber_k ? 1.0 : std::sqrt(huber_k / ae);
                full->row_valid[row] = 1;
                full->residuals(row) = sw * e;
                for (int c = 0; c < 6; ++c) full->jacobian(row, c) = sw * j[c];
            }
        }
    }
}

// Backward pass: iterate moving pixels q, sample fixed at V(q), V = W^-1.
// With p = V(q), A the linear part of W and h = A^-T grad(fixed~)(p), the
// residual e = moving(q) - fixed~(V(q)) has
//   d e / d(a11,a12,a21,a22,tx,ty) = +(hx*px, hx*py, hy*px, hy*py, hx, hy).
void accumulate_backward(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                         const ScalarImage& moving, const BinaryMask& moving_mask,
                         const AffineTransform& w, double huber_k, NormalEq& acc,
                         CostEval* full, long row_base) {
    const AffineTransform v = invert(w);
    const int width = moving.width(), height = moving.height();
    for (int y = 0; y < height; ++y) {
        const double row_x = v.a12 * y + v.tx;
        const double row_y = v.a22 * y + v.ty;
        for (int x = 0; x < width; ++x) {
            if (!moving_mask.at(x, y)) continue;
            ++acc.n_candidates;
            const double px = v.a11 * x + row_x;
            const double py = v.a21 * x + row_y;
            double val, gx, gy;
            if (!detail::sample_bilinear_grad(fixed, fixed_mask, px, py, val, gx, gy)) continue;
            const double e = moving.at(x, y) - val;
            // h = A^-T g; v holds A^-1, so A^-T rows are v's columns.
            const double hx = v.a11 * gx + v.a21 * gy;
            const double hy = v.a12 * gx + v.a22 * gy;
            const double j[6] = {hx * px, hx * py, hy * px, hy * py, hx, hy};
            acc.add_row(j, e, huber_k);
            if (full) {
                const long row = row_base + static_cast<long>(y) * width + x;
                const double ae = std::abs(e);
                const double sw = ae <= huber_k ? 1.0 : std::sqrt(huber_k / ae);
                full->row_valid[row] = 1;
                full->residuals(row) = sw * e;
                for (int c = 0; c < 6; ++c) full->jacobian(row, c) = sw * j[c];
            }
        }
    }
}

// Cost-only pass over one direction (no derivatives); used for LM step trials.
void cost_pass(const ScalarImage& target, const BinaryMask& target_mask,
               const ScalarImage& source, const BinaryMask& source_mask,
               const AffineTransform& sampling, double huber_k, CostOnly& acc) {
    const int width = target.width(), height = target.height();
    for (int y = 0; y < height; ++y) {
        const double row_x = sampling.a12 * y + sampling.tx;
        const double row_y = sampling.a22 * y + sampling.ty;
        for (int x = 0; x < width; ++x) {
            if (!target_mask.at(x, y)) continue;
            ++acc.n_candidates;
            const double sx = sampling.a11 * x + row_x;
            const double sy = sampling.a21 * x + row_y;
            double v;
            if (!detail::sample_bilinear(source, source_mask, sx, sy, v)) continue;
            const double e = target.at(x, y) - v;
            const double ae = std::abs(e);
            acc.cost_sum += ae <= huber_k ? e * e : huber_k * (2.0 * ae - huber_k);
            ++acc.n_valid;
        }
    }
}

std::optional<CostOnly> try_cost(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                                 const ScalarImage& moving, const BinaryMask& moving_mask,
                                 const AffineTransform& w, double huber_k, bool bidirectional) {
    CostOnly acc;
    cost_pass(fixed, fixed_mask, moving, moving_mask, w, huber_k, acc);
    if (bidirectional) {
        cost_pass(moving, moving_mask, fixed, fixed_mask, invert(w), huber_k, acc);
    }
    if (acc.valid_fraction() < kMinValidFraction) return std::nullopt;
    return acc;
}

std::optional<NormalEq> try_normal_eq(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                                      const ScalarImage& moving, const BinaryMask& moving_mask,
                                      const AffineTransform& w, double huber_k,
                                      bool bidirectional) {
    NormalEq acc;
    accumulate_forward(fixed, fixed_mask, moving, moving_mask, w, huber_k, acc, nullptr, 0);
    if (bidirectional) {
        accumulate_backward(fixed, fixed_mask, moving, moving_mask, w, huber_k, acc, nullptr, 0);
    }
    if (acc.valid_fraction() < kMinValidFraction) return std::nullopt;
    return acc;
}

std::optional<AffineTransform> add_delta(const AffineTransform& w,
                                         const Eigen::Matrix<double, 6, 1>& delta) {
    try {
        return AffineTransform::from_params(w.a11 + delta(0), w.a12 + delta(1), w.a21 + delta(2),
                                            w.a22 + delta(3), w.tx + delta(4), w.ty + delta(5));
    } catch (const DegenerateTransformError&) {
        return std::nullopt;
    }
}

void check_same_dims(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                     const ScalarImage& moving, const BinaryMask& moving_mask) {
    if (fixed.width() != moving.width() || fixed.height() != moving.height() ||
        fixed.width() != fixed_mask.width() || fixed.height() != fixed_mask.height() ||
        moving.width() != moving_mask.width() || moving.height() != moving_mask.height()) {
        throw Error("registration inputs must share dimensions");
    }
}

/// Rescale a transform between pyramid levels: coordinates scale by `s`, so
/// the linear part is unchanged and translations multiply by s.
AffineTransform scale_translation(const AffineTransform& t, double s) {
    AffineTransform r = t;
    r.tx *= s;
    r.ty *= s;
    return r;
}

}  // namespace

void RegistrationOptions::validate() const {
    if (pyramid_levels < 1) throw Error("pyramid_levels must be >= 1");
    if (!(scale_factor > 0.0 && scale_factor < 1.0)) throw Error("scale_factor must lie in (0,1)");
    if (max_iterations_per_level < 1) throw Error("max_iterations_per_level must be >= 1");
    if (!(param_tolerance > 0.0)) throw Error("param_tolerance must be > 0");
    if (!(lm_lambda_init > 0.0)) throw Error("lm_lambda_init must be > 0");
    if (!(lm_lambda_up > 1.0) || !(lm_lambda_down > 1.0)) {
        throw Error("lm lambda factors must be > 1");
    }
    if (!(robust_threshold > 0.0)) throw Error("robust_threshold must be > 0");
}

CostEval photometric_cost(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                          const ScalarImage& moving, const BinaryMask& moving_mask,
                          const AffineTransform& t, double robust_threshold, bool bidirectional) {
    check_same_dims(fixed, fixed_mask, moving, moving_mask);
    const long n_fixed = static_cast<long>(fixed.size());
    const long n_rows = bidirectional ? n_fixed + static_cast<long>(moving.size()) : n_fixed;

    CostEval eval;
    eval.residuals = Eigen::VectorXd::Zero(n_rows);
    eval.jacobian = Eigen::MatrixXd::Zero(n_rows, 6);
    eval.row_valid.assign(static_cast<std::size_t>(n_rows), 0);

    NormalEq acc;
    accumulate_forward(fixed, fixed_mask, moving, moving_mask, t, robust_threshold, acc, &eval, 0);
    if (bidirectional) {
        accumulate_backward(fixed, fixed_mask, moving, moving_mask, t, robust_threshold, acc,
                            &eval, n_fixed);
    }
    eval.cost = acc.cost();
    eval.valid_fraction = acc.valid_fraction();
    eval.n_valid = acc.n_valid;
    if (eval.valid_fraction < kMinValidFraction) {
        throw InsufficientOverlapError("insufficient overlap: valid fraction " +
                                       std::to_string(eval.valid_fraction) + " below " +
                                       std::to_string(kMinValidFraction));
    }
    return eval;
}

RegistrationResult lm_solve(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                            const ScalarImage& moving, const BinaryMask& moving_mask,
                            const AffineTransform& t_init, const RegistrationOptions& opts) {
    opts.validate();
    check_same_dims(fixed, fixed_mask, moving, moving_mask);

    // Internally optimise the sampling map W (fixed -> moving coordinates);
    // the public convention (moving -> fixed) is its inverse.
    AffineTransform w = invert(t_init);

    auto eval = try_normal_eq(fixed, fixed_mask, moving, moving_mask, w, opts.robust_threshold,
                              opts.bidirectional);
    if (!eval) {
        throw InsufficientOverlapError("insufficient overlap at initial transform");
    }

    double lambda = opts.lm_lambda_init;
    int iterations = 0;
    bool converged = false;

    while (iterations < opts.max_iterations_per_level) {
        Eigen::Matrix<double, 6, 1> grad;
        Eigen::Matrix<double, 6, 6> jtj;
        for (int r = 0; r < 6; ++r) {
            grad(r) = eval->g[r];
            for (int c = r; c < 6; ++c) {
                jtj(r, c) = eval->jtj[r][c];
                jtj(c, r) = eval->jtj[r][c];
            }
        }
        if (grad.cwiseAbs().maxCoeff() < 1e-15) {
            converged = true;  // stationary to machine precision
            break;
        }

        Eigen::Matrix<double, 6, 6> damped = jtj;
        for (int d = 0; d < 6; ++d) damped(d, d) += lambda * jtj(d, d);
        Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(damped);
        Eigen::Matrix<double, 6, 1> delta;
        bool solved = ldlt.info() == Eigen::Success;
        if (solved) {
            delta = ldlt.solve(-grad);
            solved = delta.allFinite();
        }
        if (!solved) {
            lambda *= opts.lm_lambda_up;
            ++iterations;
            if (lambda > kLambdaCeiling) {
                throw SingularSystemError("singular normal equations after lambda escalation");
            }
            continue;
        }

        ++iterations;
        bool accepted = false;
        if (auto candidate = add_delta(w, delta)) {
            if (auto trial = try_cost(fixed, fixed_mask, moving, moving_mask, *candidate,
                                      opts.robust_threshold, opts.bidirectional)) {
                if (trial->cost() < eval->cost()) {
                    w = *candidate;
                    eval = try_normal_eq(fixed, fixed_mask, moving, moving_mask, w,
                                         opts.robust_threshold, opts.bidirectional);
                    if (!eval) {
                        throw InsufficientOverlapError("insufficient overlap after accepted step");
                    }
                    lambda = std::max(lambda / opts.lm_lambda_down, kLambdaFloor);
                    accepted = true;
                }
            }
        }
        if (!accepted) {
            lambda *= opts.lm_lambda_up;
            if (lambda > kLambdaCeiling * opts.lm_lambda_up) {
                // Step rejection has driven lambda absurdly high; delta is
                // effectively zero, treat as converged-in-place.
                converged = true;
                break;
            }
        }
        if (delta.norm() < opts.param_tolerance) {
            converged = true;
            break;
        }
    }

    RegistrationResult result;
    result.transform = invert(w);
    result.final_cost = eval->cost();
    result.iterations_per_level = {iterations};
    result.converged = converged;
    result.valid_pixel_fraction = eval->valid_fraction();
    return result;
}

RegistrationResult register_pair(const ScalarImage& fixed, const BinaryMask& fixed_mask,
                                 const ScalarImage& moving, const BinaryMask& moving_mask,
                                 const AffineTransform& t_init, const RegistrationOptions& opts) {
    opts.validate();
    check_same_dims(fixed, fixed_mask, moving, moving_mask);

    // Condition the solver inputs: evaluate the cost on smoothed images with
    // masks eroded by the kernel radius. Resampled noise has a
    // sub-pixel-phase-dependent variance that pulls the optimum toward
    // half-pixel offsets, and image curvature at the pixel scale biases the
    // bilinear cost the same way; both scale down sharply with smoothing.
    // The erosion keeps smeared out-of-mask values out of the residuals.
    // Smoothing is shift-invariant, so the recovered transform still maps
    // the original frames.
    const ScalarImage fixed_s = gaussian5_smooth_sigma(fixed, kPresmoothSigma);
    const ScalarImage moving_s = gaussian5_smooth_sigma(moving, kPresmoothSigma);
    const BinaryMask fixed_m = erode(fixed_mask, 2);
    const BinaryMask moving_m = erode(moving_mask, 2);

    const Pyramid pf = build_pyramid(fixed_s, fixed_m, opts.pyramid_levels, opts.scale_factor);
    const Pyramid pm = build_pyramid(moving_s, moving_m, opts.pyramid_levels, opts.scale_factor);
    const int n_levels = std::min(pf.num_levels(), pm.num_levels());

    // Coordinates at level l are full-resolution coordinates times s^l.
    AffineTransform current =
        scale_translation(t_init, std::pow(opts.scale_factor, n_levels - 1));

    RegistrationResult level_result;
    std::vector<int> iterations(static_cast<std::size_t>(n_levels), 0);
    for (int l = n_levels - 1; l >= 0; --l) {
        level_result = lm_solve(pf.levels[l].image, pf.levels[l].mask, pm.levels[l].image,
                                pm.levels[l].mask, current, opts);
        iterations[static_cast<std::size_t>(l)] = level_result.iterations_per_level[0];
        current = level_result.transform;
        if (l > 0) {
            current = scale_translation(current, 1.0 / opts.scale_factor);
        }
    }

    RegistrationResult result = level_result;  // level 0 cost/convergence/overlap
    result.transform = current;
    result.iterations_per_level = std::move(iterations);
    return result;
}

}  // namespace fetreg
