#include "fetreg/affine.hpp"

#include <cmath>
#include <string>

#include "fetreg/error.hpp"

namespace fetreg {

namespace {

constexpr double kDetMin = 1.0 / 16.0;
constexpr double kDetMax = 16.0;

void check_det(double det) {
    const double mag = std::abs(det);
    if (!(mag >= kDetMin && mag <= kDetMax)) {
        throw DegenerateTransformError("affine determinant " + std::to_string(det) +
                                       " outside [1/16, 16]");
    }
}

}  // namespace

AffineTransform AffineTransform::translation(double tx, double ty) {
    AffineTransform t;
    t.tx = tx;
    t.ty = ty;
    return t;
}

AffineTransform AffineTransform::from_params(double a11, double a12, double a21, double a22,
                                             double tx, double ty) {
    AffineTransform t{a11, a12, a21, a22, tx, ty};
    check_det(t.det());
    return t;
}

AffineTransform compose(const AffineTransform& outer, const AffineTransform& inner) {
    AffineTransform c;
    c.a11 = outer.a11 * inner.a11 + outer.a12 * inner.a21;
    c.a12 = outer.a11 * inner.a12 + outer.a12 * inner.a22;
    c.a21 = outer.a21 * inner.a11 + outer.a22 * inner.a21;
    c.a22 = outer.a21 * inner.a12 + outer.a22 * inner.a22;
    c.tx = outer.a11 * inner.tx + outer.a12 * inner.ty + outer.tx;
    c.ty = outer.a21 * inner.tx + outer.a22 * inner.ty + outer.ty;
    check_det(c.det());
    return c;
}

AffineTransform invert(const AffineTransform& t) {
    const double det = t.det();
    if (std::abs(det) < 1e-12) {
        throw DegenerateTransformError("cannot invert affine with determinant " +
                                       std::to_string(det));
    }
    const double inv = 1.0 / det;
    AffineTransform r;
    r.a11 = t.a22 * inv;
    r.a12 = -t.a12 * inv;
    r.a21 = -t.a21 * inv;
    r.a22 = t.a11 * inv;
    r.tx = -(r.a11 * t.tx + r.a12 * t.ty);
    r.ty = -(r.a21 * t.tx + r.a22 * t.ty);
    return r;
}

AffineTransform similarity_about(double angle, double scale, double pivot_x, double pivot_y,
                                 double tx, double ty) {
    const double c = std::cos(angle) * scale;
    const double s = std::sin(angle) * scale;
    AffineTransform t;
    t.a11 = c;
    t.a12 = -s;
    t.a21 = s;
    t.a22 = c;
    t.tx = pivot_x - (c * pivot_x - s * pivot_y) + tx;
    t.ty = pivot_y - (s * pivot_x + c * pivot_y) + ty;
    check_det(t.det());
    return t;
}

double max_corner_error(const AffineTransform& a, const AffineTransform& b, int width,
                        int height) {
    const double xs[2] = {0.0, static_cast<double>(width - 1)};
    const double ys[2] = {0.0, static_cast<double>(height - 1)};
    double worst = 0.0;
    for (double cx : xs) {
        for (double cy : ys) {
            double ax, ay, bx, by;
            a.apply(cx, cy, ax, ay);
            b.apply(cx, cy, bx, by);
            worst = std::max(worst, std::hypot(ax - bx, ay - by));
        }
    }
    return worst;
}

}  // namespace fetreg
