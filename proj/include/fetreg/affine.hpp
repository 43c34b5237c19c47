#pragma once

#include <array>

namespace fetreg {

/// 6-parameter planar affine map
///   (x,y) -> (a11*x + a12*y + tx, a21*x + a22*y + ty).
/// Construction through from_params/identity/translation enforces
/// |det| in [1/16, 16] so degenerate optimizer excursions are rejected early.
struct AffineTransform {
    double a11 = 1.0, a12 = 0.0;
    double a21 = 0.0, a22 = 1.0;
    double tx = 0.0, ty = 0.0;

    static AffineTransform identity() { return {}; }
    static AffineTransform translation(double tx, double ty);
    /// Validates invertibility and the determinant band; throws
    /// DegenerateTransformError otherwise.
    static AffineTransform from_params(double a11, double a12, double a21, double a22,
                                       double tx, double ty);

    double det() const { return a11 * a22 - a12 * a21; }

    void apply(double x, double y, double& ox, double& oy) const {
        ox = a11 * x + a12 * y + tx;
        oy = a21 * x + a22 * y + ty;
    }
    std::array<double, 2> operator()(double x, double y) const {
        std::array<double, 2> p;
        apply(x, y, p[0], p[1]);
        return p;
    }
};

/// compose(A,B)(x) = A(B(x)). Throws if the composed determinant leaves the
/// accepted band.
AffineTransform compose(const AffineTransform& outer, const AffineTransform& inner);

/// Inverse map; compose(T, invert(T)) is the identity to ~1e-12.
AffineTransform invert(const AffineTransform& t);

/// Largest displacement of the four corner pixel centers of a width x height
/// frame between the two maps. The standard registration-accuracy scalar.
double max_corner_error(const AffineTransform& a, const AffineTransform& b, int width, int height);

/// Rotation by `angle` radians and isotropic `scale` about (pivot_x, pivot_y),
/// followed by a translation.
AffineTransform similarity_about(double angle, double scale, double pivot_x, double pivot_y,
                                 double tx = 0.0, double ty = 0.0);

}  // namespace fetreg
