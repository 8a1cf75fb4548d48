#pragma once

#include <array>
#include <cmath>

namespace ofbm {

/// Dense real 2x2 matrix, row-major.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    double det() const { return a11 * a22 - a12 * a21; }
    Mat2 transposed() const { return {a11, a21, a12, a22}; }

    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a11 * y.a11 + x.a12 * y.a21, x.a11 * y.a12 + x.a12 * y.a22,
                x.a21 * y.a11 + x.a22 * y.a21, x.a21 * y.a12 + x.a22 * y.a22};
    }
    friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// Symmetric 2x2 matrix stored by its three unique entries.
struct Sym2 {
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;

    double trace() const { return s11 + s22; }
    double det() const { return s11 * s22 - s12 * s12; }
    Mat2 full() const { return {s11, s12, s12, s22}; }

    friend bool operator==(const Sym2&, const Sym2&) = default;
};

/// w * s * w^T, which stays symmetric.
inline Sym2 congruence(const Mat2& w, const Sym2& s) {
    const Mat2 m = w * s.full() * w.transposed();
    return {m.a11, 0.5 * (m.a12 + m.a21), m.a22};
}

/// Eigen-decomposition of a symmetric 2x2 matrix.
/// `lambda[0] <= lambda[1]`; `vectors[k]` is the unit eigenvector of `lambda[k]`.
struct SymEigen2 {
    std::array<double, 2> lambda{};
    std::array<std::array<double, 2>, 2> vectors{};
};

inline SymEigen2 eigen(const Sym2& s) {
    const double half_tr = 0.5 * (s.s11 + s.s22);
    const double half_diff = 0.5 * (s.s11 - s.s22);
    const double r = std::hypot(half_diff, s.s12);
    SymEigen2 out;
    out.lambda = {half_tr - r, half_tr + r};
    // Rotation angle of the principal axis.
    const double theta = 0.5 * std::atan2(2.0 * s.s12, s.s11 - s.s22);
    const double c = std::cos(theta), sn = std::sin(theta);
    out.vectors[1] = {c, sn};
    out.vectors[0] = {-sn, c};
    return out;
}

}  // namespace ofbm
