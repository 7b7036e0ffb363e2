#pragma once

// Small fixed-size linear algebra used by the surface and diagnostics
// modules: 2x2 symmetric eigenvalues, 2x2 inverses, a Jacobi eigensolver
// for 4x4 symmetric matrices, and principal angles between 2-planes.

#include <array>
#include <cmath>

#include "lmcf/ambient.hpp"

namespace lmcf::linalg {

struct Mat2 {
    // row-major: [a b; c d]
    double a = 0, b = 0, c = 0, d = 0;

    double det() const { return a * d - b * c; }
};

inline Mat2 inverse(const Mat2& m) {
    const double det = m.det();
    return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

inline Mat2 mul(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

// Eigenvalues of a symmetric 2x2 [a b; b d], descending.
inline std::array<double, 2> sym_eigenvalues(double a, double b, double d) {
    const double tr = a + d;
    const double disc = std::sqrt(std::max((a - d) * (a - d) / 4.0 + b * b, 0.0));
    return {tr / 2.0 + disc, tr / 2.0 - disc};
}

// Singular values of a general 2x2, descending.
inline std::array<double, 2> singular_values(const Mat2& m) {
    const double p = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
    const double q = m.det();
    const double disc = std::sqrt(std::max(p * p - 4.0 * q * q, 0.0));
    return {std::sqrt(std::max((p + disc) / 2.0, 0.0)),
            std::sqrt(std::max((p - disc) / 2.0, 0.0))};
}

using Mat4 = std::array<std::array<double, 4>, 4>;

// Cyclic Jacobi for a symmetric 4x4.  Eigenvalues descending, matching
// columns of `vectors`.
void sym_eigen4(const Mat4& m, std::array<double, 4>& values, Mat4& vectors);

// Maximum principal angle between the 2-planes spanned by two orthonormal
// frames.  Zero iff the planes coincide, pi/2 when orthogonal.
double max_principal_angle(const ambient::TwoFrame& p, const ambient::TwoFrame& q);

}  // namespace lmcf::linalg
