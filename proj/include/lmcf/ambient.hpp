#pragma once

// Fixed linear-algebraic structures of C^2 = R^4: the complex structure J,
// the symplectic form omega, the holomorphic volume form Omega = dz1^dz2,
// and the Liouville form lambda. Coordinate order is (x1, y1, x2, y2) with
// z_j = x_j + i*y_j; e1 = (1,0,0,0).

#include <array>
#include <cmath>
#include <complex>

namespace lmcf::ambient {

struct AmbientVector {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    constexpr AmbientVector() = default;
    constexpr AmbientVector(double x1_, double y1_, double x2_, double y2_)
        : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {}

    std::complex<double> z1() const { return {x1, y1}; }
    std::complex<double> z2() const { return {x2, y2}; }

    double operator[](int i) const {
        return i == 0 ? x1 : i == 1 ? y1 : i == 2 ? x2 : y2;
    }
    double& operator[](int i) {
        return i == 0 ? x1 : i == 1 ? y1 : i == 2 ? x2 : y2;
    }

    AmbientVector& operator+=(const AmbientVector& o) {
        x1 += o.x1; y1 += o.y1; x2 += o.x2; y2 += o.y2;
        return *this;
    }
    AmbientVector& operator-=(const AmbientVector& o) {
        x1 -= o.x1; y1 -= o.y1; x2 -= o.x2; y2 -= o.y2;
        return *this;
    }
    AmbientVector& operator*=(double c) {
        x1 *= c; y1 *= c; x2 *= c; y2 *= c;
        return *this;
    }
};

inline AmbientVector operator+(AmbientVector a, const AmbientVector& b) { return a += b; }
inline AmbientVector operator-(AmbientVector a, const AmbientVector& b) { return a -= b; }
inline AmbientVector operator*(double c, AmbientVector v) { return v *= c; }
inline AmbientVector operator*(AmbientVector v, double c) { return v *= c; }
inline AmbientVector operator-(const AmbientVector& v) { return {-v.x1, -v.y1, -v.x2, -v.y2}; }

inline double dot(const AmbientVector& a, const AmbientVector& b) {
    return a.x1 * b.x1 + a.y1 * b.y1 + a.x2 * b.x2 + a.y2 * b.y2;
}
inline double norm_sq(const AmbientVector& v) { return dot(v, v); }
inline double norm(const AmbientVector& v) { return std::sqrt(norm_sq(v)); }

inline constexpr AmbientVector e1() { return {1.0, 0.0, 0.0, 0.0}; }

// J(x1,y1,x2,y2) = (-y1,x1,-y2,x2); J*J = -identity.
inline AmbientVector apply_J(const AmbientVector& v) {
    return {-v.y1, v.x1, -v.y2, v.x2};
}

// An ordered pair spanning a 2-plane. Operations that require
// orthonormality state it as a precondition.
struct TwoFrame {
    AmbientVector a;
    AmbientVector b;
};

// omega(a,b) = dx1^dy1(a,b) + dx2^dy2(a,b). Equals <J a, b>.
inline double symplectic_form(const TwoFrame& f) {
    return f.a.x1 * f.b.y1 - f.a.y1 * f.b.x1 + f.a.x2 * f.b.y2 - f.a.y2 * f.b.x2;
}

// Omega(a,b) = dz1^dz2(a,b) as a complex number. |Omega| equals the
// parallelogram area exactly when the frame spans a Lagrangian plane.
inline std::complex<double> holomorphic_volume(const TwoFrame& f) {
    return f.a.z1() * f.b.z2() - f.a.z2() * f.b.z1();
}

// lambda = sum_j x_j dy_j - y_j dx_j evaluated at `base` on the vector `v`.
// Equal to omega(base, v) with base read as a vector.
inline double liouville_form(const AmbientVector& base, const AmbientVector& v) {
    return base.x1 * v.y1 - base.y1 * v.x1 + base.x2 * v.y2 - base.y2 * v.x2;
}

// Area of the parallelogram spanned by the frame.
inline double frame_area(const TwoFrame& f) {
    const double g = norm_sq(f.a) * norm_sq(f.b) - dot(f.a, f.b) * dot(f.a, f.b);
    return std::sqrt(std::max(g, 0.0));
}

// Tangential / normal split of v relative to the plane spanned by an
// orthonormal frame (precondition: frame orthonormal).
inline AmbientVector tangential_part(const AmbientVector& v, const TwoFrame& on) {
    return dot(v, on.a) * on.a + dot(v, on.b) * on.b;
}
inline AmbientVector normal_part(const AmbientVector& v, const TwoFrame& on) {
    return v - tangential_part(v, on);
}

// Gram-Schmidt orthonormalization of a (linearly independent) frame.
inline TwoFrame orthonormalized(const TwoFrame& f) {
    AmbientVector u = f.a;
    u *= 1.0 / norm(u);
    AmbientVector w = f.b - dot(f.b, u) * u;
    w *= 1.0 / norm(w);
    return {u, w};
}

}  // namespace lmcf::ambient
