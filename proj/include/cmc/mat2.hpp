#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace cmc {

// Dense complex 2x2 matrix; the workhorse value type of every per-sample loop
// computation.  Row-major: e(0,0) e(0,1) / e(1,0) e(1,1).
struct Mat2 {
    std::complex<double> a{0.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{0.0, 0.0};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 zero() { return {}; }
    static Mat2 diag(std::complex<double> x, std::complex<double> y) { return {x, 0.0, 0.0, y}; }

    std::complex<double> det() const { return a * d - b * c; }
    std::complex<double> trace() const { return a + d; }

    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator*(std::complex<double> s) const { return {a * s, b * s, c * s, d * s}; }
    Mat2& operator+=(const Mat2& o) {
        a += o.a; b += o.b; c += o.c; d += o.d;
        return *this;
    }

    // Adjugate-over-determinant inverse; throws on a singular sample.
    Mat2 inverse() const {
        const std::complex<double> dt = det();
        if (std::abs(dt) < 1e-300) throw std::domain_error("Mat2::inverse: singular matrix");
        const std::complex<double> s = 1.0 / dt;
        return {d * s, -b * s, -c * s, a * s};
    }

    Mat2 adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }

    double norm() const {
        return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
    }

    double unitarity_defect() const {
        const Mat2 g = (*this) * adjoint() - identity();
        return g.norm();
    }
};

inline Mat2 operator*(std::complex<double> s, const Mat2& m) { return m * s; }

// su(2) <-> R^3 identification used throughout:
//   (y1, y2, y3)  <->  [ -i y3     y1 + i y2 ]
//                      [ -y1 + i y2    i y3  ]
// y1 is the vertical direction of the surface geometry.
struct Vec3 {
    double x{0.0}, y{0.0}, z{0.0};

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
};

// su(2) coordinates (y1, y2, y3) of a matrix assumed traceless skew-Hermitian;
// the caller checks su2_defect if the assumption needs verification.
inline std::array<double, 3> su2_coordinates(const Mat2& m) {
    const double y1 = 0.5 * (m.b.real() - m.c.real());
    const double y2 = 0.5 * (m.b.imag() + m.c.imag());
    const double y3 = -m.a.imag() * 0.5 + m.d.imag() * 0.5;
    return {y1, y2, y3};
}

inline Mat2 su2_matrix(double y1, double y2, double y3) {
    return {std::complex<double>(0.0, -y3), std::complex<double>(y1, y2),
            std::complex<double>(-y1, y2), std::complex<double>(0.0, y3)};
}

// Distance of m from the traceless skew-Hermitian slice.
inline double su2_defect(const Mat2& m) {
    const auto [y1, y2, y3] = su2_coordinates(m);
    return (m - su2_matrix(y1, y2, y3)).norm();
}

}  // namespace cmc
