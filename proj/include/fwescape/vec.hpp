#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace fwescape {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double& operator[](int i) { return i == 0 ? x : y; }
    double operator[](int i) const { return i == 0 ? x : y; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
inline Vec2 operator*(Vec2 a, double c) { return c * a; }
inline Vec2 operator/(Vec2 a, double c) { return {a.x / c, a.y / c}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }
inline bool finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(double c, Vec3 a) { return {c * a.x, c * a.y, c * a.z}; }
inline Vec3 operator*(Vec3 a, double c) { return c * a; }
inline Vec3 operator/(Vec3 a, double c) { return {a.x / c, a.y / c, a.z / c}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(Vec3 a) { return dot(a, a); }
inline double norm(Vec3 a) { return std::sqrt(norm2(a)); }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3 normalized(Vec3 a) { return a / norm(a); }

/// Row-major 2x2 matrix; m[i][j] maps component j of the input to component i.
struct Mat2 {
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    static Mat2 identity() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }
};

inline Vec2 apply(const Mat2& a, Vec2 v) {
    return {a.m[0][0] * v.x + a.m[0][1] * v.y, a.m[1][0] * v.x + a.m[1][1] * v.y};
}
inline Vec2 apply_transpose(const Mat2& a, Vec2 v) {
    return {a.m[0][0] * v.x + a.m[1][0] * v.y, a.m[0][1] * v.x + a.m[1][1] * v.y};
}
inline double trace(const Mat2& a) { return a.m[0][0] + a.m[1][1]; }
inline double det(const Mat2& a) { return a.m[0][0] * a.m[1][1] - a.m[0][1] * a.m[1][0]; }

/// Row-major 3x3, same convention as Mat2.
struct Mat3 {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
};

inline Vec3 apply(const Mat3& a, Vec3 v) {
    Vec3 r;
    for (int i = 0; i < 3; ++i)
        r[i] = a.m[i][0] * v.x + a.m[i][1] * v.y + a.m[i][2] * v.z;
    return r;
}

/// a += c * u v^T
inline void add_outer(Mat3& a, double c, Vec3 u, Vec3 v) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            a.m[i][j] += c * u[i] * v[j];
}

/// Cross-product matrix: cross_mat(v) * w == cross(v, w).
inline Mat3 cross_mat(Vec3 v) {
    Mat3 a;
    a.m[0][1] = -v.z; a.m[0][2] = v.y;
    a.m[1][0] = v.z;  a.m[1][2] = -v.x;
    a.m[2][0] = -v.y; a.m[2][1] = v.x;
    return a;
}

struct Eig2 {
    std::complex<double> lambda[2];
    // Columns are (possibly complex) eigenvectors; for a near-scalar matrix the
    // canonical basis is returned and `near_scalar` is set.
    std::complex<double> vec[2][2];
    bool near_scalar = false;
};

/// Eigen-decomposition of a real 2x2 matrix via trace/determinant.
inline Eig2 eigen2(const Mat2& a) {
    Eig2 e;
    const double tr = trace(a);
    const double dt = det(a);
    const double scale = std::abs(a.m[0][0]) + std::abs(a.m[0][1]) +
                         std::abs(a.m[1][0]) + std::abs(a.m[1][1]);
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - dt, 0.0));
    e.lambda[0] = tr / 2.0 + disc;
    e.lambda[1] = tr / 2.0 - disc;

    const double off = std::abs(a.m[0][1]) + std::abs(a.m[1][0]);
    const double diag_gap = std::abs(a.m[0][0] - a.m[1][1]);
    if (off + diag_gap <= 1e-12 * std::max(scale, 1e-300)) {
        e.near_scalar = true;
        e.vec[0][0] = 1.0; e.vec[1][0] = 0.0;
        e.vec[0][1] = 0.0; e.vec[1][1] = 1.0;
        return e;
    }
    for (int k = 0; k < 2; ++k) {
        const std::complex<double> l = e.lambda[k];
        // Rows of (a - l I) are parallel; pick the better-conditioned null vector.
        const std::complex<double> r0x = a.m[0][0] - l, r0y = a.m[0][1];
        const std::complex<double> r1x = a.m[1][0], r1y = a.m[1][1] - l;
        std::complex<double> vx, vy;
        if (std::abs(r0x) + std::abs(r0y) >= std::abs(r1x) + std::abs(r1y)) {
            vx = -r0y; vy = r0x;
        } else {
            vx = -r1y; vy = r1x;
        }
        const double n = std::sqrt(std::norm(vx) + std::norm(vy));
        e.vec[0][k] = vx / n;
        e.vec[1][k] = vy / n;
    }
    return e;
}

/// Solve the complex 2x2 system (a - mu I) u = rhs.
inline void solve_shifted2(const Mat2& a, std::complex<double> mu,
                           const std::complex<double> rhs[2], std::complex<double> u[2]) {
    const std::complex<double> m00 = a.m[0][0] - mu, m01 = a.m[0][1];
    const std::complex<double> m10 = a.m[1][0], m11 = a.m[1][1] - mu;
    const std::complex<double> d = m00 * m11 - m01 * m10;
    const double scale = std::abs(m00) + std::abs(m01) + std::abs(m10) + std::abs(m11);
    if (std::abs(d) <= 1e-14 * scale * scale)
        throw std::runtime_error("solve_shifted2: shifted matrix is singular (resonant eigenvalue)");
    u[0] = (rhs[0] * m11 - rhs[1] * m01) / d;
    u[1] = (m00 * rhs[1] - m10 * rhs[0]) / d;
}

/// Eigenvalues and eigenvectors of a symmetric 2x2 (Hessian classification).
struct SymEig2 {
    double lambda[2];
    Vec2 vec[2];
};

inline SymEig2 eigen_sym2(const Mat2& a) {
    SymEig2 e;
    const double b = 0.5 * (a.m[0][1] + a.m[1][0]);
    const double tr = trace(a);
    const double d = std::sqrt(std::max(0.0, 0.25 * (a.m[0][0] - a.m[1][1]) * (a.m[0][0] - a.m[1][1]) + b * b));
    e.lambda[0] = tr / 2.0 + d;
    e.lambda[1] = tr / 2.0 - d;
    if (d <= 1e-300) {
        e.vec[0] = {1.0, 0.0};
        e.vec[1] = {0.0, 1.0};
        return e;
    }
    for (int k = 0; k < 2; ++k) {
        Vec2 v;
        const double r0 = std::abs(a.m[0][0] - e.lambda[k]) + std::abs(b);
        const double r1 = std::abs(b) + std::abs(a.m[1][1] - e.lambda[k]);
        if (r0 >= r1)
            v = {-b, a.m[0][0] - e.lambda[k]};
        else
            v = {a.m[1][1] - e.lambda[k], -b};
        const double n = norm(v);
        e.vec[k] = n > 0 ? v / n : Vec2{1.0, 0.0};
    }
    return e;
}

}  // namespace fwescape
