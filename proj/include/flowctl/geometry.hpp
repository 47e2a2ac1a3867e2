#pragma once

#include <cmath>

namespace flowctl {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double norm_sq(Vec2 v) { return v.x * v.x + v.y * v.y; }

// counterclockwise quarter turn: J v with J = [[0,-1],[1,0]]
inline Vec2 rotate90(Vec2 v) { return {-v.y, v.x}; }

// 2x2 matrix, row major
struct Mat2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    Mat2 operator+(const Mat2& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
    Mat2 operator-(const Mat2& o) const { return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22}; }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a21; }
    Mat2 transposed() const { return {a11, a21, a12, a22}; }
};

// max(|a_ij|)-based operator-norm surrogate used for sup-constant estimation:
// the Frobenius norm, an upper bound for the spectral norm.
inline double frob_norm(const Mat2& m) {
    return std::sqrt(m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22);
}

// spectral norm (largest singular value) of a 2x2, closed form
inline double spectral_norm(const Mat2& m) {
    // singular values of [[a,b],[c,d]]: s^2 = (q1 +- sqrt(q1^2 - 4 q2^2)) / 2
    // with q1 = a^2+b^2+c^2+d^2, q2 = det
    const double q1 = m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22;
    const double q2 = m.det();
    const double disc = std::sqrt(std::max(0.0, q1 * q1 - 4.0 * q2 * q2));
    return std::sqrt(0.5 * (q1 + disc));
}

// axis-aligned rectangle
struct Rect {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;

    bool contains(Vec2 p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double diagonal() const { return std::hypot(width(), height()); }
    Vec2 clamp(Vec2 p) const {
        return {std::fmin(std::fmax(p.x, x_min), x_max),
                std::fmin(std::fmax(p.y, y_min), y_max)};
    }
};

} // namespace flowctl
