#pragma once

// Small fixed-size linear algebra for maps of the 2-torus R^2/Z^2.
// Everything is templated on the scalar so the exponent computations can run
// in extended precision while the public interfaces stay in double.

#include <cmath>
#include <stdexcept>

namespace anosov {

template <class S>
struct Vec2T {
    S x = 0, y = 0;

    Vec2T() = default;
    Vec2T(S x_, S y_) : x(x_), y(y_) {}

    Vec2T operator+(const Vec2T& o) const { return {x + o.x, y + o.y}; }
    Vec2T operator-(const Vec2T& o) const { return {x - o.x, y - o.y}; }
    Vec2T operator*(S c) const { return {x * c, y * c}; }

    S dot(const Vec2T& o) const { return x * o.x + y * o.y; }
    S norm() const { return std::sqrt(x * x + y * y); }

    Vec2T normalized() const {
        S n = norm();
        if (n == 0) throw std::domain_error("cannot normalize zero vector");
        return {x / n, y / n};
    }

    // counterclockwise quarter turn
    Vec2T perp() const { return {-y, x}; }

    template <class U>
    Vec2T<U> cast() const { return {static_cast<U>(x), static_cast<U>(y)}; }
};

template <class S>
struct Mat2T {
    // row-major: [[a, b], [c, d]]
    S a = 1, b = 0, c = 0, d = 1;

    Mat2T() = default;
    Mat2T(S a_, S b_, S c_, S d_) : a(a_), b(b_), c(c_), d(d_) {}

    Vec2T<S> operator*(const Vec2T<S>& v) const {
        return {a * v.x + b * v.y, c * v.x + d * v.y};
    }
    Mat2T operator*(const Mat2T& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2T operator+(const Mat2T& o) const {
        return {a + o.a, b + o.b, c + o.c, d + o.d};
    }

    S det() const { return a * d - b * c; }
    S trace() const { return a + d; }

    Mat2T inverse() const {
        S dt = det();
        if (dt == 0) throw std::domain_error("singular 2x2 matrix");
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    Mat2T transpose() const { return {a, c, b, d}; }

    // operator norm (largest singular value)
    S op_norm() const {
        S g11 = a * a + c * c, g22 = b * b + d * d, g12 = a * b + c * d;
        S tr = g11 + g22, dis = std::sqrt((g11 - g22) * (g11 - g22) + 4 * g12 * g12);
        return std::sqrt((tr + dis) / 2);
    }

    template <class U>
    Mat2T<U> cast() const {
        return {static_cast<U>(a), static_cast<U>(b),
                static_cast<U>(c), static_cast<U>(d)};
    }
};

using Vec2 = Vec2T<double>;
using Mat2 = Mat2T<double>;
using Vec2L = Vec2T<long double>;
using Mat2L = Mat2T<long double>;

// Reduce a coordinate to the fundamental domain [0,1).  Values within 1e-15
// of the upper edge are snapped to 0 so that grid points computed two ways
// land on the same representative.
template <class S>
inline S mod1(S x) {
    S y = x - std::floor(x);
    if (y >= S(1) - S(1e-15)) y = 0;
    if (y < 0) y = 0;  // guards -0.0 and rounding of floor at the edge
    return y;
}

template <class S>
inline Vec2T<S> mod1(const Vec2T<S>& v) {
    return {mod1(v.x), mod1(v.y)};
}

// Distance on the torus: shortest representative per coordinate.
template <class S>
inline S torus_dist(const Vec2T<S>& u, const Vec2T<S>& v) {
    S dx = std::fabs(mod1(u.x - v.x));
    S dy = std::fabs(mod1(u.y - v.y));
    if (dx > S(0.5)) dx = 1 - dx;
    if (dy > S(0.5)) dy = 1 - dy;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace anosov
