#pragma once

#include <cmath>

namespace mgpi {

/// 2D vector in scene units (positions) or unitless (directions).
struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(Vec2 r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }

    constexpr double dot(Vec2 r) const { return x * r.x + y * r.y; }
    double norm() const { return std::sqrt(x * x + y * y); }

    /// Caller guarantees norm() > 0.
    Vec2 normalized() const {
        const double n = norm();
        return {x / n, y / n};
    }

    bool is_finite() const { return std::isfinite(x) && std::isfinite(y); }
    bool is_unit(double tol = 1e-9) const { return std::abs(norm() - 1.0) <= tol; }
};

}  // namespace mgpi
