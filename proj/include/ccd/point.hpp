#pragma once

#include <cmath>
#include <concepts>

namespace ccd {

/// Pixel-space position. x is the column, y the row; origin is the top-left pixel center.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Anything exposing numeric `x` and `y` members can be fitted.
template <typename P>
concept PlanarPoint = requires(const P& p) {
    { p.x } -> std::convertible_to<double>;
    { p.y } -> std::convertible_to<double>;
};

template <PlanarPoint P>
Point2 to_point(const P& p) {
    return {static_cast<double>(p.x), static_cast<double>(p.y)};
}

} // namespace ccd
