#pragma once

#include "ccd/error.hpp"
#include "ccd/point.hpp"

#include <cmath>
#include <cstddef>
#include <ranges>

namespace ccd {

/// Infinite 2-D line stored as an anchor point and a canonical unit direction.
///
/// Canonical sign: dy > 0, or dy == 0 and dx > 0. Every geometric line has a
/// single direction representation; the anchor is any point on the line.
class Line2D {
public:
    Line2D() = default;

    Line2D(Point2 anchor, Point2 direction) : anchor_(anchor) {
        const double len = norm(direction);
        if (!(len > 0.0) || !std::isfinite(len)) {
            throw Error(ErrorKind::Degenerate, "line direction must be a finite non-zero vector");
        }
        direction_ = canonical({direction.x / len, direction.y / len});
    }

    Point2 anchor() const { return anchor_; }
    Point2 direction() const { return direction_; }

    /// Unit normal, rotated +90 degrees from the direction.
    Point2 normal() const { return {-direction_.y, direction_.x}; }

    /// Signed orthogonal offset of `p` along the normal.
    double signed_distance(Point2 p) const { return cross(direction_, p - anchor_); }

    /// Scalar position of the projection of `p` along the direction.
    double project(Point2 p) const { return dot(p - anchor_, direction_); }

    Point2 at(double t) const { return anchor_ + t * direction_; }

    friend bool operator==(const Line2D&, const Line2D&) = default;

private:
    static Point2 canonical(Point2 d) {
        if (d.y < 0.0 || (d.y == 0.0 && d.x < 0.0)) return {-d.x, -d.y};
        // Fold -0.0 into +0.0 so equal lines compare equal.
        return {d.x + 0.0, d.y + 0.0};
    }

    Point2 anchor_{};
    Point2 direction_{1.0, 0.0};
};

/// Perpendicular distance from `p` to the line.
inline double residual(const Line2D& line, Point2 p) { return std::abs(line.signed_distance(p)); }

template <PlanarPoint P>
double residual(const Line2D& line, const P& p) {
    return residual(line, to_point(p));
}

namespace detail {

/// Principal axis of a weighted, centered 2x2 scatter matrix.
inline Point2 principal_axis(double sxx, double sxy, double syy) {
    if (sxy == 0.0 && sxx != syy) {
        return sxx > syy ? Point2{1.0, 0.0} : Point2{0.0, 1.0};
    }
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    return {std::cos(theta), std::sin(theta)};
}

} // namespace detail

/// Orthogonal (total) least-squares line through the points.
///
/// Anchor is the mean point, direction the principal axis of the centered
/// coordinates. Point weights, if any, are ignored.
template <std::ranges::forward_range R>
    requires PlanarPoint<std::ranges::range_value_t<R>>
Line2D least_squares_line(const R& points) {
    std::size_t n = 0;
    bool distinct = false;
    Point2 first{};
    double sx = 0.0, sy = 0.0;
    for (const auto& raw : points) {
        const Point2 p = to_point(raw);
        if (n == 0) {
            first = p;
        } else if (p != first) {
            distinct = true;
        }
        sx += p.x;
        sy += p.y;
        ++n;
    }
    if (n < 2 || !distinct) {
        throw Error(ErrorKind::TooFewPoints, "least-squares line needs at least 2 distinct points");
    }
    const Point2 mean{sx / static_cast<double>(n), sy / static_cast<double>(n)};
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& raw : points) {
        const Point2 d = to_point(raw) - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    return Line2D(mean, detail::principal_axis(sxx, sxy, syy));
}

} // namespace ccd
