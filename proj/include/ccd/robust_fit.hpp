#pragma once

// Seeded RANSAC line fitting with Huber-loss refinement of the consensus set.

#include "ccd/error.hpp"
#include "ccd/line.hpp"
#include "ccd/point.hpp"
#include "ccd/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ranges>
#include <span>
#include <string>
#include <vector>

namespace ccd {

struct RansacConfig {
    double residual_threshold = 2.0;  ///< px; inlier band half-width
    int max_iterations = 200;
    std::uint64_t seed = 0;
    int min_inliers = 10;
    double huber_delta = 1.35;  ///< Huber threshold in units of the robust residual scale
    bool huber_refinement = true;

    void validate() const {
        if (!(residual_threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "residual_threshold must be > 0");
        if (max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
        if (min_inliers < 2) throw Error(ErrorKind::InvalidArgument, "min_inliers must be >= 2");
        if (!(huber_delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "huber_delta must be > 0");
    }
};

struct FitResult {
    Line2D line;
    std::vector<bool> inlier_flags;
    std::size_t inlier_count = 0;
    /// Sampling rounds that produced a candidate line (degenerate pairs excluded).
    int iterations_run = 0;

    friend bool operator==(const FitResult&, const FitResult&) = default;
};

/// Undirected angle in radians between two line directions, in [0, pi/2].
inline double direction_gap(const Line2D& a, const Line2D& b) {
    return std::atan2(std::abs(cross(a.direction(), b.direction())), std::abs(dot(a.direction(), b.direction())));
}

inline constexpr int kMaxRefitRounds = 10;
inline constexpr int kHuberMaxIterations = 100;
inline constexpr double kHuberAngleTolerance = 1e-9;   // rad
inline constexpr double kHuberAnchorTolerance = 1e-9;  // px
inline constexpr double kMinResidualScale = 1e-9;      // px

namespace detail {

/// Robust residual scale: median absolute residual / 0.6745.
inline double residual_scale(std::vector<double> residuals) {
    const auto mid = residuals.begin() + static_cast<std::ptrdiff_t>(residuals.size() / 2);
    std::nth_element(residuals.begin(), mid, residuals.end());
    double median = *mid;
    if (residuals.size() % 2 == 0) median = 0.5 * (median + *std::max_element(residuals.begin(), mid));
    return std::max(median / 0.6745, kMinResidualScale);
}

} // namespace detail

/// Minimizes the summed Huber loss of orthogonal residuals over the flagged
/// points by iteratively reweighted total least squares, starting at `initial`.
/// The quadratic/linear switch sits at `delta` times the robust residual scale
/// of the current iterate, so `delta` is unitless (1.35 is the usual choice).
inline Line2D huber_refine(std::span<const Point2> points, const std::vector<bool>& inlier_flags,
                           const Line2D& initial, double delta) {
    if (inlier_flags.size() != points.size()) {
        throw Error(ErrorKind::InvalidArgument, "huber_refine: one flag per point required");
    }
    if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "huber_refine: delta must be > 0");

    std::vector<Point2> inliers;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (inlier_flags[i]) inliers.push_back(points[i]);
    }
    if (inliers.size() < 2) {
        throw Error(ErrorKind::TooFewPoints, "huber_refine needs at least 2 inliers");
    }

    Line2D current = initial;
    for (int iter = 0; iter < kHuberMaxIterations; ++iter) {
        double wsum = 0.0, wx = 0.0, wy = 0.0;
        std::vector<double> residuals(inliers.size());
        for (std::size_t i = 0; i < inliers.size(); ++i) residuals[i] = residual(current, inliers[i]);
        const double threshold = delta * detail::residual_scale(residuals);
        std::vector<double> weights(inliers.size());
        for (std::size_t i = 0; i < inliers.size(); ++i) {
            const double r = residuals[i];
            weights[i] = r <= threshold ? 1.0 : threshold / r;
            wsum += weights[i];
            wx += weights[i] * inliers[i].x;
            wy += weights[i] * inliers[i].y;
        }
        const Point2 mean{wx / wsum, wy / wsum};
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < inliers.size(); ++i) {
            const Point2 d = inliers[i] - mean;
            sxx += weights[i] * d.x * d.x;
            sxy += weights[i] * d.x * d.y;
            syy += weights[i] * d.y * d.y;
        }
        if (sxx + syy == 0.0) {
            throw Error(ErrorKind::Degenerate, "huber_refine: inliers collapsed to a point");
        }
        const Line2D next(mean, detail::principal_axis(sxx, sxy, syy));
        if (direction_gap(current, next) < kHuberAngleTolerance &&
            distance(current.anchor(), next.anchor()) < kHuberAnchorTolerance) {
            return current;
        }
        current = next;
    }
    return current;
}

/// Fits one line to `points`: seeded two-point RANSAC, a total least-squares
/// fit on the best consensus set, then Huber refinement. Deterministic for a
/// given point order and config.
inline FitResult ransac_fit(std::span<const Point2> points, const RansacConfig& config = {}) {
    config.validate();
    const std::size_t n = points.size();
    const auto min_inliers = static_cast<std::size_t>(config.min_inliers);
    if (n < 2 || n < min_inliers) {
        throw FitFailedError("ransac_fit: " + std::to_string(n) + " points, need at least " +
                                 std::to_string(std::max<std::size_t>(2, min_inliers)),
                             0);
    }

    Rng rng(config.seed);
    std::size_t best_count = 0;
    std::vector<bool> best_flags;
    std::vector<bool> flags(n);
    int candidates = 0;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        const auto i = static_cast<std::size_t>(uniform_index(rng, n));
        auto j = static_cast<std::size_t>(uniform_index(rng, n - 1));
        if (j >= i) ++j;
        if (points[i] == points[j]) continue;

        ++candidates;
        const Line2D candidate(points[i], points[j] - points[i]);
        std::size_t count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            flags[k] = residual(candidate, points[k]) <= config.residual_threshold;
            count += flags[k] ? 1 : 0;
        }
        if (count > best_count) {
            best_count = count;
            best_flags = flags;
        }
    }

    if (best_count < min_inliers) {
        throw FitFailedError("ransac_fit: best consensus has " + std::to_string(best_count) + " inliers, need " +
                                 std::to_string(min_inliers),
                             best_count);
    }

    // Fit the consensus, then re-flag against the refined line and refit until
    // the inlier set stops changing. A near-band outlier can win the count on a
    // slightly tilted candidate; the refit drops it once the line settles.
    FitResult result;
    std::vector<bool> used = best_flags;
    for (int round = 0; round < kMaxRefitRounds; ++round) {
        std::vector<Point2> consensus;
        for (std::size_t k = 0; k < n; ++k) {
            if (used[k]) consensus.push_back(points[k]);
        }
        result.line = least_squares_line(consensus);
        if (config.huber_refinement) {
            result.line = huber_refine(points, used, result.line, config.huber_delta);
        }
        std::vector<bool> next(n);
        std::size_t count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            next[k] = residual(result.line, points[k]) <= config.residual_threshold;
            count += next[k] ? 1 : 0;
        }
        if (next == used || count < 2) break;
        used = std::move(next);
    }
    result.inlier_flags.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        result.inlier_flags[k] = residual(result.line, points[k]) <= config.residual_threshold;
        result.inlier_count += result.inlier_flags[k] ? 1 : 0;
    }
    result.iterations_run = candidates;
    if (result.inlier_count < min_inliers) {
        throw FitFailedError("ransac_fit: refined line keeps only " + std::to_string(result.inlier_count) +
                                 " inliers, need " + std::to_string(min_inliers),
                             result.inlier_count);
    }
    return result;
}

/// Drops the weights of a thresholded cloud.
template <std::ranges::input_range R>
    requires PlanarPoint<std::ranges::range_value_t<R>>
std::vector<Point2> to_points(const R& cloud) {
    std::vector<Point2> out;
    for (const auto& p : cloud) out.push_back(to_point(p));
    return out;
}

} // namespace ccd
