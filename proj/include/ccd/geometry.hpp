#pragma once

// Angles between fitted lines, the CCD angle, and per-femur measurement.

#include "ccd/error.hpp"
#include "ccd/heatmap.hpp"
#include "ccd/line.hpp"
#include "ccd/robust_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>

namespace ccd {

using Segment = std::pair<Point2, Point2>;

/// Angle between two lines in degrees, folded into [0, 90].
inline double undirected_angle(const Line2D& a, const Line2D& b) {
    const double deg = direction_gap(a, b) * 180.0 / std::numbers::pi;
    return deg > 90.0 ? 90.0 : deg;
}

/// CCD angle in degrees: 180 minus the undirected neck/shaft angle.
/// Parallel lines give exactly 180, see is_degenerate_ccd().
inline double ccd_angle(const Line2D& neck, const Line2D& shaft) { return 180.0 - undirected_angle(neck, shaft); }

inline bool is_degenerate_ccd(double ccd_degrees) { return ccd_degrees >= 180.0; }

inline Line2D line_from_endpoints(Point2 p1, Point2 p2) {
    if (p1 == p2) {
        throw Error(ErrorKind::Degenerate, "line endpoints coincide");
    }
    return Line2D(p1, p2 - p1);
}

inline Line2D line_from_segment(const Segment& s) { return line_from_endpoints(s.first, s.second); }

/// Visible segment: the cloud's extreme projections onto the line.
template <std::ranges::forward_range R>
    requires PlanarPoint<std::ranges::range_value_t<R>>
Segment endpoints_for_display(const Line2D& line, const R& cloud) {
    bool any = false;
    double lo = 0.0, hi = 0.0;
    for (const auto& p : cloud) {
        const double t = line.project(to_point(p));
        if (!any) {
            lo = hi = t;
            any = true;
        } else {
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
    }
    if (!any) throw Error(ErrorKind::EmptyCloud, "endpoints_for_display: empty cloud");
    return {line.at(lo), line.at(hi)};
}

/// Thresholded cloud of one channel together with its robust fit.
struct ChannelFit {
    ChannelName channel;
    PointCloud cloud;
    FitResult fit;

    /// Inlier points only.
    std::vector<Point2> inliers() const {
        std::vector<Point2> out;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (fit.inlier_flags[i]) out.push_back({cloud[i].x, cloud[i].y});
        }
        return out;
    }
};

/// Thresholds and fits one channel. Fit failures are rethrown with the channel label attached.
inline ChannelFit fit_channel(const ChannelRaster& raster, const RansacConfig& config, double cutoff) {
    ChannelFit out{raster.name(), threshold_points(raster, cutoff), {}};
    const auto points = to_points(out.cloud);
    try {
        out.fit = ransac_fit(points, config);
    } catch (const FitFailedError& e) {
        throw FitFailedError(raster.name().label() + ": " + e.what(), e.best_count());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::TooFewPoints) {
            throw FitFailedError(raster.name().label() + ": " + e.what(), 0);
        }
        throw;
    }
    return out;
}

struct FemurMeasurement {
    Side side = Side::Left;
    Line2D neck_centerline;
    Line2D shaft_centerline;
    double ccd_degrees = 0.0;
    bool degenerate = false;  ///< neck and shaft parallel (CCD == 180)
    Segment neck_endpoints;
    Segment shaft_endpoints;
    std::size_t neck_inliers = 0;
    std::size_t shaft_inliers = 0;
};

inline const ChannelRaster& require_channel(const Heatmap& heatmap, const ChannelName& name) {
    const ChannelRaster* raster = heatmap.find(name);
    if (raster == nullptr) {
        throw Error(ErrorKind::MissingChannel, "missing channel \"" + name.label() + "\"");
    }
    return *raster;
}

/// Assembles a measurement from two fitted centerline channels.
inline FemurMeasurement measurement_from_fits(Side side, const ChannelFit& neck, const ChannelFit& shaft) {
    FemurMeasurement m;
    m.side = side;
    m.neck_centerline = neck.fit.line;
    m.shaft_centerline = shaft.fit.line;
    m.ccd_degrees = ccd_angle(m.neck_centerline, m.shaft_centerline);
    m.degenerate = is_degenerate_ccd(m.ccd_degrees);
    m.neck_endpoints = endpoints_for_display(m.neck_centerline, neck.inliers());
    m.shaft_endpoints = endpoints_for_display(m.shaft_centerline, shaft.inliers());
    m.neck_inliers = neck.fit.inlier_count;
    m.shaft_inliers = shaft.fit.inlier_count;
    return m;
}

/// Fits the side's neck and shaft centerlines and measures the CCD angle.
inline FemurMeasurement measure_femur(const Heatmap& heatmap, Side side, const RansacConfig& config = {},
                                      double cutoff = kDefaultCutoff) {
    const auto& neck_raster = require_channel(heatmap, neck_centerline(side));
    const auto& shaft_raster = require_channel(heatmap, shaft_centerline(side));
    const auto neck = fit_channel(neck_raster, config, cutoff);
    const auto shaft = fit_channel(shaft_raster, config, cutoff);
    return measurement_from_fits(side, neck, shaft);
}

} // namespace ccd
