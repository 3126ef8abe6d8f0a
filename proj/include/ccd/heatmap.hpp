#pragma once

#include "ccd/error.hpp"
#include "ccd/point.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ccd {

/// Default probability cutoff applied to network output before fitting.
inline constexpr double kDefaultCutoff = 0.9;

enum class Side { Left, Right };

enum class Structure {
    NeckMedial,
    NeckCenterline,
    NeckLateral,
    ShaftMedial,
    ShaftCenterline,
    ShaftLateral,
};

inline constexpr std::array<Side, 2> kSides{Side::Left, Side::Right};
inline constexpr std::array<Structure, 6> kStructures{
    Structure::NeckMedial,  Structure::NeckCenterline,  Structure::NeckLateral,
    Structure::ShaftMedial, Structure::ShaftCenterline, Structure::ShaftLateral,
};

inline std::string_view to_string(Side side) { return side == Side::Left ? "Left" : "Right"; }

/// Lowercase form used in manifests and JSON payloads.
inline std::string_view side_key(Side side) { return side == Side::Left ? "left" : "right"; }

inline std::optional<Side> parse_side(std::string_view text) {
    if (text == "left" || text == "Left") return Side::Left;
    if (text == "right" || text == "Right") return Side::Right;
    return std::nullopt;
}

inline Side opposite(Side side) { return side == Side::Left ? Side::Right : Side::Left; }

/// One of the twelve line channels (3 lines x neck/shaft x left/right).
struct ChannelName {
    Side side = Side::Left;
    Structure structure = Structure::NeckCenterline;

    friend auto operator<=>(const ChannelName&, const ChannelName&) = default;

    /// Canonical annotation label, e.g. "Femoral Neck Centerline Left".
    std::string label() const {
        std::string out = "Femoral ";
        switch (structure) {
        case Structure::NeckMedial: out += "Neck Medial"; break;
        case Structure::NeckCenterline: out += "Neck Centerline"; break;
        case Structure::NeckLateral: out += "Neck Lateral"; break;
        case Structure::ShaftMedial: out += "Shaft Medial"; break;
        case Structure::ShaftCenterline: out += "Shaft Centerline"; break;
        case Structure::ShaftLateral: out += "Shaft Lateral"; break;
        }
        out += ' ';
        out += to_string(side);
        return out;
    }

    static std::optional<ChannelName> parse(std::string_view label);
};

inline std::array<ChannelName, 12> all_channel_names() {
    std::array<ChannelName, 12> names{};
    std::size_t i = 0;
    for (Side side : kSides) {
        for (Structure s : kStructures) {
            names[i++] = ChannelName{side, s};
        }
    }
    return names;
}

inline std::optional<ChannelName> ChannelName::parse(std::string_view label) {
    for (const ChannelName& name : all_channel_names()) {
        if (name.label() == label) return name;
    }
    return std::nullopt;
}

inline ChannelName neck_centerline(Side side) { return {side, Structure::NeckCenterline}; }
inline ChannelName shaft_centerline(Side side) { return {side, Structure::ShaftCenterline}; }

/// A single probability raster, row-major, values in [0, 1].
class ChannelRaster {
public:
    ChannelRaster() = default;

    ChannelRaster(ChannelName name, int width, int height)
        : name_(name), width_(width), height_(height) {
        if (width <= 0 || height <= 0) {
            throw Error(ErrorKind::InvalidArgument, "raster dimensions must be positive");
        }
        values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
    }

    ChannelRaster(ChannelName name, int width, int height, std::vector<double> values)
        : name_(name), width_(width), height_(height), values_(std::move(values)) {
        if (width <= 0 || height <= 0) {
            throw Error(ErrorKind::InvalidArgument, "raster dimensions must be positive");
        }
        if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw Error(ErrorKind::DimensionMismatch, "raster value count does not match width x height");
        }
        for (double v : values_) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw Error(ErrorKind::OutOfRange, "probability outside [0,1] in " + name_.label());
            }
        }
    }

    const ChannelName& name() const { return name_; }
    int width() const { return width_; }
    int height() const { return height_; }
    std::span<const double> values() const { return values_; }

    double at(int x, int y) const { return values_[index(x, y)]; }

    /// Writes one pixel; the value is clamped into [0, 1].
    void set(int x, int y, double v) { values_[index(x, y)] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

    bool same_shape(const ChannelRaster& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const ChannelRaster&, const ChannelRaster&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    ChannelName name_{};
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// Multi-channel line-probability heatmap for one radiograph.
class Heatmap {
public:
    Heatmap() = default;
    Heatmap(int width, int height) : width_(width), height_(height) {
        if (width <= 0 || height <= 0) {
            throw Error(ErrorKind::InvalidArgument, "heatmap dimensions must be positive");
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<ChannelRaster>& channels() const { return channels_; }

    const std::optional<std::filesystem::path>& image() const { return image_; }
    void set_image(std::optional<std::filesystem::path> image) { image_ = std::move(image); }

    void add_channel(ChannelRaster raster) {
        if (raster.width() != width_ || raster.height() != height_) {
            throw Error(ErrorKind::DimensionMismatch,
                        "channel " + raster.name().label() + " is " + std::to_string(raster.width()) + "x" +
                            std::to_string(raster.height()) + ", heatmap is " + std::to_string(width_) + "x" +
                            std::to_string(height_));
        }
        if (find(raster.name()) != nullptr) {
            throw Error(ErrorKind::InvalidArgument, "duplicate channel " + raster.name().label());
        }
        channels_.push_back(std::move(raster));
    }

    const ChannelRaster* find(const ChannelName& name) const {
        for (const auto& c : channels_) {
            if (c.name() == name) return &c;
        }
        return nullptr;
    }

    bool has_side(Side side) const {
        for (const auto& c : channels_) {
            if (c.name().side == side) return true;
        }
        return false;
    }

    friend bool operator==(const Heatmap& a, const Heatmap& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.channels_ == b.channels_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<ChannelRaster> channels_;
    std::optional<std::filesystem::path> image_;
};

/// A thresholded pixel: column, row, and its probability.
struct CloudPoint {
    double x = 0.0;
    double y = 0.0;
    double weight = 0.0;

    friend bool operator==(const CloudPoint&, const CloudPoint&) = default;
};

using PointCloud = std::vector<CloudPoint>;

/// Pixels whose value strictly exceeds `cutoff`, in row-major order.
inline PointCloud threshold_points(const ChannelRaster& channel, double cutoff = kDefaultCutoff) {
    if (!(cutoff >= 0.0 && cutoff < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "cutoff must lie in [0, 1)");
    }
    PointCloud cloud;
    for (int y = 0; y < channel.height(); ++y) {
        for (int x = 0; x < channel.width(); ++x) {
            const double v = channel.at(x, y);
            if (v > cutoff) {
                cloud.push_back({static_cast<double>(x), static_cast<double>(y), v});
            }
        }
    }
    return cloud;
}

/// Unweighted mean of the cloud's coordinates.
inline Point2 centroid(std::span<const CloudPoint> cloud) {
    if (cloud.empty()) {
        throw Error(ErrorKind::EmptyCloud, "centroid of an empty point cloud");
    }
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& p : cloud) {
        sx += p.x;
        sy += p.y;
    }
    const auto n = static_cast<double>(cloud.size());
    return {sx / n, sy / n};
}

/// Distance between the centroids of two clouds.
///
/// Evaluated as (Sa * nb - Sb * na) / (na * nb), which is exact for clouds of
/// integer pixel coordinates, so an integer shift of a mask yields exactly the
/// shift length.
inline double centroid_distance(std::span<const CloudPoint> a, std::span<const CloudPoint> b) {
    if (a.empty() || b.empty()) {
        throw Error(ErrorKind::EmptyCloud, "centroid of an empty point cloud");
    }
    double ax = 0.0, ay = 0.0, bx = 0.0, by = 0.0;
    for (const auto& p : a) {
        ax += p.x;
        ay += p.y;
    }
    for (const auto& p : b) {
        bx += p.x;
        by += p.y;
    }
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    const double dx = (ax * nb - bx * na) / (na * nb);
    const double dy = (ay * nb - by * na) / (na * nb);
    return std::hypot(dx, dy);
}

/// Pixel-wise mean squared error between two rasters of equal size.
inline double heatmap_mse(const ChannelRaster& predicted, const ChannelRaster& target) {
    if (!predicted.same_shape(target)) {
        throw Error(ErrorKind::DimensionMismatch, "heatmap_mse: raster sizes differ");
    }
    const auto p = predicted.values();
    const auto t = target.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - t[i];
        sum += d * d;
    }
    return sum / static_cast<double>(p.size());
}

} // namespace ccd
