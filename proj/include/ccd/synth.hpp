#pragma once

// Synthetic studies with known femur geometry. They stand in for network
// output when checking the fitting and evaluation pipeline end to end.

#include "ccd/error.hpp"
#include "ccd/geometry.hpp"
#include "ccd/heatmap.hpp"
#include "ccd/manifest.hpp"
#include "ccd/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace ccd {

struct SyntheticSpec {
    int width = 512;
    int height = 512;
    double sigma = 3.0;             ///< Gaussian line half-width, px
    double outlier_fraction = 0.0;  ///< outliers per channel, as a fraction of the clean band's pixel count
    double blur_noise = 0.0;        ///< uniform noise amplitude
    std::uint64_t seed = 0;
    int cases = 1;

    void validate() const {
        if (width < 128 || height < 128) throw Error(ErrorKind::InvalidArgument, "synthetic raster must be >= 128x128");
        if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be > 0");
        if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "outlier_fraction must lie in [0, 1)");
        }
        if (!(blur_noise >= 0.0 && blur_noise <= 0.1)) {
            throw Error(ErrorKind::InvalidArgument, "blur_noise must lie in [0, 0.1]");
        }
        if (cases < 1) throw Error(ErrorKind::InvalidArgument, "cases must be positive");
    }
};

inline constexpr double kMinSyntheticCcd = 110.0;
inline constexpr double kMaxSyntheticCcd = 145.0;
inline constexpr double kMaxShaftTiltDeg = 15.0;
inline constexpr double kBorderOffset = 8.0;  // medial/lateral offset from the centerline, px

struct SideTruth {
    Segment neck;
    Segment shaft;
    double ccd = 0.0;
};

struct GroundTruth {
    std::optional<SideTruth> left;
    std::optional<SideTruth> right;

    const std::optional<SideTruth>& side(Side s) const { return s == Side::Left ? left : right; }
    std::optional<SideTruth>& side(Side s) { return s == Side::Left ? left : right; }
};

struct GroundTruthCase {
    Heatmap heatmap;
    GroundTruth truth;
};

inline double point_segment_distance(Point2 p, const Segment& s) {
    const Point2 d = s.second - s.first;
    const double len2 = dot(d, d);
    double t = dot(p - s.first, d) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, s.first + t * d);
}

/// Gaussian line heatmap: exp(-d^2 / (2 sigma^2)) with d the pixel-center distance to the segment.
inline ChannelRaster render_line_heatmap(const Segment& segment, double sigma, int width, int height,
                                         ChannelName name = {}) {
    if (segment.first == segment.second) {
        throw Error(ErrorKind::Degenerate, "render_line_heatmap: segment endpoints coincide");
    }
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "render_line_heatmap: sigma must be > 0");
    ChannelRaster raster(name, width, height);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double d = point_segment_distance({static_cast<double>(x), static_cast<double>(y)}, segment);
            raster.set(x, y, std::exp(-d * d * inv));
        }
    }
    return raster;
}

/// Half-width of the band that survives `cutoff` on a Gaussian profile.
inline double band_half_width(double sigma, double cutoff) { return sigma * std::sqrt(-2.0 * std::log(cutoff)); }

namespace detail {

inline Segment offset_segment(const Segment& s, Point2 offset) { return {s.first + offset, s.second + offset}; }

/// Unit normal of the segment pointing toward `toward_x` (+1 or -1); ties go downward.
inline Point2 oriented_normal(const Segment& s, double toward_x) {
    const Point2 d = s.second - s.first;
    const double len = norm(d);
    Point2 n{-d.y / len, d.x / len};
    if (n.x * toward_x < 0.0 || (n.x == 0.0 && n.y < 0.0)) n = {-n.x, -n.y};
    return n;
}

struct SideGeometry {
    SideTruth truth;
    double medial_sign = 1.0;
};

// Right femur sits on the image's left half (radiological convention), so its
// medial direction is +x; the left femur mirrors it.
inline SideGeometry draw_side(Rng& rng, Side side, int width, int height) {
    const double scale = std::min(width, height) / 512.0;
    const double medial = side == Side::Right ? 1.0 : -1.0;
    const double cx = (side == Side::Right ? 0.3 : 0.7) * width;
    const Point2 junction{cx + uniform_real(rng, -15.0, 15.0) * scale,
                          0.38 * height + uniform_real(rng, -15.0, 15.0) * scale};

    const double tilt = uniform_real(rng, -kMaxShaftTiltDeg, kMaxShaftTiltDeg) * std::numbers::pi / 180.0;
    const Point2 up{std::sin(tilt), -std::cos(tilt)};
    const Point2 across{std::cos(tilt), std::sin(tilt)};
    const double shaft_len = uniform_real(rng, 200.0, 240.0) * scale;
    const Segment shaft{junction + (25.0 * scale) * up, junction - shaft_len * up};

    const double target_ccd = uniform_real(rng, kMinSyntheticCcd, kMaxSyntheticCcd);
    const double alpha = (180.0 - target_ccd) * std::numbers::pi / 180.0;
    const Point2 neck_dir = std::cos(alpha) * up + (std::sin(alpha) * medial) * across;
    const double neck_len = uniform_real(rng, 80.0, 110.0) * scale;
    const Segment neck{junction, junction + neck_len * neck_dir};

    SideGeometry g;
    g.medial_sign = medial;
    g.truth.neck = neck;
    g.truth.shaft = shaft;
    g.truth.ccd = ccd_angle(line_from_segment(neck), line_from_segment(shaft));
    return g;
}

inline Segment channel_segment(const SideGeometry& g, Structure structure) {
    const bool neck = structure == Structure::NeckMedial || structure == Structure::NeckCenterline ||
                      structure == Structure::NeckLateral;
    const Segment& center = neck ? g.truth.neck : g.truth.shaft;
    const Point2 n = oriented_normal(center, g.medial_sign);
    switch (structure) {
    case Structure::NeckMedial:
    case Structure::ShaftMedial: return offset_segment(center, kBorderOffset * n);
    case Structure::NeckLateral:
    case Structure::ShaftLateral: return offset_segment(center, -kBorderOffset * n);
    default: return center;
    }
}

inline void corrupt(ChannelRaster& raster, Rng& rng, const SyntheticSpec& spec, double cutoff) {
    std::size_t band = 0;
    for (double v : raster.values()) band += v > cutoff ? 1 : 0;
    if (spec.blur_noise > 0.0) {
        for (int y = 0; y < raster.height(); ++y) {
            for (int x = 0; x < raster.width(); ++x) {
                raster.set(x, y, raster.at(x, y) + uniform_real(rng, -spec.blur_noise, spec.blur_noise));
            }
        }
    }
    const auto outliers = static_cast<std::size_t>(std::llround(spec.outlier_fraction * static_cast<double>(band)));
    for (std::size_t k = 0; k < outliers; ++k) {
        const auto x = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(raster.width())));
        const auto y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(raster.height())));
        // (0.9, 1.0]
        raster.set(x, y, 1.0 - 0.1 * uniform01(rng));
    }
}

} // namespace detail

/// Builds one synthetic two-sided study; deterministic in (spec.seed, case_index).
inline GroundTruthCase generate_case(const SyntheticSpec& spec, std::uint64_t case_index) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, case_index));
    const auto right = detail::draw_side(rng, Side::Right, spec.width, spec.height);
    const auto left = detail::draw_side(rng, Side::Left, spec.width, spec.height);

    GroundTruthCase out{Heatmap(spec.width, spec.height), {}};
    out.truth.left = left.truth;
    out.truth.right = right.truth;
    for (const ChannelName& name : all_channel_names()) {
        const auto& g = name.side == Side::Left ? left : right;
        auto raster =
            render_line_heatmap(detail::channel_segment(g, name.structure), spec.sigma, spec.width, spec.height, name);
        detail::corrupt(raster, rng, spec, kDefaultCutoff);
        out.heatmap.add_channel(std::move(raster));
    }
    return out;
}

// truth.json: {"left":{"neck":[[x,y],[x,y]],"shaft":[[x,y],[x,y]],"ccd":number},"right":{...}}

inline nlohmann::ordered_json truth_to_json(const GroundTruth& truth) {
    auto seg = [](const Segment& s) {
        return nlohmann::ordered_json::array({{s.first.x, s.first.y}, {s.second.x, s.second.y}});
    };
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (Side side : {Side::Left, Side::Right}) {
        if (const auto& t = truth.side(side)) {
            doc[std::string(side_key(side))] = {{"neck", seg(t->neck)}, {"shaft", seg(t->shaft)}, {"ccd", t->ccd}};
        }
    }
    return doc;
}

inline GroundTruth truth_from_json(const nlohmann::json& doc) {
    auto point = [](const nlohmann::json& p) -> Point2 {
        if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::Parse, "truth point must be [x, y]");
        return {p[0].get<double>(), p[1].get<double>()};
    };
    auto seg = [&](const nlohmann::json& s) -> Segment {
        if (!s.is_array() || s.size() != 2) throw Error(ErrorKind::Parse, "truth segment must be two points");
        return {point(s[0]), point(s[1])};
    };
    if (!doc.is_object()) throw Error(ErrorKind::Parse, "truth document must be an object");
    GroundTruth truth;
    try {
        for (Side side : {Side::Left, Side::Right}) {
            const std::string key(side_key(side));
            if (!doc.contains(key)) continue;
            const auto& entry = doc[key];
            truth.side(side) = SideTruth{seg(entry.at("neck")), seg(entry.at("shaft")), entry.at("ccd").get<double>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed truth: ") + e.what());
    }
    return truth;
}

inline GroundTruth load_truth(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::Io, "truth file not found: " + path.string());
    }
    try {
        return truth_from_json(detail::read_json_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Parse) throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
        throw;
    }
}

inline void save_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << truth_to_json(truth).dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

inline std::string case_directory_name(std::uint64_t case_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "case_%04llu", static_cast<unsigned long long>(case_index));
    return buf;
}

/// Writes `spec.cases` study directories (manifest.json, 12 channel PNGs,
/// truth.json) under `out_dir`; returns the manifest paths in case order.
inline std::vector<std::filesystem::path> write_dataset(const SyntheticSpec& spec, const std::filesystem::path& out_dir,
                                                        unsigned threads = 0) {
    spec.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

    const auto n = static_cast<std::size_t>(spec.cases);
    std::vector<std::filesystem::path> manifests(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                const auto dir = out_dir / case_directory_name(i);
                const auto c = generate_case(spec, i);
                manifests[i] = save_heatmap(c.heatmap, dir);
                save_truth(c.truth, dir / "truth.json");
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return manifests;
}

} // namespace ccd
