#pragma once

// Heatmap manifest I/O.
//
//   {"version":1, "width":W, "height":H, "image": "<optional path>",
//    "channels":[{"name":"<canonical label>", "file":"<path>", "side":"left|right"}]}
//
// Channel files are 16-bit grayscale PNGs; probability = stored / 65535.
// Relative paths resolve against the manifest's directory.

#include "ccd/error.hpp"
#include "ccd/heatmap.hpp"
#include "ccd/png_io.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace ccd {

inline constexpr int kManifestVersion = 1;
inline constexpr double kQuantizationScale = 65535.0;

inline std::uint16_t quantize(double probability) {
    return static_cast<std::uint16_t>(std::lround(probability * kQuantizationScale));
}

inline double dequantize(std::uint16_t stored) { return static_cast<double>(stored) / kQuantizationScale; }

/// Rounds every value to the nearest representable 16-bit level.
inline ChannelRaster quantized(const ChannelRaster& raster) {
    std::vector<double> values(raster.values().begin(), raster.values().end());
    for (double& v : values) v = dequantize(quantize(v));
    return ChannelRaster(raster.name(), raster.width(), raster.height(), std::move(values));
}

inline Heatmap quantized(const Heatmap& heatmap) {
    Heatmap out(heatmap.width(), heatmap.height());
    out.set_image(heatmap.image());
    for (const auto& c : heatmap.channels()) out.add_channel(quantized(c));
    return out;
}

namespace detail {

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
    std::filesystem::path p(file);
    return p.is_absolute() ? p : base / p;
}

} // namespace detail

inline Heatmap load_heatmap(const std::filesystem::path& manifest_path) {
    if (!std::filesystem::exists(manifest_path)) {
        throw Error(ErrorKind::Io, "manifest not found: " + manifest_path.string());
    }
    const auto doc = detail::read_json_file(manifest_path);
    const auto base = manifest_path.parent_path();

    auto malformed = [&](const std::string& why) {
        return Error(ErrorKind::Parse, "malformed manifest " + manifest_path.string() + ": " + why);
    };

    if (!doc.is_object()) throw malformed("top level is not an object");
    if (!doc.contains("version") || !doc["version"].is_number_integer() || doc["version"].get<int>() != kManifestVersion) {
        throw malformed("unsupported or missing version");
    }
    if (!doc.contains("width") || !doc["width"].is_number_integer() || !doc.contains("height") ||
        !doc["height"].is_number_integer()) {
        throw malformed("width/height missing");
    }
    const int width = doc["width"].get<int>();
    const int height = doc["height"].get<int>();
    if (width <= 0 || height <= 0) throw malformed("width/height must be positive");
    if (!doc.contains("channels") || !doc["channels"].is_array()) throw malformed("channels array missing");

    Heatmap heatmap(width, height);
    if (doc.contains("image") && !doc["image"].is_null()) {
        if (!doc["image"].is_string()) throw malformed("image must be a path string");
        heatmap.set_image(detail::resolve(base, doc["image"].get<std::string>()));
    }

    for (const auto& entry : doc["channels"]) {
        if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() || !entry.contains("file") ||
            !entry["file"].is_string()) {
            throw malformed("channel entry needs string name and file");
        }
        const auto label = entry["name"].get<std::string>();
        const auto name = ChannelName::parse(label);
        if (!name) {
            throw Error(ErrorKind::UnknownChannel, "unknown channel name '" + label + "' in " + manifest_path.string());
        }
        if (entry.contains("side")) {
            const auto side = entry["side"].is_string() ? parse_side(entry["side"].get<std::string>()) : std::nullopt;
            if (!side || *side != name->side) {
                throw malformed("side field disagrees with channel '" + label + "'");
            }
        }
        const auto file = detail::resolve(base, entry["file"].get<std::string>());
        const auto image = png::read_gray(file);
        if (image.bit_depth != 16) {
            throw Error(ErrorKind::OutOfRange, "channel raster must be 16-bit: " + file.string());
        }
        if (image.width != width || image.height != height) {
            throw Error(ErrorKind::DimensionMismatch, "channel " + label + " raster is " + std::to_string(image.width) +
                                                          "x" + std::to_string(image.height) + ", manifest says " +
                                                          std::to_string(width) + "x" + std::to_string(height));
        }
        std::vector<double> values(image.samples.size());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = dequantize(image.samples[i]);
        heatmap.add_channel(ChannelRaster(*name, width, height, std::move(values)));
    }
    return heatmap;
}

/// File name used for a channel raster inside a study directory.
inline std::string channel_file_name(const ChannelName& name) {
    std::string out;
    for (char c : name.label()) out += (c == ' ') ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out + ".png";
}

/// Writes `manifest.json` plus one PNG per channel into `dir`; returns the manifest path.
inline std::filesystem::path save_heatmap(const Heatmap& heatmap, const std::filesystem::path& dir,
                                          int png_compression = 3) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

    nlohmann::ordered_json doc;
    doc["version"] = kManifestVersion;
    doc["width"] = heatmap.width();
    doc["height"] = heatmap.height();
    if (heatmap.image()) doc["image"] = heatmap.image()->string();
    doc["channels"] = nlohmann::ordered_json::array();

    for (const auto& channel : heatmap.channels()) {
        const auto file = channel_file_name(channel.name());
        std::vector<std::uint16_t> samples(channel.values().size());
        for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = quantize(channel.values()[i]);
        png::write_gray16(dir / file, heatmap.width(), heatmap.height(), samples, png_compression);
        doc["channels"].push_back(
            {{"name", channel.name().label()}, {"file", file}, {"side", side_key(channel.name().side)}});
    }

    const auto path = dir / "manifest.json";
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
    return path;
}

} // namespace ccd
