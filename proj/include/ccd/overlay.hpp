#pragma once

// Minimal raster drawing for snapshot overlays: thick line segments, endpoint
// markers and a 5x7 bitmap font covering angle readouts.

#include "ccd/point.hpp"
#include "ccd/png_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace ccd::overlay {

struct Color {
    std::uint8_t r = 0, g = 0, b = 0;
};

inline constexpr Color kNeckColor{255, 200, 0};
inline constexpr Color kShaftColor{0, 200, 255};
inline constexpr Color kEndpointColor{255, 60, 60};
inline constexpr Color kTextColor{255, 255, 255};

inline void put(png::RgbImage& img, int x, int y, Color c) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(x)) * 3;
    img.pixels[i] = c.r;
    img.pixels[i + 1] = c.g;
    img.pixels[i + 2] = c.b;
}

inline void fill_disc(png::RgbImage& img, Point2 center, double radius, Color c) {
    const int x0 = static_cast<int>(std::floor(center.x - radius));
    const int x1 = static_cast<int>(std::ceil(center.x + radius));
    const int y0 = static_cast<int>(std::floor(center.y - radius));
    const int y1 = static_cast<int>(std::ceil(center.y + radius));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (distance({static_cast<double>(x), static_cast<double>(y)}, center) <= radius) put(img, x, y, c);
        }
    }
}

/// Segment of the given stroke width.
inline void draw_segment(png::RgbImage& img, Point2 a, Point2 b, double width, Color c) {
    const double len = distance(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        fill_disc(img, a + t * (b - a), width / 2.0, c);
    }
}

namespace detail {

struct Glyph {
    char ch;
    std::array<std::uint8_t, 7> rows;  // 5 bits per row, MSB = leftmost column
};

// clang-format off
inline constexpr std::array<Glyph, 20> kFont{{
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'/', {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'d', {0x0C, 0x12, 0x12, 0x0C, 0x00, 0x00, 0x00}},  // degree sign
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
}};
// clang-format on

inline const Glyph* find_glyph(char ch) {
    for (const auto& g : kFont) {
        if (g.ch == ch) return &g;
    }
    return nullptr;
}

} // namespace detail

/// Draws ASCII text; 'd' renders as a degree sign. Unknown characters are skipped.
inline void draw_text(png::RgbImage& img, int x, int y, std::string_view text, int scale, Color c) {
    int cursor = x;
    for (char ch : text) {
        if (const auto* g = detail::find_glyph(ch)) {
            for (int row = 0; row < 7; ++row) {
                for (int col = 0; col < 5; ++col) {
                    if ((g->rows[static_cast<std::size_t>(row)] >> (4 - col)) & 1) {
                        for (int dy = 0; dy < scale; ++dy) {
                            for (int dx = 0; dx < scale; ++dx) put(img, cursor + col * scale + dx, y + row * scale + dy, c);
                        }
                    }
                }
            }
        }
        cursor += 6 * scale;
    }
}

/// Copies `src` into `dst` with its top-left corner at (ox, oy).
inline void blit(png::RgbImage& dst, const png::RgbImage& src, int ox, int oy) {
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(src.width) + static_cast<std::size_t>(x)) * 3;
            put(dst, ox + x, oy + y, {src.pixels[i], src.pixels[i + 1], src.pixels[i + 2]});
        }
    }
}

/// Grayscale samples (8- or 16-bit) as an RGB canvas.
inline png::RgbImage from_gray(const png::GrayImage& gray) {
    png::RgbImage img(gray.width, gray.height);
    const int shift = gray.bit_depth == 16 ? 8 : 0;
    for (std::size_t i = 0; i < gray.samples.size(); ++i) {
        const auto v = static_cast<std::uint8_t>(gray.samples[i] >> shift);
        img.pixels[3 * i] = img.pixels[3 * i + 1] = img.pixels[3 * i + 2] = v;
    }
    return img;
}

} // namespace ccd::overlay
