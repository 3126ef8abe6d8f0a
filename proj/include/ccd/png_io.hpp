#pragma once

#include "ccd/error.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace ccd::png {

/// Single-channel grayscale image; samples are stored widened to 16 bits.
struct GrayImage {
    int width = 0;
    int height = 0;
    int bit_depth = 16;
    std::vector<std::uint16_t> samples;
};

/// Interleaved 8-bit RGB image.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    RgbImage() = default;
    RgbImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {}
};

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) {
        throw Error(ErrorKind::Io, std::string("cannot open ") + path.string());
    }
    return f;
}

inline void write_rows(const std::filesystem::path& path, int width, int height, int bit_depth, int color_type,
                       std::vector<png_bytep>& rows, int compression) {
    auto file = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr) throw Error(ErrorKind::Io, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorKind::Io, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::Io, "failed writing PNG " + path.string());
    }
    png_init_io(png, file.get());
    png_set_compression_level(png, compression);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace detail

/// Reads an 8- or 16-bit grayscale PNG. 8-bit samples keep their raw value
/// (0..255) and `bit_depth` reports 8.
inline GrayImage read_gray(const std::filesystem::path& path) {
    auto file = detail::open_file(path, "rb");
    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
        throw Error(ErrorKind::Parse, "not a PNG file: " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr) throw Error(ErrorKind::Io, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (info == nullptr) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorKind::Io, "png_create_info_struct failed");
    }
    GrayImage image;
    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::Parse, "corrupt PNG " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::OutOfRange,
                    "expected 8- or 16-bit single-channel grayscale PNG: " + path.string());
    }
    png_read_update_info(png, info);

    image.width = static_cast<int>(png_get_image_width(png, info));
    image.height = static_cast<int>(png_get_image_height(png, info));
    image.bit_depth = depth;
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * static_cast<std::size_t>(image.height));
    rows.resize(static_cast<std::size_t>(image.height));
    for (int y = 0; y < image.height; ++y) {
        rows[static_cast<std::size_t>(y)] = raw.data() + rowbytes * static_cast<std::size_t>(y);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t count = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
    image.samples.resize(count);
    if (depth == 16) {
        for (int y = 0; y < image.height; ++y) {
            const auto* src = rows[static_cast<std::size_t>(y)];
            for (int x = 0; x < image.width; ++x) {
                // PNG stores 16-bit samples big-endian.
                const auto v = static_cast<std::uint16_t>((src[2 * x] << 8) | src[2 * x + 1]);
                image.samples[static_cast<std::size_t>(y) * image.width + x] = v;
            }
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) image.samples[i] = raw[i];
    }
    return image;
}

inline void write_gray16(const std::filesystem::path& path, int width, int height,
                         const std::vector<std::uint16_t>& samples, int compression = 3) {
    if (samples.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorKind::DimensionMismatch, "sample count does not match image size");
    }
    std::vector<std::uint8_t> bytes(samples.size() * 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        bytes[2 * i] = static_cast<std::uint8_t>(samples[i] >> 8);
        bytes[2 * i + 1] = static_cast<std::uint8_t>(samples[i] & 0xFF);
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)] = bytes.data() + static_cast<std::size_t>(y) * width * 2;
    }
    detail::write_rows(path, width, height, 16, PNG_COLOR_TYPE_GRAY, rows, compression);
}

inline void write_gray8(const std::filesystem::path& path, int width, int height,
                        const std::vector<std::uint8_t>& samples) {
    if (samples.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorKind::DimensionMismatch, "sample count does not match image size");
    }
    auto copy = samples;
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)] = copy.data() + static_cast<std::size_t>(y) * width;
    }
    detail::write_rows(path, width, height, 8, PNG_COLOR_TYPE_GRAY, rows, 6);
}

inline void write_rgb(const std::filesystem::path& path, const RgbImage& image) {
    auto copy = image.pixels;
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
    for (int y = 0; y < image.height; ++y) {
        rows[static_cast<std::size_t>(y)] = copy.data() + static_cast<std::size_t>(y) * image.width * 3;
    }
    detail::write_rows(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows, 6);
}

} // namespace ccd::png
