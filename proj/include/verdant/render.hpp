#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "baseline.hpp"
#include "errors.hpp"
#include "hypercube.hpp"

namespace verdant {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<Rgb> pixels;  // row-major
};

inline constexpr Rgb kRampBlue{0, 0, 255};
inline constexpr Rgb kRampRed{255, 0, 0};
inline constexpr Rgb kRampGreen{0, 255, 0};
inline constexpr double kRampMid = 0.2;  // the rust/other NDVI boundary

namespace detail {

inline std::uint8_t lerp_channel(std::uint8_t c0, std::uint8_t c1, double t) {
    return static_cast<std::uint8_t>(
        std::lround(static_cast<double>(c0) + t * (static_cast<double>(c1) - c0)));
}

inline Rgb lerp_rgb(Rgb a, Rgb b, double t) {
    return {lerp_channel(a.r, b.r, t), lerp_channel(a.g, b.g, t), lerp_channel(a.b, b.b, t)};
}

}  // namespace detail

/// NDVI color ramp: blue at -1, red at 0.2, green at 1, linear between stops.
inline Rgb ndvi_color(double v) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0)
        throw std::domain_error("ndvi_color: value outside [-1, 1]");
    if (v <= kRampMid) return detail::lerp_rgb(kRampBlue, kRampRed, (v + 1.0) / (kRampMid + 1.0));
    return detail::lerp_rgb(kRampRed, kRampGreen, (v - kRampMid) / (1.0 - kRampMid));
}

/// Classification palette: healthy green, rust orange, other gray.
inline Rgb class_color(int label) {
    switch (label) {
        case 1: return {0, 170, 0};
        case 2: return {230, 120, 0};
        case 3: return {128, 128, 128};
    }
    throw std::invalid_argument("class_color: label must be 1..3");
}

inline Image render_heatmap(const Raster& ndvi_map) {
    if (ndvi_map.values.empty()) throw std::invalid_argument("render_heatmap: empty raster");
    Image img{ndvi_map.width, ndvi_map.height, {}};
    img.pixels.reserve(ndvi_map.values.size());
    for (double v : ndvi_map.values) img.pixels.push_back(ndvi_color(v));
    return img;
}

inline Image render_class_map(const LabelMap& labels) {
    if (labels.labels.empty()) throw std::invalid_argument("render_class_map: empty label map");
    Image img{labels.width, labels.height, {}};
    img.pixels.reserve(labels.labels.size());
    for (int label : labels.labels) img.pixels.push_back(class_color(label));
    return img;
}

/// Binary PPM (P6, 8-bit).
inline void write_ppm(const Image& image, const std::filesystem::path& path) {
    if (image.width == 0 || image.height == 0 ||
        image.pixels.size() != image.width * image.height)
        throw std::invalid_argument("write_ppm: inconsistent image dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    std::vector<char> payload;
    payload.reserve(image.pixels.size() * 3);
    for (const Rgb& px : image.pixels) {
        payload.push_back(static_cast<char>(px.r));
        payload.push_back(static_cast<char>(px.g));
        payload.push_back(static_cast<char>(px.b));
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw data_error("write failed: " + path.string());
}

/// Strict reader for the P6 layout written above.
inline Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open image: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P6") throw data_error("PPM: expected P6 magic");
    std::size_t width = 0, height = 0;
    int maxval = 0;
    in >> width >> height >> maxval;
    if (!in || width == 0 || height == 0) throw data_error("PPM: bad dimensions");
    if (maxval != 255) throw data_error("PPM: expected 8-bit maxval 255");
    in.get();  // single whitespace after the header
    Image img{width, height, std::vector<Rgb>(width * height)};
    std::vector<char> payload(width * height * 3);
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size())
        throw data_error("PPM: truncated pixel data");
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        img.pixels[i] = {static_cast<std::uint8_t>(payload[3 * i]),
                         static_cast<std::uint8_t>(payload[3 * i + 1]),
                         static_cast<std::uint8_t>(payload[3 * i + 2])};
    }
    in.peek();
    if (!in.eof()) throw data_error("PPM: trailing bytes after pixel data");
    return img;
}

}  // namespace verdant
