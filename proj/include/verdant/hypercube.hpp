#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "binary_io.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace verdant {

// Per-pixel scalar field, row-major.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;

    double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
    double& at(std::size_t row, std::size_t col) { return values[row * width + col]; }
    std::size_t pixel_count() const { return width * height; }
};

// Reflectance cube, band-major: data[(band * height + row) * width + col].
// Values lie in [0, 1]; band i is centered at wavelength_start_nm + i * wavelength_step_nm.
struct SpectralCube {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t bands = 0;
    double wavelength_start_nm = 0.0;
    double wavelength_step_nm = 0.0;
    std::vector<double> data;

    double at(std::size_t band, std::size_t row, std::size_t col) const {
        return data[(band * height + row) * width + col];
    }
    double& at(std::size_t band, std::size_t row, std::size_t col) {
        return data[(band * height + row) * width + col];
    }
    double wavelength(std::size_t band) const {
        return wavelength_start_nm + static_cast<double>(band) * wavelength_step_nm;
    }
    std::size_t plane() const { return width * height; }
};

inline void validate_cube(const SpectralCube& cube) {
    if (cube.width == 0 || cube.height == 0 || cube.bands == 0)
        throw data_error("cube: width, height and bands must all be nonzero");
    if (cube.data.size() != cube.width * cube.height * cube.bands)
        throw data_error("cube: data length does not equal width x height x bands");
    if (!std::isfinite(cube.wavelength_start_nm))
        throw data_error("cube: wavelength_start_nm must be finite");
    if (!(cube.wavelength_step_nm > 0.0) || !std::isfinite(cube.wavelength_step_nm))
        throw data_error("cube: wavelength_step_nm must be positive and finite");
    for (double v : cube.data) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw data_error("cube: reflectance value outside [0, 1] or non-finite");
    }
}

inline constexpr char kHscMagic[] = "HSC1";

inline void write_cube(const SpectralCube& cube, const std::filesystem::path& path) {
    validate_cube(cube);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out.write(kHscMagic, 4);
    detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(cube.width));
    detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(cube.height));
    detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(cube.bands));
    detail::write_raw<float>(out, static_cast<float>(cube.wavelength_start_nm));
    detail::write_raw<float>(out, static_cast<float>(cube.wavelength_step_nm));
    std::vector<float> payload(cube.data.size());
    for (std::size_t i = 0; i < cube.data.size(); ++i)
        payload[i] = static_cast<float>(cube.data[i]);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) throw data_error("write failed: " + path.string());
}

inline SpectralCube load_cube(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open cube file: " + path.string());
    detail::expect_magic(in, kHscMagic, "HSC");
    SpectralCube cube;
    cube.width = detail::read_raw<std::uint32_t>(in, "HSC width");
    cube.height = detail::read_raw<std::uint32_t>(in, "HSC height");
    cube.bands = detail::read_raw<std::uint32_t>(in, "HSC bands");
    const float start = detail::read_raw<float>(in, "HSC wavelength_start_nm");
    const float step = detail::read_raw<float>(in, "HSC wavelength_step_nm");
    cube.wavelength_start_nm = static_cast<double>(start);
    cube.wavelength_step_nm = static_cast<double>(step);
    if (cube.width == 0 || cube.height == 0 || cube.bands == 0)
        throw data_error("HSC header: width, height and bands must all be nonzero");
    if (!std::isfinite(start)) throw data_error("HSC header: wavelength_start_nm must be finite");
    if (!(step > 0.0f) || !std::isfinite(step))
        throw data_error("HSC header: wavelength_step_nm must be positive and finite");
    if (cube.height != 0 && cube.width > std::numeric_limits<std::size_t>::max() / cube.height)
        throw data_error("HSC header: image plane too large");
    const std::size_t plane = cube.width * cube.height;
    if (plane > std::numeric_limits<std::size_t>::max() / cube.bands)
        throw data_error("HSC header: cube too large");
    const std::size_t n = plane * cube.bands;
    std::vector<float> payload(n);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != n * sizeof(float))
        throw data_error("HSC: data length does not match width x height x bands");
    cube.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float v = payload[i];
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
            throw data_error("HSC reflectance: value outside [0, 1] or non-finite at sample " +
                             std::to_string(i));
        cube.data[i] = static_cast<double>(v);
    }
    detail::expect_eof(in, "HSC");
    return cube;
}

/// Drops bands from the spectral ends; pixel values of the kept bands are preserved.
inline SpectralCube trim_bands(const SpectralCube& cube, std::size_t drop_front,
                               std::size_t drop_back) {
    if (drop_front + drop_back >= cube.bands)
        throw std::invalid_argument("trim_bands: drops exhaust all bands");
    SpectralCube out;
    out.width = cube.width;
    out.height = cube.height;
    out.bands = cube.bands - drop_front - drop_back;
    out.wavelength_start_nm =
        cube.wavelength_start_nm + static_cast<double>(drop_front) * cube.wavelength_step_nm;
    out.wavelength_step_nm = cube.wavelength_step_nm;
    const std::size_t plane = cube.plane();
    out.data.assign(cube.data.begin() + static_cast<std::ptrdiff_t>(drop_front * plane),
                    cube.data.begin() + static_cast<std::ptrdiff_t>((drop_front + out.bands) * plane));
    return out;
}

enum class Band { Blue, Green, Red, RedEdge, Nir };

inline const char* band_name(Band b) {
    switch (b) {
        case Band::Blue: return "Blue";
        case Band::Green: return "Green";
        case Band::Red: return "Red";
        case Band::RedEdge: return "RedEdge";
        case Band::Nir: return "NIR";
    }
    return "?";
}

// Half-open wavelength interval [low_nm, high_nm).
struct BandWindow {
    Band name = Band::Blue;
    double low_nm = 0.0;
    double high_nm = 0.0;
};

// Conventional color-band assignments inside the sensor's 450-950 nm range.
struct BandWindowSet {
    BandWindow blue{Band::Blue, 450.0, 495.0};
    BandWindow green{Band::Green, 495.0, 570.0};
    BandWindow red{Band::Red, 620.0, 690.0};
    BandWindow red_edge{Band::RedEdge, 700.0, 740.0};
    BandWindow nir{Band::Nir, 760.0, 900.0};

    static BandWindowSet standard() { return {}; }

    std::array<const BandWindow*, 5> all() const {
        return {&blue, &green, &red, &red_edge, &nir};
    }
};

inline void validate(const BandWindowSet& windows) {
    const auto all = windows.all();
    for (const BandWindow* w : all)
        if (!(w->low_nm < w->high_nm))
            throw std::invalid_argument(std::string("band window ") + band_name(w->name) +
                                        ": low must be below high");
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (all[i]->low_nm < all[j]->high_nm && all[j]->low_nm < all[i]->high_nm)
                throw std::invalid_argument(std::string("band windows ") +
                                            band_name(all[i]->name) + " and " +
                                            band_name(all[j]->name) + " overlap");
}

inline std::size_t count_bands_in_window(const SpectralCube& cube, const BandWindow& window) {
    if (!(window.low_nm < window.high_nm))
        throw std::invalid_argument(std::string("band window ") + band_name(window.name) +
                                    ": low must be below high");
    std::size_t count = 0;
    for (std::size_t b = 0; b < cube.bands; ++b) {
        const double wl = cube.wavelength(b);
        if (wl >= window.low_nm && wl < window.high_nm) ++count;
    }
    return count;
}

/// Per-pixel mean reflectance over all bands whose center falls inside the window.
inline Raster extract_band_mean(const SpectralCube& cube, const BandWindow& window) {
    std::vector<std::size_t> selected;
    for (std::size_t b = 0; b < cube.bands; ++b) {
        const double wl = cube.wavelength(b);
        if (wl >= window.low_nm && wl < window.high_nm) selected.push_back(b);
    }
    if (count_bands_in_window(cube, window) == 0)
        throw std::invalid_argument(std::string("band window ") + band_name(window.name) +
                                    " contains no band centers for this cube");
    Raster out{cube.width, cube.height, std::vector<double>(cube.plane(), 0.0)};
    const std::size_t plane = cube.plane();
    for (std::size_t b : selected) {
        const double* src = cube.data.data() + b * plane;
        for (std::size_t i = 0; i < plane; ++i) out.values[i] += src[i];
    }
    const double inv = 1.0 / static_cast<double>(selected.size());
    for (double& v : out.values) v *= inv;
    return out;
}

// Synthetic scene request. class_label: 1=Healthy, 2=Rust, 3=Other.
struct SceneSpec {
    int class_label = 1;
    std::size_t image_size = 50;
    double noise_sigma = 0.0;
    std::uint64_t rng_seed = 0;
};

struct GeneratedScene {
    SpectralCube cube;
    int label = 0;
};

namespace detail {

struct SpectralLevels {
    double blue, green, red, nir;
};

// Plateau reflectance levels per class. Chosen so the noiseless whole-image
// NDVI lands well inside the class's threshold band:
//   healthy (0.50-0.05)/0.55 = 0.818, rust 0.20/0.50 = 0.400, other 0.03/0.53 = 0.057.
inline SpectralLevels class_levels(int label) {
    switch (label) {
        case 1: return {0.05, 0.12, 0.05, 0.50};
        case 2: return {0.08, 0.10, 0.15, 0.35};
        case 3: return {0.12, 0.14, 0.25, 0.28};
    }
    throw std::invalid_argument("scene class_label must be 1, 2 or 3");
}

// Piecewise-linear spectrum. The anchor wavelengths sit on band centers at the
// edges of each color window, so every band inside a window reads the plateau
// value exactly and the window mean equals the level, trimmed or not.
inline double template_reflectance(int label, double wavelength_nm) {
    const SpectralLevels lv = class_levels(label);
    const std::array<std::pair<double, double>, 8> anchors{{{450.0, lv.blue},
                                                            {494.0, lv.blue},
                                                            {498.0, lv.green},
                                                            {566.0, lv.green},
                                                            {622.0, lv.red},
                                                            {686.0, lv.red},
                                                            {762.0, lv.nir},
                                                            {946.0, lv.nir}}};
    if (wavelength_nm <= anchors.front().first) return anchors.front().second;
    for (std::size_t i = 1; i < anchors.size(); ++i) {
        if (wavelength_nm <= anchors[i].first) {
            const double t =
                (wavelength_nm - anchors[i - 1].first) / (anchors[i].first - anchors[i - 1].first);
            return anchors[i - 1].second + t * (anchors[i].second - anchors[i - 1].second);
        }
    }
    return anchors.back().second;
}

}  // namespace detail

inline constexpr std::size_t kSensorBands = 125;
inline constexpr double kSensorStartNm = 450.0;
inline constexpr double kSensorStepNm = 4.0;

/// Deterministic synthetic scene: class spectrum plus clamped Gaussian pixel noise.
inline GeneratedScene generate_scene(const SceneSpec& spec) {
    if (spec.image_size < 1) throw std::invalid_argument("scene image_size must be >= 1");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
        throw std::invalid_argument("scene noise_sigma must be finite and >= 0");
    (void)detail::class_levels(spec.class_label);  // validates the label

    SpectralCube cube;
    cube.width = spec.image_size;
    cube.height = spec.image_size;
    cube.bands = kSensorBands;
    cube.wavelength_start_nm = kSensorStartNm;
    cube.wavelength_step_nm = kSensorStepNm;
    cube.data.resize(cube.plane() * cube.bands);

    Rng rng(mix_seed(spec.rng_seed, static_cast<std::uint64_t>(spec.class_label)));
    std::size_t idx = 0;
    for (std::size_t b = 0; b < cube.bands; ++b) {
        const double base = detail::template_reflectance(spec.class_label, cube.wavelength(b));
        for (std::size_t p = 0; p < cube.plane(); ++p, ++idx) {
            double v = base;
            if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
            v = std::clamp(v, 0.0, 1.0);
            // quantize to the file precision so write_cube/load_cube round-trips exactly
            cube.data[idx] = static_cast<double>(static_cast<float>(v));
        }
    }
    return {std::move(cube), spec.class_label};
}

}  // namespace verdant
