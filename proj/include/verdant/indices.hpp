#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hypercube.hpp"

namespace verdant {

namespace detail {

inline void require_reflectance(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0)
        throw std::domain_error(std::string(what) + ": reflectance must be finite and nonnegative");
}

inline double mean_of(const std::vector<double>& values) {
    double sum = 0.0;  // fixed left-to-right order for reproducibility
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace detail

/// (nir - red) / (nir + red); 0 when both bands are zero.
inline double ndvi(double nir, double red) {
    detail::require_reflectance(nir, "ndvi nir");
    detail::require_reflectance(red, "ndvi red");
    const double den = nir + red;
    if (den == 0.0) return 0.0;
    return (nir - red) / den;
}

/// NDVI with the green band in place of red.
inline double gndvi(double nir, double green) {
    detail::require_reflectance(nir, "gndvi nir");
    detail::require_reflectance(green, "gndvi green");
    const double den = nir + green;
    if (den == 0.0) return 0.0;
    return (nir - green) / den;
}

/// 2.5 (nir - red) / (nir + 6 red - 7.5 blue + 1); 0 when |denominator| < 1e-9.
inline double evi(double nir, double red, double blue) {
    detail::require_reflectance(nir, "evi nir");
    detail::require_reflectance(red, "evi red");
    detail::require_reflectance(blue, "evi blue");
    const double den = nir + 6.0 * red - 7.5 * blue + 1.0;
    if (std::abs(den) < 1e-9) return 0.0;
    return 2.5 * (nir - red) / den;
}

/// MSAVI2 closed form; the discriminant is clamped at zero against rounding.
inline double msavi(double nir, double red) {
    detail::require_reflectance(nir, "msavi nir");
    detail::require_reflectance(red, "msavi red");
    const double s = 2.0 * nir + 1.0;
    const double disc = std::max(s * s - 8.0 * (nir - red), 0.0);
    return (s - std::sqrt(disc)) / 2.0;
}

// Learnable fusion coefficients of the hybrid index; unconstrained reals,
// initialized to the uniform average before training.
struct FusionWeights {
    double w1 = 0.25;
    double w2 = 0.25;
    double w3 = 0.25;
    double w4 = 0.25;

    std::array<double, 4> as_array() const { return {w1, w2, w3, w4}; }
};

/// Weighted fusion w1*NDVI + w2*GNDVI + w3*EVI + w4*MSAVI.
inline double hvi(const std::array<double, 4>& indices, const FusionWeights& weights) {
    for (double v : indices)
        if (!std::isfinite(v)) throw std::domain_error("hvi: index values must be finite");
    for (double w : weights.as_array())
        if (!std::isfinite(w)) throw std::domain_error("hvi: fusion weights must be finite");
    return weights.w1 * indices[0] + weights.w2 * indices[1] + weights.w3 * indices[2] +
           weights.w4 * indices[3];
}

struct IndexMaps {
    Raster ndvi;
    Raster gndvi;
    Raster evi;
    Raster msavi;
};

// The model input x = [ndvi_mean, gndvi_mean, evi_mean, msavi_mean, hvi].
struct FeatureVector {
    double ndvi_mean = 0.0;
    double gndvi_mean = 0.0;
    double evi_mean = 0.0;
    double msavi_mean = 0.0;
    double hvi = 0.0;

    std::array<double, 5> as_array() const {
        return {ndvi_mean, gndvi_mean, evi_mean, msavi_mean, hvi};
    }
    static FeatureVector from_array(const std::array<double, 5>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }
};

/// Pixelwise application of the four scalar indices to the window-mean rasters.
inline IndexMaps compute_index_maps(const SpectralCube& cube, const BandWindowSet& windows) {
    validate(windows);
    // all five windows must be non-empty, red-edge included even though no index reads it
    if (count_bands_in_window(cube, windows.red_edge) == 0)
        throw std::invalid_argument(std::string("band window ") + band_name(windows.red_edge.name) +
                                    " contains no band centers for this cube");
    const Raster blue = extract_band_mean(cube, windows.blue);
    const Raster green = extract_band_mean(cube, windows.green);
    const Raster red = extract_band_mean(cube, windows.red);
    const Raster nir = extract_band_mean(cube, windows.nir);

    const std::size_t n = cube.plane();
    IndexMaps maps;
    for (Raster* r : {&maps.ndvi, &maps.gndvi, &maps.evi, &maps.msavi}) {
        r->width = cube.width;
        r->height = cube.height;
        r->values.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        maps.ndvi.values[i] = ndvi(nir.values[i], red.values[i]);
        maps.gndvi.values[i] = gndvi(nir.values[i], green.values[i]);
        maps.evi.values[i] = evi(nir.values[i], red.values[i], blue.values[i]);
        maps.msavi.values[i] = msavi(nir.values[i], red.values[i]);
    }
    return maps;
}

/// Spatial means of the four maps, in feature order.
inline std::array<double, 4> index_means(const IndexMaps& maps) {
    if (maps.ndvi.values.empty()) throw std::invalid_argument("index_means: empty index maps");
    return {detail::mean_of(maps.ndvi.values), detail::mean_of(maps.gndvi.values),
            detail::mean_of(maps.evi.values), detail::mean_of(maps.msavi.values)};
}

inline FeatureVector make_feature_vector(const std::array<double, 4>& raw_indices,
                                         const FusionWeights& weights) {
    return {raw_indices[0], raw_indices[1], raw_indices[2], raw_indices[3],
            hvi(raw_indices, weights)};
}

/// Reduces an image's index maps to the 5-dimensional model input.
inline FeatureVector featurize(const IndexMaps& maps, const FusionWeights& weights) {
    return make_feature_vector(index_means(maps), weights);
}

}  // namespace verdant
