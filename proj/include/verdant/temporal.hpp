#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "baseline.hpp"
#include "hypercube.hpp"
#include "indices.hpp"

namespace verdant {

struct NdviObservation {
    double day = 0.0;
    double ndvi = 0.0;
};

struct NdviSeries {
    std::vector<NdviObservation> observations;
};

inline void validate(const NdviSeries& series) {
    for (std::size_t i = 0; i < series.observations.size(); ++i) {
        const NdviObservation& obs = series.observations[i];
        if (!std::isfinite(obs.day)) throw std::invalid_argument("ndvi series: day must be finite");
        if (!std::isfinite(obs.ndvi) || obs.ndvi < -1.0 || obs.ndvi > 1.0)
            throw std::invalid_argument("ndvi series: ndvi must lie in [-1, 1]");
        if (i > 0 && !(obs.day > series.observations[i - 1].day))
            throw std::invalid_argument("ndvi series: days must be strictly increasing");
    }
}

struct OnsetReport {
    std::optional<double> onset_day;
    double peak_ndvi = 0.0;           // running max at onset, or the series max when none
    double decline_from_peak = 0.0;   // peak - ndvi at onset, or peak - last observation
    bool below_healthy = false;       // rules that fired anywhere in the series
    bool cumulative_drop = false;
};

/// Earliest day where NDVI sits below the healthy band AND has fallen at least
/// drop_threshold from the running maximum. Both conditions are required; a
/// single noisy dip below the band alone does not trigger.
inline OnsetReport detect_onset(const NdviSeries& series, const ThresholdBands& bands = {},
                                double drop_threshold = 0.1) {
    validate(series);
    validate(bands);
    if (series.observations.size() < 2)
        throw std::invalid_argument("detect_onset: need at least 2 observations");
    if (!(drop_threshold >= 0.0) || !std::isfinite(drop_threshold))
        throw std::invalid_argument("detect_onset: drop_threshold must be finite and >= 0");

    OnsetReport report;
    double running_max = -std::numeric_limits<double>::infinity();
    for (const NdviObservation& obs : series.observations) {
        running_max = std::max(running_max, obs.ndvi);
        const bool below = obs.ndvi < bands.healthy_low;
        const bool dropped = (running_max - obs.ndvi) >= drop_threshold;
        report.below_healthy |= below;
        report.cumulative_drop |= dropped;
        if (below && dropped && !report.onset_day) {
            report.onset_day = obs.day;
            report.peak_ndvi = running_max;
            report.decline_from_peak = running_max - obs.ndvi;
        }
    }
    if (!report.onset_day) {
        report.peak_ndvi = running_max;
        report.decline_from_peak = running_max - series.observations.back().ndvi;
    }
    return report;
}

/// Whole-image mean NDVI per dated cube, in day order.
inline NdviSeries series_from_cubes(std::span<const std::pair<double, SpectralCube>> cubes,
                                    const BandWindowSet& windows) {
    if (cubes.empty()) throw std::invalid_argument("series_from_cubes: no cubes");
    validate(windows);
    NdviSeries series;
    for (const auto& [day, cube] : cubes) {
        const Raster nir = extract_band_mean(cube, windows.nir);
        const Raster red = extract_band_mean(cube, windows.red);
        double sum = 0.0;
        for (std::size_t i = 0; i < nir.values.size(); ++i)
            sum += ndvi(nir.values[i], red.values[i]);
        series.observations.push_back({day, sum / static_cast<double>(nir.values.size())});
    }
    validate(series);  // rejects duplicate or decreasing days
    return series;
}

}  // namespace verdant
