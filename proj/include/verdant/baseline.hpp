#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypercube.hpp"
#include "indices.hpp"

namespace verdant {

// NDVI class bands: Healthy [healthy_low, 1], Rust [rust_low, healthy_low),
// Other below rust_low. Boundaries assign upward.
struct ThresholdBands {
    double healthy_low = 0.6;
    double rust_low = 0.2;
};

inline void validate(const ThresholdBands& bands) {
    if (!(bands.rust_low < bands.healthy_low && bands.healthy_low <= 1.0))
        throw std::invalid_argument("threshold bands: need rust_low < healthy_low <= 1.0");
}

inline int classify_threshold(double ndvi_value, const ThresholdBands& bands = {}) {
    validate(bands);
    if (!std::isfinite(ndvi_value) || ndvi_value < -1.0 || ndvi_value > 1.0)
        throw std::domain_error("classify_threshold: NDVI must lie in [-1, 1]");
    if (ndvi_value >= bands.healthy_low) return 1;
    if (ndvi_value >= bands.rust_low) return 2;
    return 3;
}

struct LabelMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<int> labels;
};

inline LabelMap classify_map(const Raster& ndvi_map, const ThresholdBands& bands = {}) {
    if (ndvi_map.values.empty()) throw std::invalid_argument("classify_map: empty raster");
    LabelMap out{ndvi_map.width, ndvi_map.height, {}};
    out.labels.reserve(ndvi_map.values.size());
    for (double v : ndvi_map.values) out.labels.push_back(classify_threshold(v, bands));
    return out;
}

struct KnnConfig {
    std::size_t k = 5;  // odd by default to reduce vote ties
};

/// Majority label among the k nearest neighbors by Euclidean distance.
/// Distance ties keep training-set order; vote ties pick the lowest class.
inline int knn_predict(std::span<const FeatureVector> train_features,
                       std::span<const int> train_labels, const FeatureVector& x,
                       const KnnConfig& config = {}) {
    if (train_features.empty()) throw std::invalid_argument("knn_predict: empty training set");
    if (train_features.size() != train_labels.size())
        throw std::invalid_argument("knn_predict: features/labels length mismatch");
    if (config.k < 1 || config.k > train_features.size())
        throw std::invalid_argument("knn_predict: k must be in [1, |train|]");

    const std::array<double, 5> q = x.as_array();
    std::vector<std::pair<double, std::size_t>> by_distance;
    by_distance.reserve(train_features.size());
    for (std::size_t i = 0; i < train_features.size(); ++i) {
        const std::array<double, 5> f = train_features[i].as_array();
        double d2 = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            const double d = f[j] - q[j];
            d2 += d * d;
        }
        by_distance.emplace_back(d2, i);
    }
    std::stable_sort(by_distance.begin(), by_distance.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::map<int, std::size_t> votes;
    for (std::size_t r = 0; r < config.k; ++r) ++votes[train_labels[by_distance[r].second]];
    int best_label = 0;
    std::size_t best_count = 0;
    for (const auto& [label, count] : votes) {
        if (count > best_count) {  // map iterates ascending, so ties keep the lowest label
            best_count = count;
            best_label = label;
        }
    }
    return best_label;
}

}  // namespace verdant
