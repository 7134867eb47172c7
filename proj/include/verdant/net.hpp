#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "errors.hpp"
#include "indices.hpp"
#include "rng.hpp"

namespace verdant {

inline constexpr std::size_t kInputDim = 5;
inline constexpr int kClassCount = 3;

// Wide enough to separate all three classes reliably within the default
// 15-epoch budget; layer sizes stay configurable everywhere.
inline const std::vector<std::size_t> kDefaultHiddenSizes{256, 128};

struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;  // row-major, out_dim x in_dim
    std::vector<double> biases;   // out_dim

    double weight(std::size_t out, std::size_t in) const { return weights[out * in_dim + in]; }
};

struct DropoutSpec {
    double rate = 0.5;  // fraction of units disabled while training
    bool active = false;
};

struct ClassProbabilities {
    std::vector<double> probs;
    std::vector<double> logits;
};

enum class RunMode { Training, Inference };

struct Model {
    FusionWeights fusion;
    std::vector<DenseLayer> layers;
    std::vector<DropoutSpec> dropout;  // one per hidden layer
    int class_count = kClassCount;
};

inline void validate_model(const Model& model) {
    if (model.layers.empty()) throw std::invalid_argument("model: no layers");
    if (model.layers.front().in_dim != kInputDim)
        throw std::invalid_argument("model: first layer in_dim must be 5");
    if (model.layers.back().out_dim != static_cast<std::size_t>(model.class_count))
        throw std::invalid_argument("model: last layer out_dim must equal class_count");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const DenseLayer& layer = model.layers[l];
        if (layer.in_dim == 0 || layer.out_dim == 0)
            throw std::invalid_argument("model: zero-sized layer");
        if (layer.weights.size() != layer.in_dim * layer.out_dim ||
            layer.biases.size() != layer.out_dim)
            throw std::invalid_argument("model: layer tensor sizes inconsistent with dims");
        if (l > 0 && model.layers[l - 1].out_dim != layer.in_dim)
            throw std::invalid_argument("model: layer dimension chain mismatch");
    }
    if (model.dropout.size() != model.layers.size() - 1)
        throw std::invalid_argument("model: need one dropout spec per hidden layer");
    for (const DropoutSpec& d : model.dropout)
        if (!(d.rate >= 0.0 && d.rate < 1.0))
            throw std::invalid_argument("model: dropout rate must be in [0, 1)");
}

/// Row-major linearization of a rectangular grid.
inline std::vector<double> flatten(const std::vector<std::vector<double>>& grid) {
    if (grid.empty() || grid.front().empty()) throw std::invalid_argument("flatten: empty input");
    const std::size_t cols = grid.front().size();
    std::vector<double> out;
    out.reserve(grid.size() * cols);
    for (const auto& row : grid) {
        if (row.size() != cols) throw std::invalid_argument("flatten: ragged grid");
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

inline std::vector<double> flatten(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("flatten: empty input");
    return std::vector<double>(values.begin(), values.end());
}

/// Z = W a + b.
inline std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> a_prev) {
    if (a_prev.size() != layer.in_dim)
        throw std::invalid_argument("dense_forward: input length " + std::to_string(a_prev.size()) +
                                    " does not match in_dim " + std::to_string(layer.in_dim));
    std::vector<double> z(layer.out_dim);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
        double sum = layer.biases[o];
        const double* row = layer.weights.data() + o * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) sum += row[i] * a_prev[i];
        z[o] = sum;
    }
    return z;
}

inline std::vector<double> relu(std::span<const double> z) {
    std::vector<double> a(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = std::max(0.0, z[i]);
    return a;
}

namespace detail {

// Inverted-dropout mask: entries are 0 with probability rate, else 1/(1-rate).
// Depends on the seed alone so a backward pass can replay its forward's masks.
inline std::vector<double> dropout_mask(std::size_t n, double rate, std::uint64_t seed) {
    std::vector<double> mask(n, 1.0);
    if (rate <= 0.0) return mask;
    Rng rng(seed);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& m : mask) m = (rng.uniform01() < rate) ? 0.0 : keep_scale;
    return mask;
}

}  // namespace detail

/// Inverted dropout: identity at inference, masked and rescaled while training.
inline std::vector<double> dropout_apply(std::span<const double> a, const DropoutSpec& spec,
                                         std::uint64_t seed) {
    if (!(spec.rate >= 0.0 && spec.rate < 1.0))
        throw std::invalid_argument("dropout rate must be in [0, 1)");
    std::vector<double> out(a.begin(), a.end());
    if (!spec.active || spec.rate == 0.0) return out;
    const std::vector<double> mask = detail::dropout_mask(a.size(), spec.rate, seed);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
    return out;
}

/// Numerically stable softmax (max subtraction); probabilities sum to 1.
inline ClassProbabilities softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
    for (double z : logits)
        if (!std::isfinite(z)) throw std::domain_error("softmax: logits must be finite");
    const double zmax = *std::max_element(logits.begin(), logits.end());
    ClassProbabilities out;
    out.logits.assign(logits.begin(), logits.end());
    out.probs.resize(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out.probs[i] = std::exp(logits[i] - zmax);
        sum += out.probs[i];
    }
    for (double& p : out.probs) p /= sum;
    return out;
}

/// Lowest class index wins ties; labels are 1-based.
inline int argmax_label(std::span<const double> probs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best]) best = i;
    return static_cast<int>(best) + 1;
}

/// flatten -> [dense -> relu -> dropout]* -> dense -> softmax.
inline ClassProbabilities forward(const Model& model, const FeatureVector& x, RunMode mode,
                                  std::uint64_t seed = 0) {
    if (model.layers.empty() || model.dropout.size() != model.layers.size() - 1)
        throw std::invalid_argument("forward: model needs one dropout spec per hidden layer");
    const std::array<double, 5> input = x.as_array();
    std::vector<double> a = flatten(std::span<const double>(input));
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
        a = relu(dense_forward(model.layers[l], a));
        DropoutSpec spec = model.dropout[l];
        spec.active = (mode == RunMode::Training);
        a = dropout_apply(a, spec, mix_seed(seed, l));
    }
    return softmax(dense_forward(model.layers.back(), a));
}

inline int predict(const Model& model, const FeatureVector& x) {
    return argmax_label(forward(model, x, RunMode::Inference).probs);
}

/// Fresh model: He-scaled weights (variance 2/in_dim), zero biases, seeded.
inline Model make_model(const std::vector<std::size_t>& hidden_sizes, double dropout_rate,
                        std::uint64_t seed) {
    std::vector<std::size_t> dims;
    dims.push_back(kInputDim);
    dims.insert(dims.end(), hidden_sizes.begin(), hidden_sizes.end());
    dims.push_back(static_cast<std::size_t>(kClassCount));

    Model model;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        layer.in_dim = dims[l];
        layer.out_dim = dims[l + 1];
        layer.weights.resize(layer.in_dim * layer.out_dim);
        layer.biases.assign(layer.out_dim, 0.0);
        Rng rng(mix_seed(seed, l));
        const double stddev = std::sqrt(2.0 / static_cast<double>(layer.in_dim));
        for (double& w : layer.weights) w = stddev * rng.normal();
        model.layers.push_back(std::move(layer));
    }
    model.dropout.assign(model.layers.size() - 1, DropoutSpec{dropout_rate, false});
    validate_model(model);
    return model;
}

inline constexpr char kFcnMagic[] = "FCN1";

/// Versioned binary checkpoint; round-trips bit-exactly.
inline void save_model(const Model& model, const std::filesystem::path& path) {
    validate_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out.write(kFcnMagic, 4);
    detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers.size()));
    for (const DenseLayer& layer : model.layers) {
        detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(layer.in_dim));
        detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(layer.out_dim));
    }
    for (double w : model.fusion.as_array()) detail::write_raw<double>(out, w);
    for (const DenseLayer& layer : model.layers) {
        for (double w : layer.weights) detail::write_raw<double>(out, w);
        for (double b : layer.biases) detail::write_raw<double>(out, b);
    }
    if (!out) throw data_error("write failed: " + path.string());
}

inline Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open checkpoint: " + path.string());
    detail::expect_magic(in, kFcnMagic, "FCN1");
    const std::uint32_t layer_count = detail::read_raw<std::uint32_t>(in, "FCN1 layer count");
    if (layer_count == 0 || layer_count > 64)
        throw data_error("FCN1: layer count out of range");
    Model model;
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        DenseLayer layer;
        layer.in_dim = detail::read_raw<std::uint32_t>(in, "FCN1 layer in_dim");
        layer.out_dim = detail::read_raw<std::uint32_t>(in, "FCN1 layer out_dim");
        if (layer.in_dim == 0 || layer.out_dim == 0 || layer.in_dim > 65536 ||
            layer.out_dim > 65536)
            throw data_error("FCN1: layer dimension out of range");
        model.layers.push_back(std::move(layer));
    }
    if (model.layers.front().in_dim != kInputDim ||
        model.layers.back().out_dim != static_cast<std::size_t>(kClassCount))
        throw data_error("FCN1: checkpoint architecture mismatch (expect 5 inputs, 3 classes)");
    for (std::size_t l = 1; l < model.layers.size(); ++l)
        if (model.layers[l].in_dim != model.layers[l - 1].out_dim)
            throw data_error("FCN1: layer dimension chain mismatch");

    double* fusion[4] = {&model.fusion.w1, &model.fusion.w2, &model.fusion.w3, &model.fusion.w4};
    for (double* w : fusion) {
        *w = detail::read_raw<double>(in, "FCN1 fusion weight");
        if (!std::isfinite(*w)) throw data_error("FCN1: non-finite fusion weight");
    }
    for (DenseLayer& layer : model.layers) {
        layer.weights.resize(layer.in_dim * layer.out_dim);
        layer.biases.resize(layer.out_dim);
        for (double& w : layer.weights) {
            w = detail::read_raw<double>(in, "FCN1 layer weights");
            if (!std::isfinite(w)) throw data_error("FCN1: non-finite layer weight");
        }
        for (double& b : layer.biases) {
            b = detail::read_raw<double>(in, "FCN1 layer biases");
            if (!std::isfinite(b)) throw data_error("FCN1: non-finite layer bias");
        }
    }
    detail::expect_eof(in, "FCN1");
    model.dropout.assign(model.layers.size() - 1, DropoutSpec{0.5, false});
    validate_model(model);
    return model;
}

}  // namespace verdant
