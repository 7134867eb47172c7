#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "net.hpp"
#include "rng.hpp"

namespace verdant {

struct LabeledExample {
    std::array<double, 4> raw_indices{};  // per-image ndvi/gndvi/evi/msavi means, pre-fusion
    int label = 1;                        // 1..3

    std::array<double, 3> one_hot() const {
        if (label < 1 || label > kClassCount)
            throw std::invalid_argument("label must be in 1..3");
        std::array<double, 3> y{};
        y[static_cast<std::size_t>(label - 1)] = 1.0;
        return y;
    }
};

struct TrainConfig {
    std::size_t batch_size = 128;
    double learning_rate = 1e-3;
    std::size_t epochs = 15;
    double dropout_rate = 0.5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t rng_seed = 0;
};

inline void validate(const TrainConfig& c) {
    if (c.batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (!(c.learning_rate > 0.0)) throw std::invalid_argument("train config: learning_rate must be > 0");
    if (c.epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
    if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0))
        throw std::invalid_argument("train config: dropout_rate must be in [0, 1)");
    if (!(c.adam_beta1 > 0.0 && c.adam_beta1 < 1.0) || !(c.adam_beta2 > 0.0 && c.adam_beta2 < 1.0))
        throw std::invalid_argument("train config: adam betas must be in (0, 1)");
    if (!(c.adam_eps > 0.0)) throw std::invalid_argument("train config: adam_eps must be > 0");
}

struct SplitSpec {
    double train_fraction = 0.70;
    double val_fraction = 0.15;
    double test_fraction = 0.15;
    std::uint64_t rng_seed = 0;
};

struct SplitIndices {
    std::vector<std::size_t> train, val, test;
};

struct FoldPair {
    std::vector<std::size_t> train, val;
};

struct LayerTensors {
    std::vector<double> weights, biases;
};

struct Gradients {
    std::array<double, 4> fusion{};
    std::vector<LayerTensors> layers;
    double loss = 0.0;  // mean batch loss at the evaluation point
};

struct AdamState {
    std::array<double, 4> fusion_m{}, fusion_v{};
    std::vector<LayerTensors> m, v;
    std::size_t timestep = 0;

    static AdamState for_model(const Model& model) {
        AdamState s;
        for (const DenseLayer& layer : model.layers) {
            LayerTensors zero{std::vector<double>(layer.weights.size(), 0.0),
                              std::vector<double>(layer.biases.size(), 0.0)};
            s.m.push_back(zero);
            s.v.push_back(std::move(zero));
        }
        return s;
    }
};

/// -sum y_i log(y_hat_i); probabilities clamped below at 1e-12.
inline double cross_entropy(std::span<const double> one_hot, std::span<const double> probs) {
    if (one_hot.size() != probs.size())
        throw std::invalid_argument("cross_entropy: length mismatch");
    std::size_t hot = 0;
    for (double y : one_hot) {
        if (y != 0.0 && y != 1.0) throw std::invalid_argument("cross_entropy: y must be one-hot");
        if (y == 1.0) ++hot;
    }
    if (hot != 1) throw std::invalid_argument("cross_entropy: y must have exactly one hot entry");
    double loss = 0.0;
    for (std::size_t i = 0; i < one_hot.size(); ++i)
        if (one_hot[i] == 1.0) loss -= std::log(std::max(probs[i], 1e-12));
    return loss;
}

inline double cross_entropy(std::span<const double> one_hot, const ClassProbabilities& out) {
    return cross_entropy(one_hot, std::span<const double>(out.probs));
}

namespace detail {

// Training-mode forward pass with everything backward() needs retained.
// Dropout masks depend only on (example_seed, layer), never on parameters, so
// finite differences of batch_loss probe the same stochastic function.
struct ForwardCache {
    std::vector<std::vector<double>> z;     // pre-activations, one per layer
    std::vector<std::vector<double>> a;     // a[0] = x, then activated outputs
    std::vector<std::vector<double>> mask;  // dropout masks per hidden layer
    std::vector<double> probs;
};

inline ForwardCache forward_cached(const Model& model, const FeatureVector& x,
                                   std::uint64_t example_seed) {
    ForwardCache cache;
    const std::array<double, 5> input = x.as_array();
    cache.a.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
        std::vector<double> z = dense_forward(model.layers[l], cache.a.back());
        std::vector<double> a = relu(z);
        std::vector<double> mask =
            dropout_mask(a.size(), model.dropout[l].rate, mix_seed(example_seed, l));
        for (std::size_t i = 0; i < a.size(); ++i) a[i] *= mask[i];
        cache.z.push_back(std::move(z));
        cache.mask.push_back(std::move(mask));
        cache.a.push_back(std::move(a));
    }
    std::vector<double> z_out = dense_forward(model.layers.back(), cache.a.back());
    cache.probs = softmax(z_out).probs;
    cache.z.push_back(std::move(z_out));
    return cache;
}

}  // namespace detail

/// Mean training-mode loss over a batch; the function backward() differentiates.
inline double batch_loss(const Model& model, std::span<const LabeledExample> batch,
                         std::uint64_t seed) {
    if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
    validate_model(model);
    double total = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const FeatureVector x = make_feature_vector(batch[n].raw_indices, model.fusion);
        const detail::ForwardCache cache = detail::forward_cached(model, x, mix_seed(seed, n));
        total += cross_entropy(batch[n].one_hot(), cache.probs);
    }
    return total / static_cast<double>(batch.size());
}

/// Analytic gradient of the mean batch loss for every parameter, the four
/// fusion weights included (d hvi / d w_k = I_k through the input's HVI slot).
inline Gradients backward(const Model& model, std::span<const LabeledExample> batch,
                          std::uint64_t seed) {
    if (batch.empty()) throw std::invalid_argument("backward: empty batch");
    validate_model(model);
    Gradients g;
    for (const DenseLayer& layer : model.layers)
        g.layers.push_back(LayerTensors{std::vector<double>(layer.weights.size(), 0.0),
                                        std::vector<double>(layer.biases.size(), 0.0)});

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total_loss = 0.0;
    const std::size_t last = model.layers.size() - 1;

    for (std::size_t n = 0; n < batch.size(); ++n) {
        const FeatureVector x = make_feature_vector(batch[n].raw_indices, model.fusion);
        const detail::ForwardCache cache = detail::forward_cached(model, x, mix_seed(seed, n));
        const std::array<double, 3> y = batch[n].one_hot();
        total_loss += cross_entropy(y, cache.probs);

        // softmax + cross-entropy: dL/dz_out = (p - y) / batch_size
        std::vector<double> dz(cache.probs.size());
        for (std::size_t c = 0; c < dz.size(); ++c) dz[c] = (cache.probs[c] - y[c]) * inv_b;

        for (std::size_t l = last + 1; l-- > 0;) {
            const DenseLayer& layer = model.layers[l];
            const std::vector<double>& a_prev = cache.a[l];
            LayerTensors& lg = g.layers[l];
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                lg.biases[o] += dz[o];
                double* wrow = lg.weights.data() + o * layer.in_dim;
                for (std::size_t i = 0; i < layer.in_dim; ++i) wrow[i] += dz[o] * a_prev[i];
            }
            std::vector<double> da(layer.in_dim, 0.0);
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                const double* wrow = layer.weights.data() + o * layer.in_dim;
                const double d = dz[o];
                for (std::size_t i = 0; i < layer.in_dim; ++i) da[i] += wrow[i] * d;
            }
            if (l == 0) {
                for (std::size_t k = 0; k < 4; ++k)
                    g.fusion[k] += da[4] * batch[n].raw_indices[k];
            } else {
                const std::vector<double>& mask = cache.mask[l - 1];
                const std::vector<double>& z = cache.z[l - 1];
                dz.assign(layer.in_dim, 0.0);
                for (std::size_t i = 0; i < layer.in_dim; ++i)
                    dz[i] = da[i] * mask[i] * (z[i] > 0.0 ? 1.0 : 0.0);
            }
        }
    }
    g.loss = total_loss * inv_b;
    return g;
}

namespace detail {

inline void adam_scalar(double& theta, double grad, double& m, double& v, const TrainConfig& cfg,
                        double bias1, double bias2) {
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad * grad;
    theta -= cfg.learning_rate * (m / bias1) / (std::sqrt(v / bias2) + cfg.adam_eps);
}

}  // namespace detail

/// One Adam update with bias correction; increments the shared timestep.
inline void adam_step(Model& model, const Gradients& grads, AdamState& state,
                      const TrainConfig& config) {
    validate(config);
    if (grads.layers.size() != model.layers.size() || state.m.size() != model.layers.size())
        throw std::invalid_argument("adam_step: gradient/state layer count mismatch");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        if (grads.layers[l].weights.size() != model.layers[l].weights.size() ||
            grads.layers[l].biases.size() != model.layers[l].biases.size() ||
            state.m[l].weights.size() != model.layers[l].weights.size() ||
            state.v[l].weights.size() != model.layers[l].weights.size())
            throw std::invalid_argument("adam_step: tensor shape mismatch at layer " +
                                        std::to_string(l));
    }
    state.timestep += 1;
    const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.timestep));
    const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.timestep));

    double* fusion[4] = {&model.fusion.w1, &model.fusion.w2, &model.fusion.w3, &model.fusion.w4};
    for (std::size_t k = 0; k < 4; ++k)
        detail::adam_scalar(*fusion[k], grads.fusion[k], state.fusion_m[k], state.fusion_v[k],
                            config, bias1, bias2);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        DenseLayer& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i)
            detail::adam_scalar(layer.weights[i], grads.layers[l].weights[i], state.m[l].weights[i],
                                state.v[l].weights[i], config, bias1, bias2);
        for (std::size_t i = 0; i < layer.biases.size(); ++i)
            detail::adam_scalar(layer.biases[i], grads.layers[l].biases[i], state.m[l].biases[i],
                                state.v[l].biases[i], config, bias1, bias2);
    }
}

namespace detail {

inline std::map<int, std::vector<std::size_t>> group_by_class(std::span<const int> labels) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    return by_class;
}

}  // namespace detail

/// Stratified train/val/test split; per class, round(fraction * n) for val and
/// test with the remainder assigned to training. Deterministic given the seed.
inline SplitIndices split(std::span<const int> labels, const SplitSpec& spec) {
    if (labels.size() < 3) throw std::invalid_argument("split: dataset needs at least 3 examples");
    const double sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
    if (!(spec.train_fraction > 0.0 && spec.val_fraction > 0.0 && spec.test_fraction > 0.0))
        throw std::invalid_argument("split: fractions must be positive");
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must sum to 1");

    SplitIndices out;
    for (auto& [label, idx] : detail::group_by_class(labels)) {
        Rng rng(mix_seed(spec.rng_seed, static_cast<std::uint64_t>(label)));
        shuffle(idx, rng);
        const std::size_t nc = idx.size();
        const auto val_n = static_cast<std::size_t>(
            std::lround(spec.val_fraction * static_cast<double>(nc)));
        const auto test_n = static_cast<std::size_t>(
            std::lround(spec.test_fraction * static_cast<double>(nc)));
        if (val_n + test_n >= nc)
            throw std::invalid_argument("split: class " + std::to_string(label) +
                                        " has too few examples for the requested fractions");
        const std::size_t train_n = nc - val_n - test_n;
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + train_n);
        out.val.insert(out.val.end(), idx.begin() + train_n, idx.begin() + train_n + val_n);
        out.test.insert(out.test.end(), idx.begin() + train_n + val_n, idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

/// Stratified k-fold; the k validation sets partition the dataset exactly.
inline std::vector<FoldPair> k_fold(std::span<const int> labels, std::size_t k,
                                    std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k_fold: k must be >= 2");
    auto by_class = detail::group_by_class(labels);
    for (const auto& [label, idx] : by_class)
        if (idx.size() < k)
            throw std::invalid_argument("k_fold: class " + std::to_string(label) +
                                        " has fewer than k examples");
    std::vector<std::vector<std::size_t>> val(k);
    for (auto& [label, idx] : by_class) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
        shuffle(idx, rng);
        for (std::size_t j = 0; j < idx.size(); ++j) val[j % k].push_back(idx[j]);
    }
    std::vector<FoldPair> folds(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::sort(val[f].begin(), val[f].end());
        std::vector<bool> in_val(labels.size(), false);
        for (std::size_t i : val[f]) in_val[i] = true;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (!in_val[i]) folds[f].train.push_back(i);
        folds[f].val = std::move(val[f]);
    }
    return folds;
}

struct EvalPoint {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// Inference-mode mean loss and accuracy; NaNs on an empty set.
inline EvalPoint evaluate(const Model& model, std::span<const LabeledExample> examples) {
    if (examples.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan};
    }
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const LabeledExample& e : examples) {
        const FeatureVector x = make_feature_vector(e.raw_indices, model.fusion);
        const ClassProbabilities out = forward(model, x, RunMode::Inference);
        loss_sum += cross_entropy(e.one_hot(), out);
        if (argmax_label(out.probs) == e.label) ++correct;
    }
    const double n = static_cast<double>(examples.size());
    return {loss_sum / n, static_cast<double>(correct) / n};
}

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    Model model;
    std::vector<EpochRecord> history;
};

/// Mini-batch Adam training; bit-reproducible for a fixed seed. Shuffling is
/// reseeded per epoch from the master seed; dropout masks are per batch.
inline TrainResult train(Model model, std::span<const LabeledExample> train_set,
                         std::span<const LabeledExample> val_set, const TrainConfig& config,
                         const std::function<void(const EpochRecord&)>& on_epoch = {}) {
    validate(config);
    validate_model(model);
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");
    for (DropoutSpec& d : model.dropout) d.rate = config.dropout_rate;

    AdamState state = AdamState::for_model(model);
    const std::size_t n = train_set.size();
    std::vector<EpochRecord> history;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(mix_seed(config.rng_seed, 1, epoch));
        shuffle(order, shuffle_rng);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        std::vector<LabeledExample> batch;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t end = std::min(n, start + config.batch_size);
            batch.clear();
            for (std::size_t j = start; j < end; ++j) batch.push_back(train_set[order[j]]);
            const std::uint64_t batch_seed = mix_seed(mix_seed(config.rng_seed, 2, epoch), batches);
            const Gradients grads = backward(model, batch, batch_seed);
            adam_step(model, grads, state, config);
            loss_sum += grads.loss;
            ++batches;
        }
        const EvalPoint val = evaluate(model, val_set);
        EpochRecord rec{epoch, loss_sum / static_cast<double>(batches), val.loss, val.accuracy};
        history.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return {std::move(model), std::move(history)};
}

}  // namespace verdant
