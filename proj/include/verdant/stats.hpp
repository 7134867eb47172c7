#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "indices.hpp"
#include "net.hpp"
#include "rng.hpp"

namespace verdant {

// Rows are true classes, columns predicted; labels are 1-based outside.
struct ConfusionMatrix {
    std::size_t class_count = 3;
    std::vector<std::size_t> counts;

    std::size_t at(std::size_t true_class, std::size_t predicted_class) const {
        return counts[true_class * class_count + predicted_class];
    }
    std::size_t total() const {
        std::size_t t = 0;
        for (std::size_t c : counts) t += c;
        return t;
    }
};

inline ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                                 std::size_t class_count = 3) {
    if (truth.empty()) throw std::invalid_argument("confusion: empty label sequences");
    if (truth.size() != predicted.size())
        throw std::invalid_argument("confusion: label sequence length mismatch");
    ConfusionMatrix cm{class_count, std::vector<std::size_t>(class_count * class_count, 0)};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i];
        const int p = predicted[i];
        if (t < 1 || static_cast<std::size_t>(t) > class_count || p < 1 ||
            static_cast<std::size_t>(p) > class_count)
            throw std::invalid_argument("confusion: label outside 1.." +
                                        std::to_string(class_count));
        ++cm.counts[static_cast<std::size_t>(t - 1) * class_count +
                    static_cast<std::size_t>(p - 1)];
    }
    return cm;
}

struct ClassMetrics {
    std::vector<double> precision, recall, f1;
    double accuracy = 0.0;
};

/// precision = diag/colsum, recall = diag/rowsum, accuracy = trace/total.
/// Zero denominators yield 0.
inline ClassMetrics metrics(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) throw std::invalid_argument("metrics: empty confusion matrix");
    const std::size_t C = cm.class_count;
    ClassMetrics out;
    std::size_t trace = 0;
    for (std::size_t c = 0; c < C; ++c) {
        std::size_t colsum = 0, rowsum = 0;
        for (std::size_t i = 0; i < C; ++i) {
            colsum += cm.at(i, c);
            rowsum += cm.at(c, i);
        }
        const std::size_t diag = cm.at(c, c);
        trace += diag;
        const double p = colsum ? static_cast<double>(diag) / static_cast<double>(colsum) : 0.0;
        const double r = rowsum ? static_cast<double>(diag) / static_cast<double>(rowsum) : 0.0;
        out.precision.push_back(p);
        out.recall.push_back(r);
        out.f1.push_back(p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0);
    }
    out.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    return out;
}

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double ibeta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("incomplete beta: a and b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * ibeta_cf(a, b, x) / a;
    return 1.0 - front * ibeta_cf(b, a, 1.0 - x) / b;
}

// Two-tailed Student-t p value: I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_tailed_p(double t, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("student t: df must be positive");
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

// Linearly interpolated quantile of a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

struct TTestResult {
    double t_statistic = 0.0;
    std::size_t degrees_of_freedom = 0;
    double p_value = 1.0;
    bool degenerate = false;  // differences had (numerically) zero variance
    double mean_difference = 0.0;
};

/// Paired t-test over per-fold scores: t = mean(d) / (sd(d)/sqrt(n)), df = n-1,
/// two-tailed p via the Student-t distribution.
inline TTestResult paired_t_test(std::span<const double> scores_a,
                                 std::span<const double> scores_b) {
    if (scores_a.size() != scores_b.size())
        throw std::invalid_argument("paired_t_test: score sequences differ in length");
    const std::size_t n = scores_a.size();
    if (n < 2) throw std::invalid_argument("paired_t_test: need at least 2 paired scores");

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = scores_a[i] - scores_b[i];
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    TTestResult result;
    result.mean_difference = mean;
    result.degrees_of_freedom = n - 1;
    // constant differences land at floating-point noise, not exactly zero;
    // treat noise-scale spread as degenerate
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
        result.degenerate = true;
        return result;
    }
    result.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
    result.p_value = detail::student_t_two_tailed_p(result.t_statistic,
                                                    static_cast<double>(n - 1));
    return result;
}

struct BootstrapCI {
    double point_estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double confidence = 0.95;
    std::size_t resamples = 0;
};

using MetricFn = std::function<double(std::span<const int>, std::span<const int>)>;

inline double accuracy_of(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.empty() || truth.size() != predicted.size())
        throw std::invalid_argument("accuracy_of: bad label sequences");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] == predicted[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

/// Percentile bootstrap over resampled (truth, prediction) pairs.
inline BootstrapCI bootstrap_ci(std::span<const int> truth, std::span<const int> predicted,
                                const MetricFn& metric, std::size_t resamples, std::uint64_t seed,
                                double confidence = 0.95) {
    if (truth.empty()) throw std::invalid_argument("bootstrap_ci: empty label sequences");
    if (truth.size() != predicted.size())
        throw std::invalid_argument("bootstrap_ci: label sequence length mismatch");
    if (resamples < 100) throw std::invalid_argument("bootstrap_ci: need at least 100 resamples");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("bootstrap_ci: confidence must be in (0, 1)");

    const std::size_t n = truth.size();
    std::vector<double> stats(resamples);
    std::vector<int> rt(n), rp(n);
    for (std::size_t b = 0; b < resamples; ++b) {
        Rng rng(mix_seed(seed, b));  // per-resample stream, merged in resample order
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = rng.next_index(n);
            rt[i] = truth[j];
            rp[i] = predicted[j];
        }
        stats[b] = metric(rt, rp);
    }
    std::sort(stats.begin(), stats.end());
    const double alpha = (1.0 - confidence) / 2.0;
    return {metric(truth, predicted), detail::quantile_sorted(stats, alpha),
            detail::quantile_sorted(stats, 1.0 - alpha), confidence, resamples};
}

/// Accuracy drop when one feature column is shuffled: baseline accuracy minus
/// the mean accuracy over `repeats` seeded permutations.
inline double permutation_importance(const Model& model, std::span<const FeatureVector> features,
                                     std::span<const int> labels, std::size_t feature_index,
                                     std::size_t repeats, std::uint64_t seed) {
    if (features.empty()) throw std::invalid_argument("permutation_importance: empty eval set");
    if (features.size() != labels.size())
        throw std::invalid_argument("permutation_importance: features/labels length mismatch");
    if (feature_index >= 5)
        throw std::invalid_argument("permutation_importance: feature index must be 0..4");
    if (repeats < 1) throw std::invalid_argument("permutation_importance: repeats must be >= 1");

    const std::size_t n = features.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (predict(model, features[i]) == labels[i]) ++correct;
    const double baseline = static_cast<double>(correct) / static_cast<double>(n);

    std::vector<double> column(n);
    for (std::size_t i = 0; i < n; ++i) column[i] = features[i].as_array()[feature_index];

    double shuffled_sum = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
        std::vector<double> perm = column;
        Rng rng(mix_seed(seed, r));
        shuffle(perm, rng);
        std::size_t ok = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::array<double, 5> arr = features[i].as_array();
            arr[feature_index] = perm[i];
            if (predict(model, FeatureVector::from_array(arr)) == labels[i]) ++ok;
        }
        shuffled_sum += static_cast<double>(ok) / static_cast<double>(n);
    }
    return baseline - shuffled_sum / static_cast<double>(repeats);
}

}  // namespace verdant
