#pragma once

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hypercube.hpp"
#include "indices.hpp"
#include "stats.hpp"
#include "temporal.hpp"
#include "train.hpp"

namespace verdant {

namespace detail {

// Shortest round-trip decimal form; keeps CSV output byte-deterministic.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::array<char, 32> buf;
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

inline std::string trim_ws(std::string s) {
    const auto from = s.find_first_not_of(" \t\r\n");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t\r\n");
    return s.substr(from, to - from + 1);
}

inline double parse_double(const std::string& text, const std::string& context) {
    const std::string t = trim_ws(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw data_error(context + ": expected a number, got \"" + text + "\"");
    return value;
}

inline long parse_long(const std::string& text, const std::string& context) {
    const std::string t = trim_ws(text);
    long value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw data_error(context + ": expected an integer, got \"" + text + "\"");
    return value;
}

}  // namespace detail

struct ManifestEntry {
    std::filesystem::path path;
    int label = 0;  // 1..3
};

/// Manifest CSV: header "path,label", one cube per row. Relative paths are
/// resolved against the manifest's directory.
inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw data_error("cannot open manifest: " + manifest_path.string());
    std::string line;
    if (!std::getline(in, line) || detail::trim_ws(line) != "path,label")
        throw data_error("manifest " + manifest_path.string() +
                         " line 1: expected header \"path,label\"");
    std::vector<ManifestEntry> entries;
    const std::filesystem::path base = manifest_path.parent_path();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim_ws(line).empty()) continue;
        const auto comma = line.find_last_of(',');
        const std::string where =
            "manifest " + manifest_path.string() + " line " + std::to_string(line_no);
        if (comma == std::string::npos) throw data_error(where + ": expected \"path,label\"");
        const std::string raw_path = detail::trim_ws(line.substr(0, comma));
        const long label = detail::parse_long(line.substr(comma + 1), where);
        if (raw_path.empty()) throw data_error(where + ": empty path");
        if (label < 1 || label > 3) throw data_error(where + ": label must be 1..3");
        std::filesystem::path p(raw_path);
        if (p.is_relative()) p = base / p;
        entries.push_back({std::move(p), static_cast<int>(label)});
    }
    return entries;
}

inline void write_manifest(std::span<const ManifestEntry> entries,
                           const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out << "path,label\n";
    for (const ManifestEntry& e : entries)
        out << e.path.generic_string() << "," << e.label << "\n";
    if (!out) throw data_error("write failed: " + path.string());
}

struct DatasetOptions {
    std::size_t drop_front = 10;  // noisy spectral ends; counts are configurable
    std::size_t drop_back = 14;
    BandWindowSet windows = BandWindowSet::standard();
};

inline std::array<double, 4> cube_index_means(const SpectralCube& cube,
                                              const BandWindowSet& windows) {
    return index_means(compute_index_maps(cube, windows));
}

/// Loads every cube in the manifest, trims the spectral ends and reduces each
/// image to its four index means.
inline std::vector<LabeledExample> load_dataset(std::span<const ManifestEntry> entries,
                                                const DatasetOptions& options = {}) {
    std::vector<LabeledExample> dataset;
    dataset.reserve(entries.size());
    for (const ManifestEntry& entry : entries) {
        SpectralCube cube = load_cube(entry.path);
        if (options.drop_front + options.drop_back > 0)
            cube = trim_bands(cube, options.drop_front, options.drop_back);
        dataset.push_back({cube_index_means(cube, options.windows), entry.label});
    }
    return dataset;
}

inline std::vector<FeatureVector> to_feature_matrix(std::span<const LabeledExample> examples,
                                                    const FusionWeights& weights) {
    std::vector<FeatureVector> features;
    features.reserve(examples.size());
    for (const LabeledExample& e : examples)
        features.push_back(make_feature_vector(e.raw_indices, weights));
    return features;
}

inline std::vector<int> labels_of(std::span<const LabeledExample> examples) {
    std::vector<int> labels;
    labels.reserve(examples.size());
    for (const LabeledExample& e : examples) labels.push_back(e.label);
    return labels;
}

template <typename Index>
std::vector<LabeledExample> gather(std::span<const LabeledExample> examples,
                                   const std::vector<Index>& indices) {
    std::vector<LabeledExample> out;
    out.reserve(indices.size());
    for (Index i : indices) out.push_back(examples[static_cast<std::size_t>(i)]);
    return out;
}

// Optional z-scoring of the four raw index columns. Off by default; the raw
// indices are already range-bounded.
struct FeatureScaler {
    std::array<double, 4> mean{};
    std::array<double, 4> stddev{};

    static FeatureScaler fit(std::span<const LabeledExample> examples) {
        if (examples.empty()) throw std::invalid_argument("FeatureScaler::fit: empty dataset");
        FeatureScaler s;
        const double n = static_cast<double>(examples.size());
        for (std::size_t k = 0; k < 4; ++k) {
            double sum = 0.0;
            for (const LabeledExample& e : examples) sum += e.raw_indices[k];
            s.mean[k] = sum / n;
            double ss = 0.0;
            for (const LabeledExample& e : examples) {
                const double d = e.raw_indices[k] - s.mean[k];
                ss += d * d;
            }
            s.stddev[k] = std::sqrt(ss / n);
        }
        return s;
    }

    void apply(std::span<LabeledExample> examples) const {
        for (LabeledExample& e : examples)
            for (std::size_t k = 0; k < 4; ++k) {
                const double scale = stddev[k] > 0.0 ? stddev[k] : 1.0;
                e.raw_indices[k] = (e.raw_indices[k] - mean[k]) / scale;
            }
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw data_error("cannot open for writing: " + path.string());
        out << "feature,mean,stddev\n";
        const char* names[4] = {"ndvi", "gndvi", "evi", "msavi"};
        for (std::size_t k = 0; k < 4; ++k)
            out << names[k] << "," << detail::format_double(mean[k]) << ","
                << detail::format_double(stddev[k]) << "\n";
        if (!out) throw data_error("write failed: " + path.string());
    }

    static FeatureScaler load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw data_error("cannot open scaler: " + path.string());
        std::string line;
        if (!std::getline(in, line) || detail::trim_ws(line) != "feature,mean,stddev")
            throw data_error("scaler " + path.string() + " line 1: expected header");
        FeatureScaler s;
        for (std::size_t k = 0; k < 4; ++k) {
            const std::string where = "scaler " + path.string() + " line " + std::to_string(k + 2);
            if (!std::getline(in, line)) throw data_error(where + ": missing row");
            std::stringstream ss(line);
            std::string name, mean_text, sd_text;
            if (!std::getline(ss, name, ',') || !std::getline(ss, mean_text, ',') ||
                !std::getline(ss, sd_text))
                throw data_error(where + ": expected \"feature,mean,stddev\"");
            s.mean[k] = detail::parse_double(mean_text, where);
            s.stddev[k] = detail::parse_double(sd_text, where);
        }
        return s;
    }
};

inline void write_history_csv(std::span<const EpochRecord> history,
                              const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out << "epoch,train_loss,val_loss,val_accuracy\n";
    for (const EpochRecord& rec : history)
        out << rec.epoch << "," << detail::format_double(rec.train_loss) << ","
            << detail::format_double(rec.val_loss) << ","
            << detail::format_double(rec.val_accuracy) << "\n";
    if (!out) throw data_error("write failed: " + path.string());
}

inline void write_features_csv(std::span<const FeatureVector> features,
                               std::span<const int> labels, const std::filesystem::path& path) {
    if (features.size() != labels.size())
        throw std::invalid_argument("write_features_csv: features/labels length mismatch");
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out << "ndvi,gndvi,evi,msavi,hvi,label\n";
    for (std::size_t i = 0; i < features.size(); ++i) {
        const std::array<double, 5> a = features[i].as_array();
        for (double v : a) out << detail::format_double(v) << ",";
        out << labels[i] << "\n";
    }
    if (!out) throw data_error("write failed: " + path.string());
}

/// Series CSV: header "day,ndvi", one observation per row.
inline NdviSeries read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open series: " + path.string());
    std::string line;
    if (!std::getline(in, line) || detail::trim_ws(line) != "day,ndvi")
        throw data_error("series " + path.string() + " line 1: expected header \"day,ndvi\"");
    NdviSeries series;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim_ws(line).empty()) continue;
        const std::string where = "series " + path.string() + " line " + std::to_string(line_no);
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw data_error(where + ": expected \"day,ndvi\"");
        const double day = detail::parse_double(line.substr(0, comma), where);
        const double value = detail::parse_double(line.substr(comma + 1), where);
        if (!series.observations.empty() && !(day > series.observations.back().day))
            throw data_error(where + ": days must be strictly increasing");
        if (!(value >= -1.0 && value <= 1.0))
            throw data_error(where + ": ndvi must lie in [-1, 1]");
        series.observations.push_back({day, value});
    }
    validate(series);
    return series;
}

inline void write_series_csv(const NdviSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out << "day,ndvi\n";
    for (const NdviObservation& obs : series.observations)
        out << detail::format_double(obs.day) << "," << detail::format_double(obs.ndvi) << "\n";
    if (!out) throw data_error("write failed: " + path.string());
}

inline std::string onset_rules_cell(const OnsetReport& report) {
    std::string rules;
    if (report.below_healthy) rules += "below_healthy";
    if (report.cumulative_drop) {
        if (!rules.empty()) rules += "|";
        rules += "cumulative_drop";
    }
    return rules;
}

/// Onset CSV: header "onset_day,peak_ndvi,decline,rules"; onset_day is empty
/// when no onset was detected, rules are joined with '|'.
inline void write_onset_csv(const OnsetReport& report, std::ostream& out) {
    out << "onset_day,peak_ndvi,decline,rules\n";
    if (report.onset_day) out << detail::format_double(*report.onset_day);
    out << "," << detail::format_double(report.peak_ndvi) << ","
        << detail::format_double(report.decline_from_peak) << "," << onset_rules_cell(report)
        << "\n";
}

inline void write_onset_csv(const OnsetReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    write_onset_csv(report, out);
    if (!out) throw data_error("write failed: " + path.string());
}

struct EvalReport {
    ConfusionMatrix cm;
    ClassMetrics cls;
    BootstrapCI accuracy_ci;
    std::array<double, 5> importances{};
    std::optional<TTestResult> knn_t_test;
};

inline void write_t_test_block(const TTestResult& t, std::ostream& out) {
    out << "# t_test\n";
    out << "t_statistic,degrees_of_freedom,p_value,degenerate,mean_difference\n";
    out << detail::format_double(t.t_statistic) << "," << t.degrees_of_freedom << ","
        << detail::format_double(t.p_value) << "," << (t.degenerate ? 1 : 0) << ","
        << detail::format_double(t.mean_difference) << "\n";
}

/// Evaluation report as '#'-titled CSV blocks with fixed column headers.
inline void write_eval_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    const std::size_t C = report.cm.class_count;

    out << "# confusion_matrix\n";
    out << "true_class";
    for (std::size_t c = 1; c <= C; ++c) out << ",pred_" << c;
    out << "\n";
    for (std::size_t t = 0; t < C; ++t) {
        out << (t + 1);
        for (std::size_t p = 0; p < C; ++p) out << "," << report.cm.at(t, p);
        out << "\n";
    }

    out << "# class_metrics\n";
    out << "class,precision,recall,f1\n";
    for (std::size_t c = 0; c < C; ++c)
        out << (c + 1) << "," << detail::format_double(report.cls.precision[c]) << ","
            << detail::format_double(report.cls.recall[c]) << ","
            << detail::format_double(report.cls.f1[c]) << "\n";

    out << "# accuracy\naccuracy\n" << detail::format_double(report.cls.accuracy) << "\n";

    out << "# bootstrap_ci\n";
    out << "metric,point_estimate,lower,upper,confidence,resamples\n";
    out << "accuracy," << detail::format_double(report.accuracy_ci.point_estimate) << ","
        << detail::format_double(report.accuracy_ci.lower) << ","
        << detail::format_double(report.accuracy_ci.upper) << ","
        << detail::format_double(report.accuracy_ci.confidence) << ","
        << report.accuracy_ci.resamples << "\n";

    out << "# permutation_importance\n";
    out << "feature,importance\n";
    const char* names[5] = {"ndvi", "gndvi", "evi", "msavi", "hvi"};
    for (std::size_t f = 0; f < 5; ++f)
        out << names[f] << "," << detail::format_double(report.importances[f]) << "\n";

    if (report.knn_t_test) write_t_test_block(*report.knn_t_test, out);
    if (!out) throw data_error("write failed: " + path.string());
}

/// Compare CSV: per-fold scores followed by the paired t-test block.
inline void write_compare_csv(std::span<const double> scores_a, std::span<const double> scores_b,
                              const TTestResult& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out << "# fold_scores\n";
    out << "fold,score_a,score_b\n";
    for (std::size_t i = 0; i < scores_a.size(); ++i)
        out << (i + 1) << "," << detail::format_double(scores_a[i]) << ","
            << detail::format_double(scores_b[i]) << "\n";
    write_t_test_block(t, out);
    if (!out) throw data_error("write failed: " + path.string());
}

}  // namespace verdant
