// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Run with no arguments for all criteria, or with a criterion number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace verdant;
using testsupport::TempDir;
using testsupport::run_cli;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }
};

// 1. End-to-end: 600 synthetic scenes (noise 0.02, fixed seeds), stock
//    batch 128 / lr 1e-3 / 15 epochs, validation accuracy >= 0.95 in < 60 s.
Check criterion_1() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const auto dataset = testsupport::synthetic_dataset(200, 16, 0.02, 7);
    c.require(dataset.size() == 600, "benchmark must hold 600 scenes");
    const SplitIndices idx = split(labels_of(dataset), SplitSpec{0.70, 0.15, 0.15, 11});
    const auto train_set = gather(std::span<const LabeledExample>(dataset), idx.train);
    const auto val_set = gather(std::span<const LabeledExample>(dataset), idx.val);
    TrainConfig config;  // batch 128, lr 1e-3, 15 epochs, dropout 0.5
    config.rng_seed = 31;
    const TrainResult result =
        train(make_model(kDefaultHiddenSizes, config.dropout_rate, 21), train_set, val_set, config);
    const double accuracy = result.history.back().val_accuracy;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(result.history.size() == 15, "history must cover 15 epochs");
    c.require(accuracy >= 0.95, "validation accuracy " + std::to_string(accuracy) + " < 0.95");
    c.require(seconds < 60.0, "runtime " + std::to_string(seconds) + "s exceeds 60s");
    c.detail = c.ok ? "val_accuracy=" + std::to_string(accuracy) + " in " +
                          std::to_string(seconds) + "s"
                    : c.detail;
    return c;
}

// 2. Gradient oracle: >= 20 random small models, every parameter's analytic
//    gradient matches central differences (h = 1e-6) at relative error < 1e-4.
Check criterion_2() {
    Check c;
    std::size_t checked = 0;
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        auto [model, batch] = testsupport::random_gradcheck_case(trial);
        const auto stats = testsupport::gradient_check(model, batch, mix_seed(1234, trial));
        checked += stats.checked;
        worst = std::max(worst, stats.worst_rel);
        c.require(stats.failed == 0,
                  "trial " + std::to_string(trial) + ": " + std::to_string(stats.failed) +
                      " gradient entries out of tolerance");
    }
    c.require(checked >= 500, "too few parameters checked");
    if (c.ok) {
        std::ostringstream ss;
        ss << checked << " parameters checked, worst rel err " << worst;
        c.detail = ss.str();
    }
    return c;
}

// 3. Split arithmetic: n = 2679 at 70-15-15 -> (1875, 402, 402).
Check criterion_3() {
    Check c;
    std::vector<int> labels;
    for (int cl = 1; cl <= 3; ++cl) labels.insert(labels.end(), 893, cl);
    const SplitIndices idx = split(labels, SplitSpec{0.70, 0.15, 0.15, 1});
    c.require(idx.train.size() == 1875, "train size " + std::to_string(idx.train.size()));
    c.require(idx.val.size() == 402, "val size " + std::to_string(idx.val.size()));
    c.require(idx.test.size() == 402, "test size " + std::to_string(idx.test.size()));
    c.detail = "sizes (1875, 402, 402)";
    return c;
}

// 4. Threshold oracle: classify_map agrees with a scalar brute-force loop on
//    the -1..1 grid at step 0.001 with zero mismatches.
Check criterion_4() {
    Check c;
    Raster grid{2001, 1, {}};
    for (int i = 0; i <= 2000; ++i)
        grid.values.push_back(static_cast<double>(i - 1000) / 1000.0);
    const LabelMap map = classify_map(grid);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < grid.values.size(); ++i)
        if (map.labels[i] != classify_threshold(grid.values[i])) ++mismatches;
    c.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
    c.detail = "2001 grid points, zero mismatches";
    return c;
}

// 5. Softmax and loss invariants on 10^4 random logit vectors.
Check criterion_5() {
    Check c;
    Rng rng(515);
    for (int trial = 0; trial < 10000 && c.ok; ++trial) {
        std::vector<double> z(3), shifted(3);
        const double offset = 20.0 * rng.normal();
        for (int j = 0; j < 3; ++j) {
            z[j] = 10.0 * rng.normal();
            shifted[j] = z[j] + offset;
        }
        const ClassProbabilities a = softmax(z);
        const ClassProbabilities b = softmax(shifted);
        double sum = 0.0;
        for (double p : a.probs) sum += p;
        c.require(std::abs(sum - 1.0) <= 1e-12, "probability sum off by more than 1e-12");
        for (int j = 0; j < 3; ++j)
            c.require(std::abs(a.probs[j] - b.probs[j]) <= 1e-12,
                      "shift invariance violated beyond 1e-12");
    }
    c.require(cross_entropy(std::array<double, 3>{0, 1, 0}, std::vector<double>{0, 1, 0}) == 0.0,
              "perfect prediction must cost exactly 0");
    const std::vector<double> uniform(3, 1.0 / 3.0);
    c.require(std::abs(cross_entropy(std::array<double, 3>{1, 0, 0}, uniform) - std::log(3.0)) <=
                  1e-9,
              "uniform prediction must cost ln 3 within 1e-9");
    c.detail = "10^4 logit vectors";
    return c;
}

// 6. Statistics oracles: the paired t-test closed form and bootstrap checks.
Check criterion_6() {
    Check c;
    const TTestResult t =
        paired_t_test(std::vector<double>{1, 2, 3}, std::vector<double>{0, 0, 0});
    c.require(std::abs(t.t_statistic - 2.0 * std::sqrt(3.0)) <= 1e-9,
              "t statistic must equal 2 sqrt(3) within 1e-9");
    c.require(t.degrees_of_freedom == 2, "df must be 2");
    c.require(std::abs(t.p_value - 0.0742) <= 1e-3, "two-tailed p must be 0.0742 within 1e-3");

    const std::vector<int> all(60, 2);
    const BootstrapCI perfect = bootstrap_ci(all, all, accuracy_of, 500, 3);
    c.require(perfect.lower == 1.0 && perfect.upper == 1.0,
              "all-correct bootstrap CI must be exactly [1, 1]");

    std::vector<int> truth(400, 1), pred(400, 1);
    for (int i = 0; i < 40; ++i) pred[static_cast<std::size_t>(i * 10)] = 2;
    const BootstrapCI ci = bootstrap_ci(truth, pred, accuracy_of, 1000, 17);
    c.require(ci.lower <= 0.90 && ci.upper >= 0.90, "CI must contain 0.90");
    const double width = ci.upper - ci.lower;
    c.require(width >= 0.04 && width <= 0.09,
              "CI width " + std::to_string(width) + " outside [0.04, 0.09]");
    std::ostringstream ss;
    ss << "t=" << t.t_statistic << " p=" << t.p_value << " CI [" << ci.lower << ", " << ci.upper
       << "]";
    c.detail = ss.str();
    return c;
}

// 7. Temporal onset: the day-15 collapse series triggers at day 15; a flat
//    healthy series never triggers.
Check criterion_7() {
    Check c;
    NdviSeries collapse;
    collapse.observations = {{0, 0.80}, {5, 0.80}, {10, 0.78}, {15, 0.55}, {20, 0.40}};
    const OnsetReport onset = detect_onset(collapse);
    c.require(onset.onset_day.has_value() && *onset.onset_day == 15.0,
              "collapse series must report onset at day 15");
    NdviSeries flat;
    flat.observations = {{0, 0.8}, {5, 0.8}, {10, 0.8}, {15, 0.8}, {20, 0.8}};
    c.require(!detect_onset(flat).onset_day.has_value(), "flat series must report no onset");
    c.detail = "onset day 15; flat series silent";
    return c;
}

// 8. Determinism: cmd_train twice -> identical checkpoints and history; HSC and
//    FCN1 files round-trip bit-exactly.
Check criterion_8() {
    Check c;
    TempDir dir("acceptance8");
    auto gen = run_cli("generate --out scenes --count 3 --size 8 --noise 0.02 --seed 5",
                       dir.path());
    c.require(gen.exit_code == 0, "generate failed: " + gen.err);
    const std::string train_flags =
        "--manifest scenes/manifest.csv --hidden 16 --epochs 3 --batch 8 --seed 3 --split-seed 1";
    auto t1 = run_cli("train " + train_flags + " --checkpoint a.fcn1 --history a.csv", dir.path());
    auto t2 = run_cli("train " + train_flags + " --checkpoint b.fcn1 --history b.csv", dir.path());
    c.require(t1.exit_code == 0 && t2.exit_code == 0, "train failed: " + t1.err + t2.err);
    c.require(testsupport::read_file_bytes(dir / "a.fcn1") ==
                  testsupport::read_file_bytes(dir / "b.fcn1"),
              "checkpoints differ between identical runs");
    c.require(testsupport::read_file_bytes(dir / "a.csv") ==
                  testsupport::read_file_bytes(dir / "b.csv"),
              "history CSVs differ between identical runs");

    const SpectralCube cube = load_cube(dir / "scenes/healthy_0000.hsc");
    write_cube(cube, dir / "copy.hsc");
    c.require(testsupport::read_file_bytes(dir / "scenes/healthy_0000.hsc") ==
                  testsupport::read_file_bytes(dir / "copy.hsc"),
              "HSC load/write round-trip changed bytes");

    const Model model = load_model(dir / "a.fcn1");
    save_model(model, dir / "copy.fcn1");
    c.require(testsupport::read_file_bytes(dir / "a.fcn1") ==
                  testsupport::read_file_bytes(dir / "copy.fcn1"),
              "FCN1 load/save round-trip changed bytes");
    c.detail = "identical runs byte-equal; formats round-trip bit-exactly";
    return c;
}

// parse the "# t_test" block of a compare CSV
struct ParsedTTest {
    double t = 0.0;
    long df = -1;
    double p = -1.0;
    int degenerate = -1;
    double mean_difference = 0.0;
    bool found = false;
};

ParsedTTest parse_t_test(const std::string& csv_text) {
    std::stringstream ss(csv_text);
    std::string line;
    ParsedTTest parsed;
    while (std::getline(ss, line)) {
        if (line != "# t_test") continue;
        std::getline(ss, line);  // column header
        if (!std::getline(ss, line)) break;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::stringstream row(line);
        row >> parsed.t >> parsed.df >> parsed.p >> parsed.degenerate >> parsed.mean_difference;
        parsed.found = static_cast<bool>(row) || row.eof();
        break;
    }
    return parsed;
}

// 9. Model comparison: a well-formed FCNN-vs-KNN paired t-test over shared
//    5-fold assignments under injected label noise, and a degenerate result
//    with zero mean difference when both sides are the same checkpoint.
Check criterion_9() {
    Check c;
    TempDir dir("acceptance9");
    auto gen = run_cli("generate --out scenes --count 20 --size 8 --noise 0.02 --seed 13",
                       dir.path());
    c.require(gen.exit_code == 0, "generate failed: " + gen.err);

    // inject 10% label noise: rotate every 10th label
    auto entries = read_manifest(dir / "scenes/manifest.csv");
    for (std::size_t i = 0; i < entries.size(); i += 10)
        entries[i].label = entries[i].label % 3 + 1;
    std::vector<ManifestEntry> relative;
    for (const ManifestEntry& e : entries)
        relative.push_back({e.path.filename(), e.label});
    write_manifest(relative, dir / "scenes/noisy.csv");

    const std::string common = "--folds 5 --epochs 5 --batch 32 --hidden 16 --seed 3";
    auto cmp = run_cli("compare --manifest scenes/noisy.csv " + common + " --out cmp.csv",
                       dir.path());
    c.require(cmp.exit_code == 0, "compare failed: " + cmp.err);
    const ParsedTTest fcnn_vs_knn = parse_t_test(testsupport::read_file_bytes(dir / "cmp.csv"));
    c.require(fcnn_vs_knn.found, "compare CSV lacks a t_test block");
    c.require(fcnn_vs_knn.df == 4, "df must be folds - 1 = 4");
    c.require(fcnn_vs_knn.degenerate == 0, "t-test unexpectedly degenerate");
    c.require(fcnn_vs_knn.p >= 0.0 && fcnn_vs_knn.p <= 1.0, "p outside [0, 1]");
    c.require(std::isfinite(fcnn_vs_knn.t), "t not finite");

    auto tr = run_cli("train --manifest scenes/noisy.csv --hidden 16 --epochs 3 --batch 32 "
                      "--seed 3 --split-seed 1 --checkpoint m.fcn1 --history h.csv",
                      dir.path());
    c.require(tr.exit_code == 0, "train failed: " + tr.err);
    auto same = run_cli("compare --manifest scenes/noisy.csv --folds 5 --seed 3 "
                        "--a m.fcn1 --b m.fcn1 --out same.csv",
                        dir.path());
    c.require(same.exit_code == 0, "self-compare failed: " + same.err);
    const ParsedTTest self = parse_t_test(testsupport::read_file_bytes(dir / "same.csv"));
    c.require(self.found, "self-compare CSV lacks a t_test block");
    c.require(self.degenerate == 1, "identical checkpoints must be flagged degenerate");
    c.require(self.mean_difference == 0.0, "identical checkpoints must have mean difference 0");
    std::ostringstream ss;
    ss << "fcnn-vs-knn t=" << fcnn_vs_knn.t << " p=" << fcnn_vs_knn.p
       << "; self-compare degenerate with mean diff 0";
    c.detail = ss.str();
    return c;
}

// 10. Feature importance: labels driven by NDVI alone rank NDVI strictly
//     first among the five inputs.
Check criterion_10() {
    Check c;
    // ndvi decides the label through bands at +-0.3; the other indices are
    // wide independent noise so the derived hvi column cannot stand in for
    // the raw ndvi column
    const ThresholdBands bands{0.3, -0.3};
    Rng rng(616);
    std::vector<LabeledExample> dataset;
    for (int i = 0; i < 600; ++i) {
        const double v = rng.uniform01() * 1.9 - 0.95;
        dataset.push_back({{v, 2.0 * rng.uniform01() - 1.0, 2.0 * rng.uniform01() - 1.0,
                            2.0 * rng.uniform01() - 1.0},
                           classify_threshold(v, bands)});
    }
    TrainConfig config;  // lr stays at the 1e-3 default
    config.batch_size = 32;
    config.epochs = 60;
    config.rng_seed = 2;
    const std::span<const LabeledExample> all(dataset);
    const TrainResult result =
        train(make_model({16}, config.dropout_rate, 3), all.subspan(0, 480), all.subspan(480),
              config);
    c.require(result.history.back().val_accuracy > 0.8,
              "benchmark model failed to learn the NDVI rule");
    const auto eval_set = all.subspan(480);
    const std::vector<FeatureVector> features = to_feature_matrix(eval_set, result.model.fusion);
    const std::vector<int> labels = labels_of(eval_set);
    std::array<double, 5> importance{};
    for (std::size_t f = 0; f < 5; ++f)
        importance[f] = permutation_importance(result.model, features, labels, f, 10, 5);
    for (std::size_t f = 1; f < 5; ++f)
        c.require(importance[0] > importance[f],
                  "NDVI importance not strictly greatest (feature " + std::to_string(f) + ")");
    std::ostringstream ss;
    ss << "importances: ndvi=" << importance[0] << " gndvi=" << importance[1]
       << " evi=" << importance[2] << " msavi=" << importance[3] << " hvi=" << importance[4];
    c.detail = ss.str();
    return c;
}

const char* kDescriptions[10] = {
    "600-scene benchmark reaches validation accuracy >= 0.95 at stock hyperparameters",
    "analytic gradients match central finite differences at relative error < 1e-4",
    "stratified split of 2679 at 70-15-15 yields (1875, 402, 402)",
    "classify_map matches the scalar threshold rule on the 0.001-step NDVI grid",
    "softmax sum/shift invariants at 1e-12 and cross-entropy anchor values",
    "paired t-test and bootstrap CI oracles",
    "NDVI collapse series triggers onset at day 15; flat series stays silent",
    "training runs, checkpoints and rasters are bit-reproducible",
    "compare emits a well-formed paired t-test; identical checkpoints degenerate",
    "permutation importance ranks NDVI strictly first on an NDVI-driven benchmark",
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Check()>> criteria{
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
        criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};

    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 10) {
            std::cerr << "usage: acceptance [1..10]\n";
            return 2;
        }
    }

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
        Check result;
        try {
            result = criteria[i]();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        std::cout << (result.ok ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": "
                  << kDescriptions[i];
        if (!result.detail.empty()) std::cout << " [" << result.detail << "]";
        std::cout << "\n";
        if (!result.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
