// verdant - crop-health pipeline driver:
//   generate  synthetic hyperspectral scenes + manifest
//   train     featurize -> split -> FCNN training -> checkpoint + history
//   eval      metrics, bootstrap CI, feature importance, NDVI maps
//   temporal  multi-date NDVI onset detection
//   compare   paired t-test between two models over shared folds

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <verdant/verdant.hpp>

namespace fs = std::filesystem;
using namespace verdant;

namespace {

constexpr const char* kClassNames[3] = {"healthy", "rust", "other"};

std::string fmt(double v) { return verdant::detail::format_double(v); }

struct GenerateArgs {
    std::string out_dir;
    std::size_t count = 200;
    std::size_t size = 50;
    double noise = 0.02;
    std::uint64_t seed = 7;
};

int run_generate(const GenerateArgs& args) {
    fs::create_directories(args.out_dir);
    std::vector<ManifestEntry> entries;
    for (int label = 1; label <= 3; ++label) {
        for (std::size_t i = 0; i < args.count; ++i) {
            const SceneSpec spec{label, args.size, args.noise,
                                 mix_seed(args.seed, static_cast<std::uint64_t>(label), i)};
            const GeneratedScene scene = generate_scene(spec);
            char name[64];
            std::snprintf(name, sizeof(name), "%s_%04zu.hsc", kClassNames[label - 1], i);
            write_cube(scene.cube, fs::path(args.out_dir) / name);
            entries.push_back({name, label});
        }
    }
    write_manifest(entries, fs::path(args.out_dir) / "manifest.csv");
    if (args.count == 0)
        std::cerr << "warning: count is 0, wrote an empty manifest\n";
    std::cout << "wrote " << entries.size() << " scenes and manifest.csv to " << args.out_dir
              << "\n";
    return 0;
}

struct TrainArgs {
    std::string manifest;
    std::string checkpoint = "model.fcn1";
    std::string history = "history.csv";
    std::vector<std::size_t> hidden = kDefaultHiddenSizes;
    TrainConfig config;
    SplitSpec split_spec;
    std::size_t drop_front = 10;
    std::size_t drop_back = 14;
    bool standardize = false;
};

int run_train(const TrainArgs& args) {
    const auto entries = read_manifest(args.manifest);
    DatasetOptions options;
    options.drop_front = args.drop_front;
    options.drop_back = args.drop_back;
    std::vector<LabeledExample> dataset = load_dataset(entries, options);
    if (dataset.empty()) throw data_error("manifest lists no cubes: " + args.manifest);

    const std::vector<int> labels = labels_of(dataset);
    const SplitIndices idx = split(labels, args.split_spec);

    if (args.standardize) {
        // statistics come from the training split only, applied everywhere
        const auto train_view = gather(std::span<const LabeledExample>(dataset), idx.train);
        const FeatureScaler scaler = FeatureScaler::fit(train_view);
        scaler.apply(dataset);
        scaler.save(args.checkpoint + ".scale");
        std::cout << "standardized features; scaler saved to " << args.checkpoint << ".scale\n";
    }

    const auto train_set = gather(std::span<const LabeledExample>(dataset), idx.train);
    const auto val_set = gather(std::span<const LabeledExample>(dataset), idx.val);
    std::cout << "split: " << idx.train.size() << " train, " << idx.val.size() << " val, "
              << idx.test.size() << " test\n";

    Model model = make_model(args.hidden, args.config.dropout_rate, mix_seed(args.config.rng_seed, 0xA));
    const TrainResult result =
        train(std::move(model), train_set, val_set, args.config, [&](const EpochRecord& rec) {
            std::cout << "epoch " << rec.epoch << "/" << args.config.epochs
                      << " train_loss=" << fmt(rec.train_loss) << " val_loss=" << fmt(rec.val_loss)
                      << " val_accuracy=" << fmt(rec.val_accuracy) << "\n";
        });

    save_model(result.model, args.checkpoint);
    write_history_csv(result.history, args.history);
    std::cout << "checkpoint: " << args.checkpoint << "\nhistory: " << args.history << "\n";
    std::cout << "final validation accuracy: " << fmt(result.history.back().val_accuracy) << "\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint;
    std::string manifest;
    std::string out_dir = ".";
    std::string subset = "all";
    SplitSpec split_spec;
    std::size_t bootstrap_resamples = 1000;
    std::size_t importance_repeats = 10;
    std::uint64_t seed = 0;
    std::size_t render_index = 0;
    std::string features_out;
    bool compare_knn = false;
    std::size_t folds = 5;
    std::size_t knn_k = 5;
    TrainConfig fold_config;
    std::vector<std::size_t> hidden = kDefaultHiddenSizes;
    std::size_t drop_front = 10;
    std::size_t drop_back = 14;
};

double fold_accuracy_fcnn(std::span<const LabeledExample> dataset, const FoldPair& fold,
                          const std::vector<std::size_t>& hidden, TrainConfig config,
                          std::uint64_t seed) {
    config.rng_seed = seed;
    const auto train_set = gather(dataset, fold.train);
    const auto val_set = gather(dataset, fold.val);
    const TrainResult result =
        train(make_model(hidden, config.dropout_rate, mix_seed(seed, 0xA)), train_set, val_set,
              config);
    return evaluate(result.model, val_set).accuracy;
}

double fold_accuracy_knn(std::span<const LabeledExample> dataset, const FoldPair& fold,
                         std::size_t k) {
    // KNN sees the pre-training feature space: uniform fusion weights
    const auto train_set = gather(dataset, fold.train);
    const auto val_set = gather(dataset, fold.val);
    const auto train_features = to_feature_matrix(train_set, FusionWeights{});
    const auto train_labels = labels_of(train_set);
    std::size_t correct = 0;
    for (const LabeledExample& e : val_set) {
        const FeatureVector x = make_feature_vector(e.raw_indices, FusionWeights{});
        if (knn_predict(train_features, train_labels, x, {k}) == e.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(val_set.size());
}

int run_eval(const EvalArgs& args) {
    const Model model = load_model(args.checkpoint);
    const auto entries = read_manifest(args.manifest);
    DatasetOptions options;
    options.drop_front = args.drop_front;
    options.drop_back = args.drop_back;
    std::vector<LabeledExample> dataset = load_dataset(entries, options);
    if (dataset.empty()) throw data_error("manifest lists no cubes: " + args.manifest);

    const fs::path scaler_path = args.checkpoint + ".scale";
    if (fs::exists(scaler_path)) {
        FeatureScaler::load(scaler_path).apply(dataset);
        std::cout << "applied feature scaler " << scaler_path.string() << "\n";
    }

    std::vector<LabeledExample> subset;
    if (args.subset == "all") {
        subset = dataset;
    } else {
        const SplitIndices idx = split(labels_of(dataset), args.split_spec);
        const auto& part = args.subset == "train" ? idx.train
                           : args.subset == "val" ? idx.val
                                                  : idx.test;
        subset = gather(std::span<const LabeledExample>(dataset), part);
    }
    if (subset.empty()) throw data_error("selected evaluation subset is empty");

    const std::vector<FeatureVector> features = to_feature_matrix(subset, model.fusion);
    const std::vector<int> truth = labels_of(subset);
    std::vector<int> predicted;
    predicted.reserve(features.size());
    for (const FeatureVector& x : features) predicted.push_back(predict(model, x));

    EvalReport report;
    report.cm = confusion(truth, predicted);
    report.cls = metrics(report.cm);
    report.accuracy_ci = bootstrap_ci(truth, predicted, accuracy_of, args.bootstrap_resamples,
                                      mix_seed(args.seed, 0xB));
    for (std::size_t f = 0; f < 5; ++f)
        report.importances[f] = permutation_importance(model, features, truth, f,
                                                       args.importance_repeats,
                                                       mix_seed(args.seed, 0xC, f));

    if (args.compare_knn) {
        const auto folds = k_fold(labels_of(subset), args.folds, mix_seed(args.seed, 0xD));
        std::vector<double> fcnn_scores, knn_scores;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            fcnn_scores.push_back(fold_accuracy_fcnn(subset, folds[f], args.hidden,
                                                     args.fold_config, mix_seed(args.seed, 1, f)));
            knn_scores.push_back(fold_accuracy_knn(subset, folds[f], args.knn_k));
        }
        report.knn_t_test = paired_t_test(fcnn_scores, knn_scores);
    }

    fs::create_directories(args.out_dir);
    const fs::path out_dir(args.out_dir);
    write_eval_report_csv(report, out_dir / "report.csv");

    if (args.render_index >= entries.size())
        throw data_error("render index " + std::to_string(args.render_index) +
                         " out of range for manifest of " + std::to_string(entries.size()));
    SpectralCube render_cube = load_cube(entries[args.render_index].path);
    if (args.drop_front + args.drop_back > 0)
        render_cube = trim_bands(render_cube, args.drop_front, args.drop_back);
    const IndexMaps maps = compute_index_maps(render_cube, options.windows);
    write_ppm(render_heatmap(maps.ndvi), out_dir / "heatmap.ppm");
    write_ppm(render_class_map(classify_map(maps.ndvi)), out_dir / "classmap.ppm");

    if (!args.features_out.empty()) write_features_csv(features, truth, args.features_out);

    std::cout << "examples: " << subset.size() << "\n";
    std::cout << "accuracy: " << fmt(report.cls.accuracy) << " (95% CI ["
              << fmt(report.accuracy_ci.lower) << ", " << fmt(report.accuracy_ci.upper) << "], B="
              << args.bootstrap_resamples << ")\n";
    const char* feature_names[5] = {"ndvi", "gndvi", "evi", "msavi", "hvi"};
    for (std::size_t f = 0; f < 5; ++f)
        std::cout << "importance " << feature_names[f] << ": " << fmt(report.importances[f])
                  << "\n";
    if (report.knn_t_test) {
        const TTestResult& t = *report.knn_t_test;
        std::cout << "fcnn vs knn: t=" << fmt(t.t_statistic) << " df=" << t.degrees_of_freedom
                  << " p=" << fmt(t.p_value) << (t.degenerate ? " (degenerate)" : "") << "\n";
    }
    std::cout << "report: " << (out_dir / "report.csv").string() << "\n";
    return 0;
}

struct TemporalArgs {
    std::string series_csv;
    std::string cubes_csv;
    std::string out = "onset.csv";
    ThresholdBands bands;
    double drop_threshold = 0.1;
    std::size_t drop_front = 10;
    std::size_t drop_back = 14;
};

// "day,path" rows, days strictly increasing; paths resolve against the CSV.
std::vector<std::pair<double, SpectralCube>> load_dated_cubes(const fs::path& csv,
                                                              std::size_t drop_front,
                                                              std::size_t drop_back) {
    std::ifstream in(csv);
    if (!in) throw data_error("cannot open cube list: " + csv.string());
    std::string line;
    if (!std::getline(in, line) || verdant::detail::trim_ws(line) != "day,path")
        throw data_error("cube list " + csv.string() + " line 1: expected header \"day,path\"");
    std::vector<std::pair<double, SpectralCube>> cubes;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (verdant::detail::trim_ws(line).empty()) continue;
        const std::string where = "cube list " + csv.string() + " line " + std::to_string(line_no);
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw data_error(where + ": expected \"day,path\"");
        const double day = verdant::detail::parse_double(line.substr(0, comma), where);
        fs::path p(verdant::detail::trim_ws(line.substr(comma + 1)));
        if (p.is_relative()) p = csv.parent_path() / p;
        SpectralCube cube = load_cube(p);
        if (drop_front + drop_back > 0) cube = trim_bands(cube, drop_front, drop_back);
        cubes.emplace_back(day, std::move(cube));
    }
    return cubes;
}

int run_temporal(const TemporalArgs& args) {
    NdviSeries series;
    if (!args.series_csv.empty()) {
        series = read_series_csv(args.series_csv);
    } else {
        const auto cubes = load_dated_cubes(args.cubes_csv, args.drop_front, args.drop_back);
        if (cubes.empty()) throw data_error("cube list is empty: " + args.cubes_csv);
        series = series_from_cubes(cubes, BandWindowSet::standard());
    }
    if (series.observations.size() < 2)
        throw data_error("need at least 2 observations for onset detection");

    const OnsetReport report = detect_onset(series, args.bands, args.drop_threshold);
    write_onset_csv(report, args.out);
    write_onset_csv(report, std::cout);
    if (report.onset_day)
        std::cout << "onset detected at day " << fmt(*report.onset_day) << "\n";
    else
        std::cout << "no onset detected\n";
    return 0;
}

struct CompareArgs {
    std::string manifest;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    std::string model_a = "fcnn";
    std::string model_b = "knn";
    std::string out = "compare.csv";
    std::size_t knn_k = 5;
    TrainConfig fold_config;
    std::vector<std::size_t> hidden = kDefaultHiddenSizes;
    std::size_t drop_front = 10;
    std::size_t drop_back = 14;
};

double fold_accuracy_checkpoint(const Model& model, std::span<const LabeledExample> dataset,
                                const FoldPair& fold) {
    const auto val_set = gather(dataset, fold.val);
    return evaluate(model, val_set).accuracy;
}

int run_compare(const CompareArgs& args) {
    const auto entries = read_manifest(args.manifest);
    DatasetOptions options;
    options.drop_front = args.drop_front;
    options.drop_back = args.drop_back;
    const std::vector<LabeledExample> dataset = load_dataset(entries, options);
    if (dataset.empty()) throw data_error("manifest lists no cubes: " + args.manifest);

    const auto folds = k_fold(labels_of(dataset), args.folds, mix_seed(args.seed, 0xF));

    auto score_side = [&](const std::string& side, std::uint64_t tag) {
        std::vector<double> scores;
        if (side != "fcnn" && side != "knn") {
            const Model model = load_model(side);  // a checkpoint path
            for (const FoldPair& fold : folds)
                scores.push_back(fold_accuracy_checkpoint(model, dataset, fold));
            return scores;
        }
        for (std::size_t f = 0; f < folds.size(); ++f) {
            if (side == "fcnn")
                scores.push_back(fold_accuracy_fcnn(dataset, folds[f], args.hidden,
                                                    args.fold_config, mix_seed(args.seed, tag, f)));
            else
                scores.push_back(fold_accuracy_knn(dataset, folds[f], args.knn_k));
        }
        return scores;
    };

    const std::vector<double> scores_a = score_side(args.model_a, 1);
    const std::vector<double> scores_b = score_side(args.model_b, 2);
    const TTestResult t = paired_t_test(scores_a, scores_b);
    write_compare_csv(scores_a, scores_b, t, args.out);

    for (std::size_t f = 0; f < scores_a.size(); ++f)
        std::cout << "fold " << (f + 1) << ": a=" << fmt(scores_a[f]) << " b=" << fmt(scores_b[f])
                  << "\n";
    if (t.degenerate)
        std::cout << "paired t-test: degenerate (zero-variance differences), mean difference "
                  << fmt(t.mean_difference) << "\n";
    else
        std::cout << "paired t-test: t=" << fmt(t.t_statistic) << " df=" << t.degrees_of_freedom
                  << " p=" << fmt(t.p_value) << " mean difference " << fmt(t.mean_difference)
                  << "\n";
    std::cout << "wrote " << args.out << "\n";
    return 0;
}

void add_train_config_flags(CLI::App* cmd, TrainConfig& config) {
    cmd->add_option("--batch", config.batch_size, "Mini-batch size")->capture_default_str();
    cmd->add_option("--lr", config.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--epochs", config.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--dropout", config.dropout_rate, "Hidden-layer dropout rate")
        ->capture_default_str();
    cmd->add_option("--seed", config.rng_seed, "Master RNG seed")->capture_default_str();
}

void add_split_flags(CLI::App* cmd, SplitSpec& spec) {
    cmd->add_option("--train-frac", spec.train_fraction, "Training fraction")
        ->capture_default_str();
    cmd->add_option("--val-frac", spec.val_fraction, "Validation fraction")->capture_default_str();
    cmd->add_option("--test-frac", spec.test_fraction, "Test fraction")->capture_default_str();
    cmd->add_option("--split-seed", spec.rng_seed, "Split shuffling seed")->capture_default_str();
}

void add_trim_flags(CLI::App* cmd, std::size_t& front, std::size_t& back) {
    cmd->add_option("--drop-front", front, "Bands dropped from the blue end")
        ->capture_default_str();
    cmd->add_option("--drop-back", back, "Bands dropped from the NIR end")->capture_default_str();
}

void add_config_flag(CLI::App* cmd, std::string& path) {
    cmd->add_option("--config", path,
                    "Read defaults from a flat \"key = value\" file (# comments; "
                    "explicit flags override)");
    // config tokens are injected before explicit flags, so the last value wins
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

// Expands "--config FILE" into --key=value tokens inserted right after the
// subcommand name, so explicit command-line flags take precedence.
std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) return args;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            break;
        }
    }
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw data_error("cannot open config file: " + config_path);
    std::vector<std::string> injected;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = verdant::detail::trim_ws(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "config " + config_path + " line " + std::to_string(line_no);
        if (eq == std::string::npos) throw data_error(where + ": expected \"key = value\"");
        const std::string key = verdant::detail::trim_ws(line.substr(0, eq));
        const std::string value = verdant::detail::trim_ws(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw data_error(where + ": expected \"key = value\"");
        injected.push_back("--" + key + "=" + value);
    }

    std::vector<std::string> expanded;
    expanded.push_back(args[0]);  // the subcommand
    expanded.insert(expanded.end(), injected.begin(), injected.end());
    expanded.insert(expanded.end(), args.begin() + 1, args.end());
    return expanded;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verdant: crop-health classification from hyperspectral imagery"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "Write synthetic scenes and a manifest");
    std::string generate_config;
    add_config_flag(generate, generate_config);
    generate->add_option("--out", gen.out_dir, "Output directory")->required();
    generate->add_option("--count", gen.count, "Scenes per class")->capture_default_str();
    generate->add_option("--size", gen.size, "Scene side length in pixels")->capture_default_str();
    generate->add_option("--noise", gen.noise, "Reflectance noise sigma")->capture_default_str();
    generate->add_option("--seed", gen.seed, "Master RNG seed")->capture_default_str();

    TrainArgs tr;
    CLI::App* train_cmd = app.add_subcommand("train", "Train the FCNN on a manifest");
    std::string train_config;
    add_config_flag(train_cmd, train_config);
    train_cmd->add_option("--manifest", tr.manifest, "Dataset manifest CSV")->required();
    train_cmd->add_option("--checkpoint", tr.checkpoint, "Checkpoint output path")
        ->capture_default_str();
    train_cmd->add_option("--history", tr.history, "History CSV output path")
        ->capture_default_str();
    train_cmd->add_option("--hidden", tr.hidden, "Hidden layer sizes")
        ->delimiter(',')
        ->capture_default_str();
    train_cmd->add_flag("--standardize", tr.standardize,
                        "Z-score the four raw indices (train-split statistics)");
    add_train_config_flags(train_cmd, tr.config);
    add_split_flags(train_cmd, tr.split_spec);
    add_trim_flags(train_cmd, tr.drop_front, tr.drop_back);

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint and render maps");
    std::string eval_config;
    add_config_flag(eval_cmd, eval_config);
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "FCN1 checkpoint")->required();
    eval_cmd->add_option("--manifest", ev.manifest, "Dataset manifest CSV")->required();
    eval_cmd->add_option("--out-dir", ev.out_dir, "Output directory")->capture_default_str();
    eval_cmd->add_option("--split", ev.subset, "Evaluation subset")
        ->check(CLI::IsMember({"all", "train", "val", "test"}))
        ->capture_default_str();
    eval_cmd->add_option("--bootstrap", ev.bootstrap_resamples, "Bootstrap resamples")
        ->capture_default_str();
    eval_cmd->add_option("--importance-repeats", ev.importance_repeats,
                         "Permutation repeats per feature")
        ->capture_default_str();
    eval_cmd->add_option("--seed", ev.seed, "Master RNG seed")->capture_default_str();
    eval_cmd->add_option("--render-index", ev.render_index, "Manifest row to render")
        ->capture_default_str();
    eval_cmd->add_option("--features-out", ev.features_out, "Also write the feature CSV here");
    eval_cmd->add_flag("--compare-knn", ev.compare_knn, "Add a FCNN-vs-KNN paired t-test");
    eval_cmd->add_option("--folds", ev.folds, "Folds for --compare-knn")->capture_default_str();
    eval_cmd->add_option("--knn-k", ev.knn_k, "KNN neighbor count")->capture_default_str();
    eval_cmd->add_option("--hidden", ev.hidden, "Hidden sizes for per-fold FCNN training")
        ->delimiter(',')
        ->capture_default_str();
    eval_cmd->add_option("--batch", ev.fold_config.batch_size, "Per-fold training batch size")
        ->capture_default_str();
    eval_cmd->add_option("--lr", ev.fold_config.learning_rate, "Per-fold learning rate")
        ->capture_default_str();
    eval_cmd->add_option("--epochs", ev.fold_config.epochs, "Per-fold training epochs")
        ->capture_default_str();
    eval_cmd->add_option("--dropout", ev.fold_config.dropout_rate, "Per-fold dropout rate")
        ->capture_default_str();
    add_split_flags(eval_cmd, ev.split_spec);
    add_trim_flags(eval_cmd, ev.drop_front, ev.drop_back);

    TemporalArgs tp;
    CLI::App* temporal_cmd = app.add_subcommand("temporal", "Detect rust onset in an NDVI series");
    std::string temporal_config;
    add_config_flag(temporal_cmd, temporal_config);
    CLI::Option_group* input_group =
        temporal_cmd->add_option_group("input", "Exactly one series source");
    input_group->add_option("--series", tp.series_csv, "NDVI series CSV (day,ndvi)");
    input_group->add_option("--cubes", tp.cubes_csv, "Dated cube list CSV (day,path)");
    input_group->require_option(1);
    temporal_cmd->add_option("--out", tp.out, "Onset report CSV path")->capture_default_str();
    temporal_cmd->add_option("--healthy-low", tp.bands.healthy_low, "Healthy band lower NDVI edge")
        ->capture_default_str();
    temporal_cmd->add_option("--rust-low", tp.bands.rust_low, "Rust band lower NDVI edge")
        ->capture_default_str();
    temporal_cmd->add_option("--drop-threshold", tp.drop_threshold,
                             "Cumulative NDVI drop that confirms onset")
        ->capture_default_str();
    add_trim_flags(temporal_cmd, tp.drop_front, tp.drop_back);

    CompareArgs cp;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Paired t-test between two models over shared folds");
    std::string compare_config;
    add_config_flag(compare_cmd, compare_config);
    compare_cmd->add_option("--manifest", cp.manifest, "Dataset manifest CSV")->required();
    compare_cmd->add_option("--folds", cp.folds, "Cross-validation folds")->capture_default_str();
    compare_cmd->add_option("--seed", cp.seed, "Master RNG seed")->capture_default_str();
    compare_cmd->add_option("--a", cp.model_a, "Side A: fcnn, knn, or a checkpoint path")
        ->capture_default_str();
    compare_cmd->add_option("--b", cp.model_b, "Side B: fcnn, knn, or a checkpoint path")
        ->capture_default_str();
    compare_cmd->add_option("--out", cp.out, "Comparison CSV path")->capture_default_str();
    compare_cmd->add_option("--knn-k", cp.knn_k, "KNN neighbor count")->capture_default_str();
    compare_cmd->add_option("--hidden", cp.hidden, "Hidden sizes for per-fold FCNN training")
        ->delimiter(',')
        ->capture_default_str();
    compare_cmd->add_option("--batch", cp.fold_config.batch_size, "Per-fold training batch size")
        ->capture_default_str();
    compare_cmd->add_option("--lr", cp.fold_config.learning_rate, "Per-fold learning rate")
        ->capture_default_str();
    compare_cmd->add_option("--epochs", cp.fold_config.epochs, "Per-fold training epochs")
        ->capture_default_str();
    compare_cmd->add_option("--dropout", cp.fold_config.dropout_rate, "Per-fold dropout rate")
        ->capture_default_str();
    add_trim_flags(compare_cmd, cp.drop_front, cp.drop_back);

    try {
        const std::vector<std::string> args = expand_config_args(argc, argv);
        std::vector<const char*> argv_expanded{"verdant"};
        for (const std::string& a : args) argv_expanded.push_back(a.c_str());
        app.parse(static_cast<int>(argv_expanded.size()), argv_expanded.data());
        if (generate->parsed()) return run_generate(gen);
        if (train_cmd->parsed()) return run_train(tr);
        if (eval_cmd->parsed()) return run_eval(ev);
        if (temporal_cmd->parsed()) return run_temporal(tp);
        if (compare_cmd->parsed()) return run_compare(cp);
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
