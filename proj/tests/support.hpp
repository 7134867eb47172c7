#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <verdant/verdant.hpp>

namespace testsupport {

class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("verdant_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the built CLI binary with the given arguments inside `workdir`.
inline CliResult run_cli(const std::string& args, const std::filesystem::path& workdir) {
    const std::filesystem::path out_file = workdir / ".cli_stdout";
    const std::filesystem::path err_file = workdir / ".cli_stderr";
    const std::string command = "cd '" + workdir.string() + "' && '" + VERDANT_CLI_PATH + "' " +
                                args + " > '" + out_file.string() + "' 2> '" + err_file.string() +
                                "'";
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file_bytes(out_file);
    result.err = read_file_bytes(err_file);
    return result;
}

// Every trainable parameter of a model, as mutable accessors.
inline std::vector<std::function<double&(verdant::Model&)>> all_parameters(
    const verdant::Model& model) {
    std::vector<std::function<double&(verdant::Model&)>> params;
    for (std::size_t k = 0; k < 4; ++k)
        params.push_back([k](verdant::Model& m) -> double& {
            double* f[4] = {&m.fusion.w1, &m.fusion.w2, &m.fusion.w3, &m.fusion.w4};
            return *f[k];
        });
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        for (std::size_t i = 0; i < model.layers[l].weights.size(); ++i)
            params.push_back([l, i](verdant::Model& m) -> double& { return m.layers[l].weights[i]; });
        for (std::size_t i = 0; i < model.layers[l].biases.size(); ++i)
            params.push_back([l, i](verdant::Model& m) -> double& { return m.layers[l].biases[i]; });
    }
    return params;
}

struct GradCheckStats {
    std::size_t checked = 0;
    std::size_t failed = 0;
    double worst_rel = 0.0;
};

// Central finite differences (h = 1e-6) against the analytic gradient; an
// entry passes when |a - n| <= 1e-9 or the relative error is below 1e-4.
inline GradCheckStats gradient_check(verdant::Model model,
                                     const std::vector<verdant::LabeledExample>& batch,
                                     std::uint64_t seed) {
    using namespace verdant;
    const Gradients analytic = backward(model, batch, seed);
    std::vector<double> flat;
    flat.insert(flat.end(), analytic.fusion.begin(), analytic.fusion.end());
    for (const LayerTensors& lt : analytic.layers) {
        flat.insert(flat.end(), lt.weights.begin(), lt.weights.end());
        flat.insert(flat.end(), lt.biases.begin(), lt.biases.end());
    }
    const auto params = all_parameters(model);
    GradCheckStats stats;
    const double h = 1e-6;
    for (std::size_t p = 0; p < params.size(); ++p) {
        double& theta = params[p](model);
        const double orig = theta;
        theta = orig + h;
        const double lp = batch_loss(model, batch, seed);
        theta = orig - h;
        const double lm = batch_loss(model, batch, seed);
        theta = orig;
        const double numeric = (lp - lm) / (2.0 * h);
        const double a = flat[p];
        const double denom = std::max(std::abs(a), std::abs(numeric));
        const double rel = denom > 0.0 ? std::abs(a - numeric) / denom : 0.0;
        ++stats.checked;
        if (!(std::abs(a - numeric) <= 1e-9 || rel < 1e-4)) ++stats.failed;
        if (std::abs(a - numeric) > 1e-9) stats.worst_rel = std::max(stats.worst_rel, rel);
    }
    return stats;
}

// Random small model + batch for gradient checks; trial selects the shape.
inline std::pair<verdant::Model, std::vector<verdant::LabeledExample>> random_gradcheck_case(
    std::uint64_t trial) {
    using namespace verdant;
    Rng rng(mix_seed(0xC0FFEE, trial));
    std::vector<std::size_t> hidden;
    const std::size_t depth = rng.next_index(3);  // 0..2 hidden layers
    for (std::size_t d = 0; d < depth; ++d) hidden.push_back(2 + rng.next_index(7));
    const double dropout_rate = (trial % 3 == 0) ? 0.0 : 0.5;
    Model model = make_model(hidden, dropout_rate, mix_seed(5, trial));
    model.fusion = {0.25 + 0.2 * rng.normal(), 0.25 + 0.2 * rng.normal(),
                    0.25 + 0.2 * rng.normal(), 0.25 + 0.2 * rng.normal()};
    for (DenseLayer& layer : model.layers)
        for (double& b : layer.biases) b = 0.1 * rng.normal();
    std::vector<LabeledExample> batch;
    const std::size_t batch_size = 1 + rng.next_index(6);
    for (std::size_t i = 0; i < batch_size; ++i) {
        std::array<double, 4> raw{rng.uniform01() * 2.0 - 1.0, rng.uniform01() * 2.0 - 1.0,
                                  rng.uniform01() * 2.0 - 1.0, rng.uniform01()};
        batch.push_back({raw, 1 + static_cast<int>(rng.next_index(3))});
    }
    return {std::move(model), std::move(batch)};
}

// The desk-scale benchmark: count scenes per class, trimmed and featurized.
inline std::vector<verdant::LabeledExample> synthetic_dataset(std::size_t count_per_class,
                                                              std::size_t image_size,
                                                              double noise_sigma,
                                                              std::uint64_t seed) {
    using namespace verdant;
    const BandWindowSet windows = BandWindowSet::standard();
    std::vector<LabeledExample> dataset;
    dataset.reserve(count_per_class * 3);
    for (int label = 1; label <= 3; ++label) {
        for (std::size_t i = 0; i < count_per_class; ++i) {
            const GeneratedScene scene =
                generate_scene({label, image_size, noise_sigma, mix_seed(seed, label, i)});
            const SpectralCube cube = trim_bands(scene.cube, 10, 14);
            dataset.push_back({cube_index_means(cube, windows), scene.label});
        }
    }
    return dataset;
}

}  // namespace testsupport
