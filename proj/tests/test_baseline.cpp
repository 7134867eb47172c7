#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "support.hpp"

using namespace verdant;

TEST_CASE("classify_threshold") {
    SECTION("the class bands") {
        REQUIRE(classify_threshold(0.8) == 1);
        REQUIRE(classify_threshold(0.4) == 2);
        REQUIRE(classify_threshold(0.1) == 3);
        REQUIRE(classify_threshold(-0.3) == 3);
    }
    SECTION("boundaries assign upward") {
        REQUIRE(classify_threshold(0.6) == 1);
        REQUIRE(classify_threshold(0.2) == 2);
        REQUIRE(classify_threshold(1.0) == 1);
        REQUIRE(classify_threshold(-1.0) == 3);
    }
    SECTION("values outside [-1, 1] are rejected, not clamped") {
        REQUIRE_THROWS_AS(classify_threshold(1.5), std::domain_error);
        REQUIRE_THROWS_AS(classify_threshold(-1.01), std::domain_error);
        REQUIRE_THROWS_AS(classify_threshold(std::nan("")), std::domain_error);
    }
    SECTION("custom bands") {
        const ThresholdBands bands{0.5, 0.0};
        REQUIRE(classify_threshold(0.55, bands) == 1);
        REQUIRE(classify_threshold(0.25, bands) == 2);
        REQUIRE(classify_threshold(-0.25, bands) == 3);
        REQUIRE_THROWS_AS(classify_threshold(0.5, ThresholdBands{0.2, 0.6}),
                          std::invalid_argument);
    }
    SECTION("the three bands partition [-1, 1]") {
        for (int i = 0; i <= 200; ++i) {
            const double v = static_cast<double>(i - 100) / 100.0;
            const int label = classify_threshold(v);
            REQUIRE((label == 1 || label == 2 || label == 3));
            if (v >= 0.6) REQUIRE(label == 1);
            else if (v >= 0.2) REQUIRE(label == 2);
            else REQUIRE(label == 3);
        }
    }
}

TEST_CASE("classify_map") {
    SECTION("constant raster maps to a constant label field") {
        const Raster raster{3, 2, std::vector<double>(6, 0.8)};
        const LabelMap map = classify_map(raster);
        REQUIRE(map.width == 3);
        REQUIRE(map.height == 2);
        for (int label : map.labels) REQUIRE(label == 1);
    }
    SECTION("matches the scalar rule on a -1..1 sweep") {
        Raster sweep{201, 1, {}};
        for (int i = 0; i <= 200; ++i) sweep.values.push_back(static_cast<double>(i - 100) / 100.0);
        const LabelMap map = classify_map(sweep);
        for (std::size_t i = 0; i < sweep.values.size(); ++i)
            REQUIRE(map.labels[i] == classify_threshold(sweep.values[i]));
    }
    SECTION("empty raster is an error") {
        REQUIRE_THROWS_AS(classify_map(Raster{}), std::invalid_argument);
    }
}

namespace {

FeatureVector point(double x) { return {x, 0, 0, 0, 0}; }

}  // namespace

TEST_CASE("knn_predict") {
    const std::vector<FeatureVector> train{point(0.0), point(1.0), point(2.0), point(10.0)};
    const std::vector<int> labels{1, 1, 2, 3};

    SECTION("an exact training point with k=1 returns its label") {
        REQUIRE(knn_predict(train, labels, point(2.0), {1}) == 2);
        REQUIRE(knn_predict(train, labels, point(10.0), {1}) == 3);
    }
    SECTION("k=3 majority vote") {
        // neighbors of 0.5: labels (1, 1, 2)
        REQUIRE(knn_predict(train, labels, point(0.5), {3}) == 1);
    }
    SECTION("vote ties pick the lowest class") {
        REQUIRE(knn_predict(train, labels, point(1.5), {2}) == 1);  // neighbors labeled 1 and 2
    }
    SECTION("distance ties keep training-set order") {
        const std::vector<FeatureVector> pair{point(1.0), point(-1.0)};
        const std::vector<int> pair_labels{2, 1};
        // both neighbors are at distance 1; k=1 must take the first training point
        REQUIRE(knn_predict(pair, pair_labels, point(0.0), {1}) == 2);
    }
    SECTION("k = |train| returns the plurality class regardless of x") {
        Rng rng(808);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<FeatureVector> features;
            std::vector<int> ls;
            const std::size_t n = 1 + rng.next_index(12);
            for (std::size_t i = 0; i < n; ++i) {
                features.push_back({rng.normal(), rng.normal(), rng.normal(), rng.normal(),
                                    rng.normal()});
                ls.push_back(1 + static_cast<int>(rng.next_index(3)));
            }
            std::map<int, std::size_t> counts;
            for (int l : ls) ++counts[l];
            int plurality = 0;
            std::size_t best = 0;
            for (const auto& [label, count] : counts)
                if (count > best) {
                    best = count;
                    plurality = label;
                }
            const FeatureVector query{rng.normal(), rng.normal(), rng.normal(), rng.normal(),
                                      rng.normal()};
            REQUIRE(knn_predict(features, ls, query, {n}) == plurality);
        }
    }
    SECTION("bad inputs are rejected") {
        REQUIRE_THROWS_AS(knn_predict({}, {}, point(0.0), {1}), std::invalid_argument);
        REQUIRE_THROWS_AS(knn_predict(train, labels, point(0.0), {0}), std::invalid_argument);
        REQUIRE_THROWS_AS(knn_predict(train, labels, point(0.0), {5}), std::invalid_argument);
        REQUIRE_THROWS_AS(knn_predict(train, std::vector<int>{1}, point(0.0), {1}),
                          std::invalid_argument);
    }
}

TEST_CASE("threshold oracle recovers generator labels at zero noise") {
    const BandWindowSet windows = BandWindowSet::standard();
    for (int label = 1; label <= 3; ++label)
        for (std::uint64_t seed : {2ull, 71ull, 900ull}) {
            const GeneratedScene scene = generate_scene({label, 4, 0.0, seed});
            const SpectralCube cube = trim_bands(scene.cube, 10, 14);
            const FeatureVector fv = featurize(compute_index_maps(cube, windows), {});
            REQUIRE(classify_threshold(fv.ndvi_mean) == label);
        }
}
