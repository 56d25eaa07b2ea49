#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "quant/dataset.hpp"

using namespace quant;

namespace {

std::string write_temp(const std::string& content) {
    static int counter = 0;
    auto path = std::filesystem::temp_directory_path() /
                ("quant_test_" + std::to_string(counter++) + ".csv");
    std::ofstream out(path);
    out << content;
    return path.string();
}

} // namespace

TEST_CASE("load_csv recodes labels by first appearance") {
    const auto path = write_temp("x,y\n1.5,a\n2.5,b\n3.5,a\n");
    Dataset d = load_csv(path, "y", {});
    CHECK(d.size() == 3);
    CHECK(d.num_classes() == 2);
    CHECK(d.labels == std::vector<int>{0, 1, 0});
    CHECK(d.class_names[0] == "a");
    CHECK(d.class_names[1] == "b");
}

TEST_CASE("load_csv removes rows with missing values") {
    const auto path = write_temp("x,z,y\n1,2,a\n,3,b\n4,5,a\n6,7,b\n");
    Dataset d = load_csv(path, "y", {});
    CHECK(d.size() == 3);
    CHECK(d.features(0, 0) == doctest::Approx(1.0));
    CHECK(d.features(1, 0) == doctest::Approx(4.0));
    CHECK(d.features(2, 0) == doctest::Approx(6.0));
}

TEST_CASE("load_csv error cases") {
    const auto path = write_temp("x,y\n1,a\n2,b\n");
    CHECK_THROWS_WITH_AS(load_csv(path, "target", {}), doctest::Contains("missing target column"),
                         DataError);
    const auto bad = write_temp("x,y\nhello,a\n2,b\n");
    CHECK_THROWS_AS(load_csv(bad, "y", {}), DataError);
    const auto empty = write_temp("x,y\n,a\n,b\n");
    CHECK_THROWS_AS(load_csv(empty, "y", {}), DataError);
}

TEST_CASE("csv round trip") {
    Matrix means(2, 2);
    means(0, 0) = 0.0; means(0, 1) = 0.0;
    means(1, 0) = 3.0; means(1, 1) = -1.0;
    Dataset d = synth_gaussian({5, 7}, means, 1.0, 99, "roundtrip");
    const auto path = write_temp("");
    write_csv(d, path);
    Dataset back = load_csv(path, "target", {});
    REQUIRE(back.size() == d.size());
    CHECK(back.labels == d.labels);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.dim(); ++j)
            CHECK(back.features(i, j) == d.features(i, j));
}

TEST_CASE("equal-frequency binning edge placement") {
    Dataset d;
    d.name = "bins";
    d.features = Matrix(4, 1);
    d.features(0, 0) = 1; d.features(1, 0) = 2; d.features(2, 0) = 3; d.features(3, 0) = 4;
    d.labels = {0, 1, 0, 1};
    d.schema = {{"x", ColumnKind::Continuous, 0}};
    d.class_names = {"a", "b"};
    auto plan = fit_preprocess(d, true, 2);
    REQUIRE(plan.columns.size() == 1);
    REQUIRE(plan.columns[0].bin_edges.size() == 1);
    CHECK(plan.columns[0].bin_edges[0] == doctest::Approx(2.5));
}

TEST_CASE("equal-frequency binning balances counts") {
    Rng rng(3);
    Dataset d;
    d.name = "balance";
    const std::size_t n = 103;
    d.features = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) d.features(i, 0) = rng.next_double() * 10.0;
    d.labels.assign(n, 0);
    d.labels[0] = 1;
    d.schema = {{"x", ColumnKind::Continuous, 0}};
    d.class_names = {"a", "b"};
    const int bins = 7;
    auto plan = fit_preprocess(d, true, bins);
    Dataset binned = apply_preprocess(plan, d);
    std::vector<int> counts(bins, 0);
    for (std::size_t i = 0; i < n; ++i) counts[static_cast<int>(binned.features(i, 0))]++;
    for (int c : counts) {
        CHECK(c >= static_cast<int>(n / bins));
        CHECK(c <= static_cast<int>(n / bins) + 1);
    }
}

TEST_CASE("constant columns are dropped and recorded") {
    Dataset d;
    d.name = "constant";
    d.features = Matrix(3, 2);
    d.features(0, 0) = 5; d.features(1, 0) = 5; d.features(2, 0) = 5;
    d.features(0, 1) = 1; d.features(1, 1) = 2; d.features(2, 1) = 3;
    d.labels = {0, 1, 0};
    d.schema = {{"const", ColumnKind::Continuous, 0}, {"x", ColumnKind::Continuous, 0}};
    d.class_names = {"a", "b"};
    auto plan = fit_preprocess(d, false);
    CHECK(plan.dropped_columns == std::vector<std::string>{"const"});
    CHECK(plan.output_width() == 1);
    Dataset out = apply_preprocess(plan, d);
    CHECK(out.dim() == 1);
}

TEST_CASE("one-hot expansion") {
    Dataset d;
    d.name = "onehot";
    d.features = Matrix(3, 1);
    d.features(0, 0) = 0; d.features(1, 0) = 1; d.features(2, 0) = 2;
    d.labels = {0, 1, 0};
    d.schema = {{"c", ColumnKind::Categorical, 3}};
    d.class_names = {"a", "b"};
    auto plan = fit_preprocess(d, false);
    CHECK(plan.output_width() == 3);
    Dataset out = apply_preprocess(plan, d);
    // code 2 of 3 -> (0, 0, 1)
    CHECK(out.features(2, 0) == doctest::Approx(0.0));
    CHECK(out.features(2, 1) == doctest::Approx(0.0));
    CHECK(out.features(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("standardization identity on the fit data") {
    Matrix means(2, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        means(0, j) = static_cast<double>(j);
        means(1, j) = -static_cast<double>(j);
    }
    Dataset d = synth_gaussian({20, 20}, means, 2.0, 7);
    auto plan = fit_preprocess(d, false);
    Dataset out = apply_preprocess(plan, d);
    for (std::size_t j = 0; j < out.dim(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) mean += out.features(i, j);
        mean /= static_cast<double>(out.size());
        CHECK(std::abs(mean) < 1e-9);
    }
}

TEST_CASE("out-of-range test values clamp to extreme bins") {
    Dataset d;
    d.name = "clamp";
    d.features = Matrix(4, 1);
    d.features(0, 0) = 1; d.features(1, 0) = 2; d.features(2, 0) = 3; d.features(3, 0) = 4;
    d.labels = {0, 1, 0, 1};
    d.schema = {{"x", ColumnKind::Continuous, 0}};
    d.class_names = {"a", "b"};
    auto plan = fit_preprocess(d, true, 2);
    Matrix test(2, 1);
    test(0, 0) = -100.0;
    test(1, 0) = 100.0;
    Matrix binned = apply_preprocess(plan, test);
    CHECK(binned(0, 0) == doctest::Approx(0.0));
    CHECK(binned(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("apply_preprocess rejects schema mismatch") {
    Dataset d;
    d.name = "schema";
    d.features = Matrix(2, 1);
    d.features(0, 0) = 1; d.features(1, 0) = 2;
    d.labels = {0, 1};
    d.schema = {{"x", ColumnKind::Continuous, 0}};
    d.class_names = {"a", "b"};
    auto plan = fit_preprocess(d, false);
    Dataset other = d;
    other.schema[0].name = "different";
    CHECK_THROWS_AS(apply_preprocess(plan, other), DataError);
}

TEST_CASE("synth_gaussian determinism and separation") {
    Matrix means(2, 2);
    means(0, 0) = 0; means(0, 1) = 0;
    means(1, 0) = 50; means(1, 1) = 50;
    Dataset a = synth_gaussian({5, 5}, means, 1.0, 42);
    Dataset b = synth_gaussian({5, 5}, means, 1.0, 42);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);

    // far-separated blobs: 1-NN on the training data is perfect
    for (std::size_t i = 0; i < a.size(); ++i) {
        double best = 1e300;
        int best_label = -1;
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (i == j) continue;
            double dist = 0.0;
            for (std::size_t c = 0; c < a.dim(); ++c) {
                const double diff = a.features(i, c) - a.features(j, c);
                dist += diff * diff;
            }
            if (dist < best) {
                best = dist;
                best_label = a.labels[j];
            }
        }
        CHECK(best_label == a.labels[i]);
    }

    CHECK_THROWS_AS(synth_gaussian({0, 5}, means, 1.0, 1), ConfigError);
}
