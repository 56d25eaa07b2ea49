#include <doctest.h>

#include <cmath>

#include "quant/dm_methods.hpp"
#include "quant/oracles.hpp"

using namespace quant;

namespace {

FittedScores scores_from(const Matrix& oof, std::vector<int> labels) {
    FittedScores s;
    s.oof_scores = oof;
    s.oof_labels = std::move(labels);
    s.fold_assignment.assign(s.oof_labels.size(), 0);
    return s;
}

Matrix binary_scores(const std::vector<double>& positive) {
    Matrix m(positive.size(), 2);
    for (std::size_t i = 0; i < positive.size(); ++i) {
        m(i, 0) = positive[i];
        m(i, 1) = 1.0 - positive[i];
    }
    return m;
}

// oof scores realizing an exact binary confusion matrix
FittedScores confusion_fixture(double tpr, double fpr, std::size_t per_class) {
    std::vector<double> scores;
    std::vector<int> labels;
    const auto tp = static_cast<std::size_t>(std::round(tpr * per_class));
    const auto fp = static_cast<std::size_t>(std::round(fpr * per_class));
    for (std::size_t i = 0; i < per_class; ++i) {
        scores.push_back(i < tp ? 0.9 : 0.1);
        labels.push_back(0);
    }
    for (std::size_t i = 0; i < per_class; ++i) {
        scores.push_back(i < fp ? 0.9 : 0.1);
        labels.push_back(1);
    }
    return scores_from(binary_scores(scores), labels);
}

// test scores with an exact fraction predicted positive
Matrix test_fixture(double ppos, std::size_t n) {
    std::vector<double> scores;
    const auto hits = static_cast<std::size_t>(std::round(ppos * n));
    for (std::size_t i = 0; i < n; ++i) scores.push_back(i < hits ? 0.9 : 0.1);
    return binary_scores(scores);
}

} // namespace

TEST_CASE("gac with a perfect classifier returns the prediction distribution") {
    auto scores = confusion_fixture(1.0, 0.0, 10);
    auto estimate = gac(scores, test_fixture(0.37, 100));
    CHECK(estimate.values[0] == doctest::Approx(0.37).epsilon(1e-9));
}

TEST_CASE("gac matches the closed-form adjusted count on interior systems") {
    auto scores = confusion_fixture(0.8, 0.2, 20);
    auto estimate = gac(scores, test_fixture(0.5, 100));
    CHECK(estimate.values[0] == doctest::Approx(0.5).epsilon(1e-6));

    auto estimate2 = gac(scores, test_fixture(0.32, 100));
    // (0.32 - 0.2) / 0.6 = 0.2
    CHECK(estimate2.values[0] == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("gac at the training-prevalence image returns the training prevalence") {
    auto scores = confusion_fixture(0.8, 0.2, 20); // train prevalence 0.5
    // target = design * (0.5, 0.5) = (0.5, 0.5)
    auto estimate = gac(scores, test_fixture(0.5, 200));
    CHECK(estimate.values[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("gpac with one-hot scores reduces to gac") {
    auto scores = confusion_fixture(0.75, 0.25, 16);
    // force one-hot oof scores
    for (std::size_t i = 0; i < scores.oof_scores.rows(); ++i) {
        const bool positive = scores.oof_scores(i, 0) > 0.5;
        scores.oof_scores(i, 0) = positive ? 1.0 : 0.0;
        scores.oof_scores(i, 1) = positive ? 0.0 : 1.0;
    }
    Matrix test = test_fixture(0.4, 100);
    for (std::size_t i = 0; i < test.rows(); ++i) {
        const bool positive = test(i, 0) > 0.5;
        test(i, 0) = positive ? 1.0 : 0.0;
        test(i, 1) = positive ? 0.0 : 1.0;
    }
    auto a = gpac(scores, test);
    auto b = gac(scores, test);
    CHECK(a.values[0] == doctest::Approx(b.values[0]).epsilon(1e-9));
}

TEST_CASE("gpac with uniform scores returns the flagged uniform estimate") {
    Matrix oof(8, 2);
    for (std::size_t i = 0; i < 8; ++i) {
        oof(i, 0) = 0.5;
        oof(i, 1) = 0.5;
    }
    auto scores = scores_from(oof, {0, 0, 0, 0, 1, 1, 1, 1});
    Matrix test(10, 2);
    for (std::size_t i = 0; i < 10; ++i) {
        test(i, 0) = 0.5;
        test(i, 1) = 0.5;
    }
    EstimateFlags flags;
    auto estimate = gpac(scores, test, &flags);
    CHECK(flags.fallback);
    CHECK(estimate.values[0] == doctest::Approx(0.5));
}

TEST_CASE("gpac recovers a constructed score mixture") {
    // train: positives score Beta-like high, negatives low; test drawn as an
    // alpha-mix of the two training score populations
    Rng rng(404);
    std::vector<double> oof;
    std::vector<int> labels;
    const std::size_t n = 4000;
    auto pos_score = [&] { return 0.55 + 0.4 * rng.next_double(); };
    auto neg_score = [&] { return 0.05 + 0.4 * rng.next_double(); };
    for (std::size_t i = 0; i < n; ++i) {
        oof.push_back(pos_score());
        labels.push_back(0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        oof.push_back(neg_score());
        labels.push_back(1);
    }
    auto scores = scores_from(binary_scores(oof), labels);
    const double alpha = 0.3;
    std::vector<double> test_scores;
    for (std::size_t i = 0; i < 6000; ++i)
        test_scores.push_back(rng.next_double() < alpha ? pos_score() : neg_score());
    auto estimate = gpac(scores, binary_scores(test_scores));
    CHECK(estimate.values[0] == doctest::Approx(alpha).epsilon(0.18)); // +-0.05 absolute
    CHECK(std::abs(estimate.values[0] - alpha) < 0.05);
}

TEST_CASE("dys trivial cases") {
    auto scores = confusion_fixture(0.9, 0.1, 30);
    // test histogram equal to the positive-class histogram
    std::vector<double> all_pos;
    for (std::size_t i = 0; i < scores.oof_scores.rows(); ++i)
        if (scores.oof_labels[i] == 0) all_pos.push_back(scores.oof_scores(i, 0));
    auto estimate = dys(scores, all_pos);
    CHECK(estimate.values[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("dys and fmm recover a synthetic mixture prevalence") {
    Rng rng(808);
    std::vector<double> oof;
    std::vector<int> labels;
    const std::size_t n = 5000;
    auto pos_score = [&] { return std::min(1.0, std::max(0.0, 0.7 + 0.18 * rng.next_normal())); };
    auto neg_score = [&] { return std::min(1.0, std::max(0.0, 0.3 + 0.18 * rng.next_normal())); };
    for (std::size_t i = 0; i < n; ++i) {
        oof.push_back(pos_score());
        labels.push_back(0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        oof.push_back(neg_score());
        labels.push_back(1);
    }
    auto scores = scores_from(binary_scores(oof), labels);
    const double alpha = 0.7;
    std::vector<double> test_scores;
    for (std::size_t i = 0; i < 8000; ++i)
        test_scores.push_back(rng.next_double() < alpha ? pos_score() : neg_score());
    CHECK(dys(scores, test_scores).values[0] == doctest::Approx(alpha).epsilon(0.1));
    CHECK(std::abs(dys(scores, test_scores).values[0] - alpha) < 0.03);
    CHECK(std::abs(fmm(scores, test_scores).values[0] - alpha) < 0.03);
}

TEST_CASE("hdy identity design returns the target distribution") {
    auto scores = confusion_fixture(1.0, 0.0, 12);
    auto estimate = hdy(scores, test_fixture(0.25, 80));
    CHECK(estimate.values[0] == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("hdy matches gac on exact-mixture targets") {
    auto scores = confusion_fixture(0.85, 0.15, 20);
    Matrix test = test_fixture(0.46, 200); // interior mixture of tpr/fpr columns
    auto a = hdy(scores, test);
    auto b = gac(scores, test);
    CHECK(std::abs(a.values[0] - b.values[0]) < 1e-4);
}

namespace {

Dataset binned_binary_feature(double p_pos, double p_neg, std::size_t per_class) {
    // one binary feature: P(X=1 | class0) = p_pos, P(X=1 | class1) = p_neg,
    // realized exactly by counts
    Dataset d;
    d.name = "binned";
    d.features = Matrix(2 * per_class, 1);
    d.labels.resize(2 * per_class);
    const auto ones_pos = static_cast<std::size_t>(std::round(p_pos * per_class));
    const auto ones_neg = static_cast<std::size_t>(std::round(p_neg * per_class));
    for (std::size_t i = 0; i < per_class; ++i) {
        d.features(i, 0) = i < ones_pos ? 1.0 : 0.0;
        d.labels[i] = 0;
    }
    for (std::size_t i = 0; i < per_class; ++i) {
        d.features(per_class + i, 0) = i < ones_neg ? 1.0 : 0.0;
        d.labels[per_class + i] = 1;
    }
    d.schema = {{"x", ColumnKind::Categorical, 2}};
    d.class_names = {"a", "b"};
    return d;
}

Matrix binned_test_column(double p_one, std::size_t n) {
    Matrix m(n, 1);
    const auto ones = static_cast<std::size_t>(std::round(p_one * n));
    for (std::size_t i = 0; i < n; ++i) m(i, 0) = i < ones ? 1.0 : 0.0;
    return m;
}

} // namespace

TEST_CASE("hdx exact mixture on one binary feature") {
    // class 0 always shows X=1, class 1 never; test has P(X=1) = 0.3
    Dataset train = binned_binary_feature(1.0, 0.0, 50);
    auto estimate = hdx(train, binned_test_column(0.3, 100));
    CHECK(estimate.values[0] == doctest::Approx(0.3).epsilon(1e-3));
    // cross-check against the lattice oracle
    auto brute = oracle::simplex_grid_minimize(
        [&](std::span<const double> theta) {
            std::vector<double> mix{theta[1], theta[0]}; // P(X=0), P(X=1) columns
            return hellinger_distance(mix, std::vector<double>{0.7, 0.3});
        },
        2, 200);
    CHECK(std::abs(estimate.values[0] - brute[0]) < 0.01);
}

TEST_CASE("hdx at matching marginals returns the training prevalence") {
    Dataset train = binned_binary_feature(0.8, 0.2, 100); // prevalence 0.5
    // test marginal = 0.5 * 0.8 + 0.5 * 0.2 = 0.5
    auto estimate = hdx(train, binned_test_column(0.5, 200));
    CHECK(estimate.values[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("hdx is invariant to feature order") {
    Dataset train = binned_binary_feature(0.9, 0.3, 60);
    // add a second feature with different class profiles
    Dataset two;
    two.name = "two";
    two.features = Matrix(train.size(), 2);
    two.labels = train.labels;
    two.class_names = train.class_names;
    for (std::size_t i = 0; i < train.size(); ++i) {
        two.features(i, 0) = train.features(i, 0);
        two.features(i, 1) = (i % 3 == 0) ? 1.0 : 0.0;
    }
    two.schema = {{"x", ColumnKind::Categorical, 2}, {"z", ColumnKind::Categorical, 2}};

    Dataset swapped = two;
    for (std::size_t i = 0; i < two.size(); ++i) {
        swapped.features(i, 0) = two.features(i, 1);
        swapped.features(i, 1) = two.features(i, 0);
    }
    std::swap(swapped.schema[0], swapped.schema[1]);

    Matrix test(40, 2), test_swapped(40, 2);
    Rng rng(9);
    for (std::size_t i = 0; i < 40; ++i) {
        test(i, 0) = rng.below(2);
        test(i, 1) = rng.below(2);
        test_swapped(i, 0) = test(i, 1);
        test_swapped(i, 1) = test(i, 0);
    }
    auto a = hdx(two, test);
    auto b = hdx(swapped, test_swapped);
    CHECK(a.values[0] == doctest::Approx(b.values[0]).epsilon(1e-9));
    CHECK_THROWS_AS(hdx(binned_binary_feature(1, 0, 10), Matrix(0, 1)), DataError);
}

TEST_CASE("hdx rejects unbinned features") {
    Dataset d = binned_binary_feature(1.0, 0.0, 10);
    d.schema[0].kind = ColumnKind::Continuous;
    CHECK_THROWS_AS(hdx(d, binned_test_column(0.5, 10)), DataError);
}

TEST_CASE("readme recovers prevalence under disjoint cell support") {
    // two binary features; class 0 lives in cell (1, 1), class 1 in (0, 0)
    Dataset train;
    train.name = "readme";
    const std::size_t per_class = 40;
    train.features = Matrix(2 * per_class, 2);
    train.labels.resize(2 * per_class);
    for (std::size_t i = 0; i < per_class; ++i) {
        train.features(i, 0) = 1;
        train.features(i, 1) = 1;
        train.labels[i] = 0;
        train.features(per_class + i, 0) = 0;
        train.features(per_class + i, 1) = 0;
        train.labels[per_class + i] = 1;
    }
    train.schema = {{"a", ColumnKind::Categorical, 2}, {"b", ColumnKind::Categorical, 2}};
    train.class_names = {"x", "y"};

    Matrix test(100, 2);
    for (std::size_t i = 0; i < 100; ++i) {
        const bool positive = i < 35;
        test(i, 0) = positive ? 1.0 : 0.0;
        test(i, 1) = positive ? 1.0 : 0.0;
    }
    auto estimate = readme(train, test, 50, 7);
    CHECK(estimate.values[0] == doctest::Approx(0.35).epsilon(1e-6));

    // determinism in the subset draws
    auto again = readme(train, test, 50, 7);
    CHECK(estimate.values[0] == doctest::Approx(again.values[0]).epsilon(1e-12));
    // output on the simplex
    double total = 0.0;
    for (double v : estimate.values) {
        CHECK(v >= 0.0);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("readme cell cap rejects unworkable cardinalities") {
    Dataset train;
    train.name = "wide";
    train.features = Matrix(4, 2);
    train.labels = {0, 1, 0, 1};
    // every subset of size 2 has 100 * 100 cells > cap 16
    train.features(0, 0) = 0; train.features(0, 1) = 0;
    train.features(1, 0) = 1; train.features(1, 1) = 1;
    train.features(2, 0) = 2; train.features(2, 1) = 2;
    train.features(3, 0) = 3; train.features(3, 1) = 3;
    train.schema = {{"a", ColumnKind::Categorical, 100}, {"b", ColumnKind::Categorical, 100}};
    train.class_names = {"x", "y"};
    Matrix test(2, 2);
    CHECK_THROWS_AS(readme(train, test, 5, 1, 16), DataError);
}

TEST_CASE("friedman method on one-hot scores with balanced training reduces to gac") {
    auto scores = confusion_fixture(0.8, 0.2, 25);
    for (std::size_t i = 0; i < scores.oof_scores.rows(); ++i) {
        const bool positive = scores.oof_scores(i, 0) > 0.5;
        scores.oof_scores(i, 0) = positive ? 1.0 : 0.0;
        scores.oof_scores(i, 1) = positive ? 0.0 : 1.0;
    }
    Matrix test = test_fixture(0.44, 100);
    for (std::size_t i = 0; i < test.rows(); ++i) {
        const bool positive = test(i, 0) > 0.5;
        test(i, 0) = positive ? 1.0 : 0.0;
        test(i, 1) = positive ? 0.0 : 1.0;
    }
    auto a = friedman_method(scores, test);
    auto b = gac(scores, test);
    CHECK(a.values[0] == doctest::Approx(b.values[0]).epsilon(1e-8));
}

TEST_CASE("friedman method fixed point at no shift") {
    // calibrated scores, test drawn as the train population itself
    Rng rng(33);
    std::vector<double> oof;
    std::vector<int> labels;
    const std::size_t n_pos = 3000, n_neg = 7000; // prevalence 0.3
    for (std::size_t i = 0; i < n_pos; ++i) {
        oof.push_back(std::min(1.0, std::max(0.0, 0.6 + 0.2 * rng.next_normal())));
        labels.push_back(0);
    }
    for (std::size_t i = 0; i < n_neg; ++i) {
        oof.push_back(std::min(1.0, std::max(0.0, 0.25 + 0.15 * rng.next_normal())));
        labels.push_back(1);
    }
    auto scores = scores_from(binary_scores(oof), labels);
    // large-sample test set drawn from the same mixed population
    std::vector<double> test_scores;
    for (std::size_t i = 0; i < 20000; ++i) {
        const bool positive = rng.next_double() < 0.3;
        test_scores.push_back(std::min(
            1.0, std::max(0.0, positive ? 0.6 + 0.2 * rng.next_normal() : 0.25 + 0.15 * rng.next_normal())));
    }
    auto estimate = friedman_method(scores, binary_scores(test_scores));
    CHECK(estimate.values[0] == doctest::Approx(0.3).epsilon(0.1));
    CHECK(std::abs(estimate.values[0] - 0.3) < 0.03);
}

namespace {

Dataset ed_train_two_points(std::size_t per_class) {
    Dataset d;
    d.name = "ed";
    d.features = Matrix(2 * per_class, 1);
    d.labels.resize(2 * per_class);
    Rng rng(66);
    for (std::size_t i = 0; i < per_class; ++i) {
        d.features(i, 0) = 0.0 + 0.1 * rng.next_normal();
        d.labels[i] = 0;
        d.features(per_class + i, 0) = 10.0 + 0.1 * rng.next_normal();
        d.labels[per_class + i] = 1;
    }
    d.schema = {{"x", ColumnKind::Continuous, 0}};
    d.class_names = {"a", "b"};
    return d;
}

} // namespace

TEST_CASE("energy distance: test drawn from one class") {
    Dataset train = ed_train_two_points(30);
    Matrix test(30, 1);
    for (std::size_t i = 0; i < 30; ++i) test(i, 0) = train.features(i, 0);
    auto estimate = energy_distance_quantify(train, test);
    CHECK(estimate.values[0] == doctest::Approx(1.0).epsilon(1e-3));

    // brute-force check of the quadratic assembly
    auto brute = oracle::simplex_grid_minimize(
        [&](std::span<const double> theta) {
            // rebuild the objective from the same distance statistics
            const std::size_t per_class = 30;
            double m00 = 0, m01 = 0, m11 = 0, b0 = 0, b1 = 0;
            for (std::size_t i = 0; i < per_class; ++i)
                for (std::size_t j = 0; j < per_class; ++j) {
                    m00 += std::abs(train.features(i, 0) - train.features(j, 0));
                    m01 += std::abs(train.features(i, 0) - train.features(per_class + j, 0));
                    m11 += std::abs(train.features(per_class + i, 0) - train.features(per_class + j, 0));
                    b0 += std::abs(test(i, 0) - train.features(j, 0));
                    b1 += std::abs(test(i, 0) - train.features(per_class + j, 0));
                }
            const double scale = static_cast<double>(per_class * per_class);
            m00 /= scale; m01 /= scale; m11 /= scale; b0 /= scale; b1 /= scale;
            const double quad = theta[0] * theta[0] * m00 + 2 * theta[0] * theta[1] * m01 +
                                theta[1] * theta[1] * m11;
            return 2.0 * (theta[0] * b0 + theta[1] * b1) - quad;
        },
        2, 100);
    CHECK(std::abs(estimate.values[0] - brute[0]) < 0.02);
}

TEST_CASE("energy distance: 50/50 concatenation") {
    Dataset train = ed_train_two_points(25);
    Matrix test(50, 1);
    for (std::size_t i = 0; i < 50; ++i) test(i, 0) = train.features(i, 0);
    auto estimate = energy_distance_quantify(train, test);
    CHECK(std::abs(estimate.values[0] - 0.5) < 1e-3);
}

TEST_CASE("energy distance: duplicating training instances changes nothing") {
    Dataset train = ed_train_two_points(15);
    Dataset doubled;
    doubled.name = "doubled";
    doubled.features = Matrix(2 * train.size(), 1);
    doubled.labels.resize(2 * train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        doubled.features(2 * i, 0) = train.features(i, 0);
        doubled.features(2 * i + 1, 0) = train.features(i, 0);
        doubled.labels[2 * i] = train.labels[i];
        doubled.labels[2 * i + 1] = train.labels[i];
    }
    doubled.schema = train.schema;
    doubled.class_names = train.class_names;
    Matrix test(20, 1);
    Rng rng(5);
    for (std::size_t i = 0; i < 20; ++i) test(i, 0) = rng.next_double() * 10.0;
    auto a = energy_distance_quantify(train, test);
    auto b = energy_distance_quantify(doubled, test);
    CHECK(a.values[0] == doctest::Approx(b.values[0]).epsilon(1e-9));
}

TEST_CASE("em fixed point at the training prior") {
    std::vector<double> prior{0.75, 0.25};
    Matrix test(8, 2);
    for (std::size_t i = 0; i < 8; ++i) {
        test(i, 0) = 0.75;
        test(i, 1) = 0.25;
    }
    EstimateFlags flags;
    auto estimate = em_quantify(prior, test, {}, &flags);
    CHECK(estimate.values[0] == 0.75); // exact
    CHECK(estimate.values[1] == 0.25);
    CHECK_FALSE(flags.non_converged);
}

TEST_CASE("em with one-hot scores converges to the prediction counts") {
    std::vector<double> prior{0.5, 0.5};
    Matrix test(10, 2);
    for (std::size_t i = 0; i < 10; ++i) {
        test(i, 0) = i < 3 ? 1.0 : 0.0;
        test(i, 1) = i < 3 ? 0.0 : 1.0;
    }
    auto estimate = em_quantify(prior, test);
    CHECK(estimate.values[0] == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("em recovers a calibrated shift") {
    // train prior (0.8, 0.2); test truly (0.2, 0.8) with calibrated scores
    Rng rng(2718);
    const double train_prior = 0.8;
    const double test_prior = 0.2;
    // feature model: x | pos ~ N(1, 1), x | neg ~ N(-1, 1)
    auto posterior_pos = [&](double x) {
        const double lr = std::exp(2.0 * x); // likelihood ratio at unit variance
        return lr * train_prior / (lr * train_prior + (1.0 - train_prior));
    };
    const std::size_t n = 20000;
    Matrix test(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const bool positive = rng.next_double() < test_prior;
        const double x = (positive ? 1.0 : -1.0) + rng.next_normal();
        test(i, 0) = posterior_pos(x);
        test(i, 1) = 1.0 - test(i, 0);
    }
    auto estimate = em_quantify(std::vector<double>{train_prior, 1.0 - train_prior}, test);
    CHECK(std::abs(estimate.values[0] - test_prior) < 0.03);
}

TEST_CASE("cde converges to the truth on separable scores") {
    auto scores = confusion_fixture(1.0, 0.0, 20);
    std::vector<double> test_scores;
    for (int i = 0; i < 40; ++i) test_scores.push_back(i < 10 ? 0.95 : 0.05);
    EstimateFlags flags;
    auto estimate = cde_iterate(scores, test_scores, {}, &flags);
    CHECK(estimate.values[0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK_FALSE(flags.non_converged);
}

TEST_CASE("cde stays within the unit interval and matches no-shift prevalence") {
    Rng rng(31415);
    const double prior = 0.35;
    auto posterior_pos = [&](double x) {
        const double lr = std::exp(2.0 * x);
        return lr * prior / (lr * prior + (1.0 - prior));
    };
    const std::size_t n_pos = 3500, n_neg = 6500;
    std::vector<double> oof;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n_pos; ++i) {
        oof.push_back(posterior_pos(1.0 + rng.next_normal()));
        labels.push_back(0);
    }
    for (std::size_t i = 0; i < n_neg; ++i) {
        oof.push_back(posterior_pos(-1.0 + rng.next_normal()));
        labels.push_back(1);
    }
    auto scores = scores_from(binary_scores(oof), labels);
    std::vector<double> test_scores;
    for (std::size_t i = 0; i < 20000; ++i) {
        const bool positive = rng.next_double() < prior;
        test_scores.push_back(posterior_pos((positive ? 1.0 : -1.0) + rng.next_normal()));
    }
    auto estimate = cde_iterate(scores, test_scores);
    CHECK(estimate.values[0] >= 0.0);
    CHECK(estimate.values[0] <= 1.0);
    CHECK(std::abs(estimate.values[0] - prior) < 0.02);
}

TEST_CASE("exact-mixture recovery across the matching family") {
    Rng rng(1234);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t classes = 3;
        // column-stochastic random design
        Matrix design(classes, classes);
        for (std::size_t j = 0; j < classes; ++j) {
            double total = 0.0;
            for (std::size_t i = 0; i < classes; ++i) {
                design(i, j) = 0.05 + rng.next_double();
                total += design(i, j);
            }
            for (std::size_t i = 0; i < classes; ++i) design(i, j) /= total;
        }
        std::vector<double> truth{0.2 + 0.2 * rng.next_double(), 0.2 + 0.2 * rng.next_double(), 0.0};
        truth[2] = 1.0 - truth[0] - truth[1];
        auto target = mat_vec(design, truth);
        auto sol = solve_simplex_least_squares({design, target});
        CHECK(l1_distance(sol.theta, truth) < 1e-3);

        HellingerSystem hs;
        hs.designs.push_back(design);
        hs.targets.push_back(target);
        auto hsol = minimize_hellinger_mixture(hs);
        CHECK(l1_distance(hsol.theta, truth) < 1e-3);
    }
}
