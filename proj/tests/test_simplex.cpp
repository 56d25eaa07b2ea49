#include <doctest.h>

#include <cmath>

#include "quant/oracles.hpp"
#include "quant/simplex.hpp"

using namespace quant;

TEST_CASE("clip_to_unit") {
    CHECK(clip_to_unit(1.1667) == doctest::Approx(1.0));
    CHECK(clip_to_unit(-0.2) == doctest::Approx(0.0));
    CHECK(clip_to_unit(0.42) == doctest::Approx(0.42));
    CHECK_THROWS(clip_to_unit(std::nan("")));
}

TEST_CASE("project_to_simplex") {
    auto same = project_to_simplex({0.2, 0.3, 0.5});
    CHECK(same.values[0] == doctest::Approx(0.2));
    CHECK(same.values[1] == doctest::Approx(0.3));
    CHECK(same.values[2] == doctest::Approx(0.5));

    auto corner = project_to_simplex({1.2, -0.2});
    CHECK(corner.values[0] == doctest::Approx(1.0));
    CHECK(corner.values[1] == doctest::Approx(0.0));

    auto uniform = project_to_simplex({0.0, 0.0, 0.0});
    for (double v : uniform.values) CHECK(v == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS(project_to_simplex({std::nan(""), 0.0}));
}

TEST_CASE("projection matches the brute-force oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        const double a = rng.next_double() * 3.0 - 1.0;
        const double b = rng.next_double() * 3.0 - 1.0;
        auto fast = project_to_simplex({a, b});
        auto brute = oracle::simplex_grid_minimize(
            [&](std::span<const double> theta) {
                const double d0 = theta[0] - a;
                const double d1 = theta[1] - b;
                return d0 * d0 + d1 * d1;
            },
            2, 200);
        CHECK(std::abs(fast.values[0] - brute[0]) < 0.01);
    }
}

TEST_CASE("ovr_combine") {
    auto combined = ovr_combine({0.5, 1.0, 0.5});
    CHECK(combined.values[0] == doctest::Approx(0.25));
    CHECK(combined.values[1] == doctest::Approx(0.5));
    CHECK(combined.values[2] == doctest::Approx(0.25));

    auto uniform = ovr_combine({0.0, 0.0, 0.0});
    for (double v : uniform.values) CHECK(v == doctest::Approx(1.0 / 3.0));

    auto kept = ovr_combine({0.2, 0.8});
    CHECK(kept.values[0] == doctest::Approx(0.2));
    CHECK(kept.values[1] == doctest::Approx(0.8));
}

TEST_CASE("ovr_combine scale invariance") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v{rng.next_double(), rng.next_double(), rng.next_double()};
        const double scale = 0.1 + rng.next_double() * 5.0;
        std::vector<double> scaled(v);
        for (double& x : scaled) x *= scale;
        auto a = ovr_combine(v), b = ovr_combine(scaled);
        for (std::size_t i = 0; i < v.size(); ++i)
            CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("simplex least squares: identity design") {
    MatchSystem system;
    system.design = Matrix(2, 2);
    system.design(0, 0) = 1.0;
    system.design(1, 1) = 1.0;
    system.target = {0.3, 0.7};
    auto sol = solve_simplex_least_squares(system);
    CHECK(sol.theta[0] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(sol.theta[1] == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("simplex least squares: interior exact solve") {
    MatchSystem system;
    system.design = Matrix(2, 2);
    system.design(0, 0) = 1.0; system.design(0, 1) = 0.5;
    system.design(1, 0) = 0.0; system.design(1, 1) = 0.5;
    system.target = {0.75, 0.25};
    auto sol = solve_simplex_least_squares(system);
    CHECK(sol.theta[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.theta[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("simplex least squares: infeasible target stays on the simplex") {
    MatchSystem system;
    system.design = Matrix(2, 2);
    system.design(0, 0) = 0.9; system.design(0, 1) = 0.4;
    system.design(1, 0) = 0.1; system.design(1, 1) = 0.6;
    system.target = {2.0, -1.0};
    auto sol = solve_simplex_least_squares(system);
    double total = 0.0;
    for (double v : sol.theta) {
        CHECK(v >= -1e-12);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("degenerate design returns uniform flagged") {
    MatchSystem system;
    system.design = Matrix(2, 2);
    system.design(0, 0) = 0.5; system.design(0, 1) = 0.5;
    system.design(1, 0) = 0.5; system.design(1, 1) = 0.5;
    system.target = {0.5, 0.5};
    auto sol = solve_simplex_least_squares(system);
    CHECK(sol.degenerate);
    CHECK(sol.theta[0] == doctest::Approx(0.5));
}

TEST_CASE("quadratic solver matches lattice oracle on random convex problems") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3;
        Matrix a(5, n);
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.next_double();
        std::vector<double> target(a.rows());
        for (double& v : target) v = rng.next_double();
        MatchSystem system{a, target};
        auto sol = solve_simplex_least_squares(system);
        auto brute = oracle::simplex_grid_minimize(
            [&](std::span<const double> theta) {
                auto residual = mat_vec(a, theta);
                double acc = 0.0;
                for (std::size_t i = 0; i < residual.size(); ++i) {
                    const double d = residual[i] - target[i];
                    acc += d * d;
                }
                return acc;
            },
            static_cast<int>(n), 100);
        CHECK(l1_distance(sol.theta, brute) < 0.03);
    }
}

TEST_CASE("distances: symmetry, nonnegativity, identity") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(6);
        auto draw = [&] {
            std::vector<double> v(n);
            double total = 0.0;
            for (double& x : v) {
                x = rng.next_double() + 1e-6;
                total += x;
            }
            for (double& x : v) x /= total;
            return v;
        };
        auto p = draw(), q = draw();
        CHECK(topsoe_distance(p, q) == doctest::Approx(topsoe_distance(q, p)));
        CHECK(hellinger_distance(p, q) == doctest::Approx(hellinger_distance(q, p)));
        CHECK(l1_distance(p, q) == doctest::Approx(l1_distance(q, p)));
        CHECK(topsoe_distance(p, q) >= -1e-12);
        CHECK(hellinger_distance(p, q) >= 0.0);
        CHECK(topsoe_distance(p, p) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(hellinger_distance(p, p) == doctest::Approx(0.0).epsilon(1e-12));
        if (l1_distance(p, q) > 1e-6) {
            CHECK(topsoe_distance(p, q) > 1e-12);
            CHECK(hellinger_distance(p, q) > 1e-12);
        }
    }
}

TEST_CASE("hellinger known values") {
    std::vector<double> p{1.0, 0.0}, q{0.0, 1.0};
    CHECK(hellinger_distance(p, q) == doctest::Approx(std::sqrt(2.0)));
    std::vector<double> a{0.5, 0.5}, b{0.25, 0.75};
    const double direct = std::sqrt(std::pow(std::sqrt(0.5) - std::sqrt(0.25), 2) +
                                    std::pow(std::sqrt(0.5) - std::sqrt(0.75), 2));
    CHECK(hellinger_distance(a, b) == doctest::Approx(direct));
    CHECK_THROWS(hellinger_distance(p, std::vector<double>{1.0}));
}

TEST_CASE("mixture search binary") {
    std::vector<double> hp{0.8, 0.2}, hn{0.2, 0.8};
    for (auto distance : {MixDistance::Topsoe, MixDistance::L1}) {
        CHECK(mixture_search_binary(hp, hn, std::vector<double>{0.5, 0.5}, distance) ==
              doctest::Approx(0.5).epsilon(1e-6));
        CHECK(mixture_search_binary(hp, hn, hp, distance) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(mixture_search_binary(hp, hn, std::vector<double>{0.35, 0.65}, distance) ==
              doctest::Approx(0.25).epsilon(1e-5));
    }
}

TEST_CASE("mixture search matches the lattice oracle") {
    std::vector<double> hp{0.8, 0.2}, hn{0.2, 0.8}, ht{0.35, 0.65};
    auto brute = oracle::simplex_grid_minimize(
        [&](std::span<const double> theta) {
            std::vector<double> mix{theta[0] * hp[0] + theta[1] * hn[0],
                                    theta[0] * hp[1] + theta[1] * hn[1]};
            return topsoe_distance(mix, ht);
        },
        2, 200);
    const double alpha = mixture_search_binary(hp, hn, ht, MixDistance::Topsoe);
    CHECK(std::abs(alpha - brute[0]) < 0.01);
}

TEST_CASE("hellinger mixture minimization") {
    // identity design: theta = target
    HellingerSystem system;
    Matrix identity(3, 3);
    for (int i = 0; i < 3; ++i) identity(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = 1.0;
    system.designs.push_back(identity);
    system.targets.push_back({0.2, 0.5, 0.3});
    auto sol = minimize_hellinger_mixture(system);
    CHECK(l1_distance(sol.theta, std::vector<double>{0.2, 0.5, 0.3}) < 1e-6);
}
