#pragma once

#include <span>
#include <string>
#include <vector>

#include "quant/common.hpp"

namespace quant {

/// Absolute error: L1 distance between the true and estimated class
/// distributions. Bounded by 2, attained at disjoint point masses.
double absolute_error(std::span<const double> p, std::span<const double> theta);

/// Normalized Kullback-Leibler divergence, mapped to [0, 1) via
/// 2*exp(KLD)/(1+exp(KLD)) - 1. Both distributions are smoothed as
/// (v + eps) / (1 + L*eps) before taking logs.
double nkld(std::span<const double> p, std::span<const double> theta, double epsilon = 1e-8);

/// Ranks each row ascending (rank 1 = smallest error), ties get midranks.
/// Input rows are datasets, columns are methods.
Matrix rank_methods(const Matrix& per_dataset_mean_errors);

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject = false;
    std::size_t datasets = 0;
    std::size_t methods = 0;
};

/// Friedman chi-square test on a rank matrix (rows = datasets).
FriedmanResult friedman_test(const Matrix& ranks, double alpha = 0.05);

/// Nemenyi critical difference, CD = q_alpha(k) * sqrt(k(k+1)/(6n)).
/// q_alpha comes from an embedded table for 2 <= k <= 30, alpha in {0.05, 0.10}.
double nemenyi_cd(int k, int n, double alpha);

/// Maximal intervals of methods (given their average ranks, sorted internally)
/// whose extreme ranks differ by strictly less than cd. Returned as index sets
/// into `average_ranks`; singletons are reported for uncovered methods.
std::vector<std::vector<std::size_t>> significance_groups(const std::vector<double>& average_ranks,
                                                          double cd);

/// Upper tail of the chi-square distribution (regularized incomplete gamma).
double chi_square_sf(double x, double dof);

struct RankReport {
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    Matrix mean_errors;   // datasets x methods
    Matrix ranks;         // datasets x methods
    std::vector<double> average_ranks;
    FriedmanResult friedman;
    double critical_difference = 0.0;
    std::vector<std::vector<std::size_t>> groups;

    std::string to_markdown() const;
    std::string to_csv() const;
    /// Plot-ready CD-diagram data: method, average rank, group ids.
    std::string to_cd_data() const;
};

} // namespace quant
