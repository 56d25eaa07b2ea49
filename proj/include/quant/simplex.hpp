#pragma once

#include <span>
#include <vector>

#include "quant/common.hpp"

namespace quant {

/// A point on the probability simplex: entries >= 0, summing to 1.
struct PrevalenceEstimate {
    std::vector<double> values;

    std::size_t num_classes() const { return values.size(); }
    void validate(double tol = 1e-9) const;
};

/// min(max(raw, 0), 1); NaN is rejected.
double clip_to_unit(double raw);

/// Euclidean projection onto the probability simplex.
PrevalenceEstimate project_to_simplex(std::vector<double> raw);

/// Normalizes per-class one-vs-rest estimates to the simplex; an all-zero
/// input falls back to the uniform distribution.
PrevalenceEstimate ovr_combine(const std::vector<double>& per_class_estimates);

/// Linear system matched by the distribution-matching quantifiers:
/// design (K x L, columns are class-conditional representations) against a
/// length-K test representation.
struct MatchSystem {
    Matrix design;
    std::vector<double> target;
};

struct SimplexSolution {
    std::vector<double> theta;
    bool converged = true;
    bool degenerate = false; // objective flat over the simplex; uniform returned
};

/// Minimizes theta' Q theta + lin' theta over the probability simplex.
/// Projected gradient from the uniform start plus an exact active-set polish;
/// deterministic. Q must be symmetric and the objective convex on the simplex.
SimplexSolution minimize_quadratic_on_simplex(const Matrix& q, const std::vector<double>& lin,
                                              double tol = 1e-12, std::size_t max_iter = 200000);

/// argmin over the simplex of || design * theta - target ||_2^2.
SimplexSolution solve_simplex_least_squares(const MatchSystem& system);

// Histogram distances. Inputs are same-length simplex points.
double topsoe_distance(std::span<const double> p, std::span<const double> q);
double hellinger_distance(std::span<const double> p, std::span<const double> q);
// plain L1 on histograms is l1_distance from common.hpp

enum class MixDistance { Topsoe, L1 };

/// argmin over alpha in [0,1] of distance(alpha*H+ + (1-alpha)*H-, H_test).
/// Ternary search for Topsoe; exact grid scan with one refinement for L1,
/// whose piecewise-linear objective can stall a ternary search.
double mixture_search_binary(std::span<const double> hist_pos, std::span<const double> hist_neg,
                             std::span<const double> hist_test, MixDistance distance);

/// Several (design, target) pairs sharing one mixing vector; the objective is
/// the sum of Hellinger distances between design*theta and target.
struct HellingerSystem {
    std::vector<Matrix> designs;
    std::vector<std::vector<double>> targets;
};

/// Minimizes the summed Hellinger objective over the simplex. Lattice scan for
/// L <= 3 plus projected gradient with backtracking from the scanned optimum
/// and a least-squares warm start.
SimplexSolution minimize_hellinger_mixture(const HellingerSystem& system, double tol = 1e-6);

} // namespace quant
