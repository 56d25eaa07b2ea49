#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quant/classifier.hpp"
#include "quant/count_methods.hpp"
#include "quant/simplex.hpp"

namespace quant {

/// Iteration contract shared by EM and CDE: stop on an L1 change below
/// epsilon or after max_iterations.
struct IterControl {
    double epsilon = 1e-6;
    std::size_t max_iterations = 1000;
};

/// Generalized adjusted count: confusion-rate design against the
/// classify-and-count test distribution, solved on the simplex.
PrevalenceEstimate gac(const FittedScores& scores, const Matrix& test_scores,
                       EstimateFlags* flags = nullptr);

/// Probabilistic variant: class-conditional mean confidences against the
/// mean test score vector.
PrevalenceEstimate gpac(const FittedScores& scores, const Matrix& test_scores,
                        EstimateFlags* flags = nullptr);

/// Uniform histograms over [0, 1] of binary positive-class scores.
struct BinnedScoreHist {
    int bin_count = 10;
    std::vector<double> hist_pos;  // train, true positives
    std::vector<double> hist_neg;  // train, true negatives
    std::vector<double> hist_test;
};

BinnedScoreHist bin_scores(std::span<const double> train_pos_scores,
                           std::span<const int> train_labels,
                           std::span<const double> test_pos_scores, int bins,
                           bool round_two_decimals);

/// DyS with the Topsoe distance over 10 bins (binary).
PrevalenceEstimate dys(const FittedScores& scores, std::span<const double> test_scores,
                       int bins = 10);

/// Forman's mixture model: L1 distance, 100 bins, scores rounded to two
/// decimals before binning (binary).
PrevalenceEstimate fmm(const FittedScores& scores, std::span<const double> test_scores,
                       int bins = 100);

/// HDy: the GAC system minimized under the Hellinger distance.
PrevalenceEstimate hdy(const FittedScores& scores, const Matrix& test_scores);

/// HDx: per-feature categorical histograms; minimizes the summed Hellinger
/// distance between mixed train histograms and test histograms. All features
/// must be categorical (binned).
PrevalenceEstimate hdx(const Dataset& train_binned, const Matrix& test_binned);

/// readme: ensembles of uniformly drawn feature subsets; per subset the joint
/// cell distributions give an ordinary least-squares system. The averaged
/// solutions are projected onto the simplex. Subsets whose full cell product
/// exceeds cell_cap are redrawn.
PrevalenceEstimate readme(const Dataset& train_binned, const Matrix& test_binned,
                          int subset_count, std::uint64_t seed, int cell_cap = 4096);

/// Friedman's method: indicator features score_j(x) > train prevalence_j.
PrevalenceEstimate friedman_method(const FittedScores& scores, const Matrix& test_scores,
                                   EstimateFlags* flags = nullptr);

/// Energy distance minimization on raw feature vectors; no classifier.
PrevalenceEstimate energy_distance_quantify(const Dataset& train, const Matrix& test_features,
                                            EstimateFlags* flags = nullptr);

/// EM prior adjustment on probabilistic test scores.
PrevalenceEstimate em_quantify(std::span<const double> train_prevalence, const Matrix& test_scores,
                               const IterControl& control = {}, EstimateFlags* flags = nullptr);

/// CDE iteration (binary): alternates a Bayes-optimal threshold under the
/// current estimate with an adjusted-count correction at that threshold.
PrevalenceEstimate cde_iterate(const FittedScores& scores, std::span<const double> test_scores,
                               const IterControl& control = {}, EstimateFlags* flags = nullptr);

} // namespace quant
