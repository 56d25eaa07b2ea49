#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quant/dataset.hpp"

namespace quant {

struct ClassifierConfig {
    double regularization_weight = 1.0; // L2 penalty weighted by 1/regularization_weight
    std::size_t max_iterations = 1000;
    double convergence_tolerance = 1e-6; // max-norm of the mean-loss gradient
};

/// Multinomial (softmax) logistic regression with an unpenalized intercept,
/// trained by L-BFGS with backtracking line search from zero weights.
/// Training is deterministic: same data, same weights.
class LogisticModel {
public:
    LogisticModel() = default;

    static LogisticModel fit(const Matrix& x, const std::vector<int>& y, int num_classes,
                             const ClassifierConfig& config);
    /// Convenience overload; errors when fewer than 2 classes are present.
    static LogisticModel fit(const Dataset& train, const ClassifierConfig& config);

    std::vector<double> predict_proba(std::span<const double> x) const;
    Matrix predict_proba(const Matrix& x) const;
    /// argmax class, ties broken toward the lower index.
    int predict(std::span<const double> x) const;
    std::vector<int> predict(const Matrix& x) const;

    int num_classes() const { return static_cast<int>(weights_.rows()); }
    std::size_t input_dim() const { return weights_.cols() - 1; }
    const Matrix& weights() const { return weights_; } // L x (D+1), bias last
    bool converged() const { return converged_; }
    const std::vector<double>& loss_trace() const { return loss_trace_; }

private:
    Matrix weights_;
    bool converged_ = false;
    std::vector<double> loss_trace_;
};

/// Mean cross-entropy plus L2 penalty 1/(2 C N) * ||W||^2 (bias excluded).
/// Exposed for gradient verification; `weights` is L x (D+1) with bias last.
double logistic_loss(const Matrix& weights, const Matrix& x, const std::vector<int>& y,
                     double regularization_weight);
Matrix logistic_loss_gradient(const Matrix& weights, const Matrix& x, const std::vector<int>& y,
                              double regularization_weight);

/// Out-of-fold scores from stratified cross-validation plus the final model
/// refit on all training data. Every score row comes from a fold model that
/// never saw the instance.
struct FittedScores {
    Matrix oof_scores;                // N x L
    std::vector<int> oof_labels;      // N
    std::vector<int> fold_assignment; // N
    LogisticModel model;

    int num_classes() const { return static_cast<int>(oof_scores.cols()); }
};

FittedScores cross_val_scores(const Dataset& train, const ClassifierConfig& config, int folds = 10,
                              std::uint64_t seed = 0);

/// Column-normalized confusion matrix estimated from out-of-fold argmax
/// predictions: entry (i, j) = P(c(X) = i | Y = j). For binary problems tpr
/// and fpr are filled in with class 0 as the positive class.
struct ConfusionRates {
    Matrix matrix;
    double tpr = 0.0;
    double fpr = 0.0;
};

ConfusionRates confusion_rates(const FittedScores& scores);

/// Entry (i, j) = mean score assigned to class i over instances whose true
/// class is j. Columns sum to 1.
Matrix class_conditional_mean_scores(const FittedScores& scores);

/// Scores and thresholds reduced by rounding down to two decimals.
double round_to_two_decimals(double score);

struct RocCurve {
    std::vector<double> thresholds; // distinct rounded scores, descending
    std::vector<double> tpr_at;
    std::vector<double> fpr_at;
};

/// Candidate thresholds from the rounded out-of-fold positive-class scores;
/// rates use the predict-positive rule score >= threshold.
RocCurve roc_curve(const FittedScores& scores, int positive_class = 0);

} // namespace quant
