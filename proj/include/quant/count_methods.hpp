#pragma once

#include <span>
#include <vector>

#include "quant/classifier.hpp"
#include "quant/simplex.hpp"

namespace quant {

struct EstimateFlags {
    bool clipped = false;
    bool non_converged = false;
    bool fallback = false;

    void merge(const EstimateFlags& other) {
        clipped |= other.clipped;
        non_converged |= other.non_converged;
        fallback |= other.fallback;
    }
};

/// Classify and count: the empirical distribution of argmax predictions.
PrevalenceEstimate classify_and_count(const LogisticModel& model, const Matrix& test_features);

/// Adjusted count, Eq. (ppos - fpr) / (tpr - fpr), clipped to [0, 1].
/// Throws DataError when tpr == fpr; callers fall back to ppos.
double adjusted_count(double ppos, double tpr, double fpr);

/// Probabilistic adjusted count on class-conditional mean confidences.
double probabilistic_adjusted_count(double mean_test_score, double mean_score_given_pos,
                                    double mean_score_given_neg);

enum class ThresholdKind { TSX, TS50, TSMax, MS };

struct ThresholdPolicy {
    ThresholdKind kind = ThresholdKind::TSMax;
    double ms_denominator_floor = 0.25;
};

/// Picks a threshold index on the curve. tsmax maximizes tpr - fpr, tsx
/// minimizes |fpr - (1 - tpr)|, ts50 minimizes |tpr - 0.5|; ties go to the
/// higher threshold.
std::size_t select_threshold(const RocCurve& roc, const ThresholdPolicy& policy);

/// Threshold-policy quantification of the positive-class prevalence. For MS,
/// the median of the raw per-threshold estimates over thresholds with
/// tpr - fpr >= floor, then clipped; an empty ensemble falls back to tsmax.
double threshold_quantify(const FittedScores& scores, std::span<const double> test_scores,
                          const ThresholdPolicy& policy, EstimateFlags* flags = nullptr);

} // namespace quant
