#include "quant/count_methods.hpp"

#include <algorithm>
#include <cmath>

namespace quant {

PrevalenceEstimate classify_and_count(const LogisticModel& model, const Matrix& test_features) {
    if (test_features.rows() == 0) throw DataError("classify_and_count: empty test set");
    std::vector<double> counts(static_cast<std::size_t>(model.num_classes()), 0.0);
    for (std::size_t i = 0; i < test_features.rows(); ++i)
        counts[static_cast<std::size_t>(model.predict(test_features.row(i)))] += 1.0;
    for (double& v : counts) v /= static_cast<double>(test_features.rows());
    return PrevalenceEstimate{std::move(counts)};
}

double adjusted_count(double ppos, double tpr, double fpr) {
    if (tpr == fpr) throw DataError("adjusted_count: degenerate denominator (tpr == fpr)");
    return clip_to_unit((ppos - fpr) / (tpr - fpr));
}

double probabilistic_adjusted_count(double mean_test_score, double mean_score_given_pos,
                                    double mean_score_given_neg) {
    if (mean_score_given_pos == mean_score_given_neg)
        throw DataError("probabilistic_adjusted_count: equal conditional means");
    return clip_to_unit((mean_test_score - mean_score_given_neg) /
                        (mean_score_given_pos - mean_score_given_neg));
}

std::size_t select_threshold(const RocCurve& roc, const ThresholdPolicy& policy) {
    if (roc.thresholds.empty()) throw DataError("select_threshold: empty ROC curve");
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < roc.thresholds.size(); ++t) {
        double score = 0.0;
        switch (policy.kind) {
            case ThresholdKind::TSMax: score = roc.tpr_at[t] - roc.fpr_at[t]; break;
            case ThresholdKind::TSX: score = -std::abs(roc.fpr_at[t] - (1.0 - roc.tpr_at[t])); break;
            case ThresholdKind::TS50: score = -std::abs(roc.tpr_at[t] - 0.5); break;
            case ThresholdKind::MS: throw ConfigError("select_threshold: MS is an ensemble policy");
        }
        // thresholds are descending, so strict improvement keeps the higher one
        if (score > best_score) {
            best_score = score;
            best = t;
        }
    }
    return best;
}

namespace {

double positive_fraction_at(std::span<const double> test_scores, double threshold) {
    std::size_t hits = 0;
    for (double s : test_scores)
        if (s >= threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(test_scores.size());
}

double single_threshold_estimate(const RocCurve& roc, std::size_t index,
                                 std::span<const double> test_scores, EstimateFlags* flags) {
    const double tpr = roc.tpr_at[index];
    const double fpr = roc.fpr_at[index];
    const double ppos = positive_fraction_at(test_scores, roc.thresholds[index]);
    if (tpr == fpr) {
        if (flags) flags->fallback = true;
        return ppos;
    }
    const double raw = (ppos - fpr) / (tpr - fpr);
    const double clipped = clip_to_unit(raw);
    if (flags && clipped != raw) flags->clipped = true;
    return clipped;
}

} // namespace

double threshold_quantify(const FittedScores& scores, std::span<const double> test_scores,
                          const ThresholdPolicy& policy, EstimateFlags* flags) {
    if (scores.num_classes() != 2) throw DataError("threshold_quantify: binary problem required");
    if (test_scores.empty()) throw DataError("threshold_quantify: empty test scores");
    const RocCurve roc = roc_curve(scores);

    if (policy.kind != ThresholdKind::MS) {
        const std::size_t index = select_threshold(roc, policy);
        return single_threshold_estimate(roc, index, test_scores, flags);
    }

    std::vector<double> raw_estimates;
    for (std::size_t t = 0; t < roc.thresholds.size(); ++t) {
        const double denom = roc.tpr_at[t] - roc.fpr_at[t];
        if (denom < policy.ms_denominator_floor) continue;
        const double ppos = positive_fraction_at(test_scores, roc.thresholds[t]);
        raw_estimates.push_back((ppos - roc.fpr_at[t]) / denom);
    }
    if (raw_estimates.empty()) {
        if (flags) flags->fallback = true;
        ThresholdPolicy tsmax{ThresholdKind::TSMax, policy.ms_denominator_floor};
        const std::size_t index = select_threshold(roc, tsmax);
        return single_threshold_estimate(roc, index, test_scores, flags);
    }
    std::sort(raw_estimates.begin(), raw_estimates.end());
    const std::size_t m = raw_estimates.size();
    const double median = (m % 2 == 1) ? raw_estimates[m / 2]
                                       : 0.5 * (raw_estimates[m / 2 - 1] + raw_estimates[m / 2]);
    const double clipped = clip_to_unit(median);
    if (flags && clipped != median) flags->clipped = true;
    return clipped;
}

} // namespace quant
