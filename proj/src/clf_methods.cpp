#include "quant/clf_methods.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quant {

PrevalenceEstimate pcc(const Matrix& test_scores) {
    if (test_scores.rows() == 0) throw DataError("pcc: empty test scores");
    std::vector<double> mean(test_scores.cols(), 0.0);
    for (std::size_t i = 0; i < test_scores.rows(); ++i) {
        auto r = test_scores.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) mean[j] += r[j];
    }
    for (double& v : mean) v /= static_cast<double>(test_scores.rows());
    return PrevalenceEstimate{std::move(mean)};
}

PrevalenceEstimate pwk(const Dataset& train, const Matrix& test_features, int k, double alpha) {
    if (k < 1) throw ConfigError("pwk: k must be positive");
    if (static_cast<std::size_t>(k) > train.size()) throw DataError("pwk: k exceeds training size");
    if (test_features.rows() == 0) throw DataError("pwk: empty test set");
    if (alpha <= 0.0) throw ConfigError("pwk: alpha must be positive");

    const int classes = train.num_classes();
    const auto counts = train.class_counts();
    std::size_t n_min = train.size();
    for (std::size_t c : counts)
        if (c > 0) n_min = std::min(n_min, c);
    std::vector<double> weight(static_cast<std::size_t>(classes), 0.0);
    for (std::size_t c = 0; c < weight.size(); ++c)
        if (counts[c] > 0)
            weight[c] = std::pow(static_cast<double>(n_min) / static_cast<double>(counts[c]), 1.0 / alpha);

    std::vector<double> votes(static_cast<std::size_t>(classes));
    std::vector<std::pair<double, std::size_t>> dist(train.size());
    std::vector<double> prediction_counts(static_cast<std::size_t>(classes), 0.0);

    for (std::size_t t = 0; t < test_features.rows(); ++t) {
        auto x = test_features.row(t);
        for (std::size_t i = 0; i < train.size(); ++i) {
            double acc = 0.0;
            auto r = train.features.row(i);
            for (std::size_t j = 0; j < r.size(); ++j) {
                const double d = x[j] - r[j];
                acc += d * d;
            }
            dist[i] = {acc, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        std::fill(votes.begin(), votes.end(), 0.0);
        for (int nb = 0; nb < k; ++nb)
            votes[static_cast<std::size_t>(train.labels[dist[static_cast<std::size_t>(nb)].second])] +=
                weight[static_cast<std::size_t>(train.labels[dist[static_cast<std::size_t>(nb)].second])];
        std::size_t best = 0;
        for (std::size_t c = 1; c < votes.size(); ++c)
            if (votes[c] > votes[best]) best = c;
        prediction_counts[best] += 1.0;
    }
    for (double& v : prediction_counts) v /= static_cast<double>(test_features.rows());
    return PrevalenceEstimate{std::move(prediction_counts)};
}

} // namespace quant
