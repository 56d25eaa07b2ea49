#include "quant/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace quant {

namespace {

constexpr double kProbFloor = 1e-12; // clamp before any log

void softmax_row(std::span<double> logits) {
    double peak = logits[0];
    for (double v : logits) peak = std::max(peak, v);
    double total = 0.0;
    for (double& v : logits) {
        v = std::exp(v - peak);
        total += v;
    }
    for (double& v : logits) v /= total;
}

// logits for one augmented instance (bias folded in)
void compute_logits(const Matrix& w, std::span<const double> x, std::span<double> out) {
    const std::size_t d = w.cols() - 1;
    for (std::size_t c = 0; c < w.rows(); ++c) {
        auto row = w.row(c);
        double acc = row[d]; // bias
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
        out[c] = acc;
    }
}

} // namespace

double logistic_loss(const Matrix& weights, const Matrix& x, const std::vector<int>& y,
                     double regularization_weight) {
    const std::size_t n = x.rows();
    const std::size_t classes = weights.rows();
    std::vector<double> logits(classes);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        compute_logits(weights, x.row(i), logits);
        softmax_row(logits);
        const double p = std::clamp(logits[static_cast<std::size_t>(y[i])], kProbFloor, 1.0 - kProbFloor);
        loss -= std::log(p);
    }
    loss /= static_cast<double>(n);
    const double lambda = 1.0 / (regularization_weight * static_cast<double>(n));
    double penalty = 0.0;
    const std::size_t d = weights.cols() - 1;
    for (std::size_t c = 0; c < classes; ++c) {
        auto row = weights.row(c);
        for (std::size_t j = 0; j < d; ++j) penalty += row[j] * row[j];
    }
    return loss + 0.5 * lambda * penalty;
}

Matrix logistic_loss_gradient(const Matrix& weights, const Matrix& x, const std::vector<int>& y,
                              double regularization_weight) {
    const std::size_t n = x.rows();
    const std::size_t classes = weights.rows();
    const std::size_t d = weights.cols() - 1;
    Matrix grad(classes, weights.cols(), 0.0);
    std::vector<double> probs(classes);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        compute_logits(weights, xi, probs);
        softmax_row(probs);
        probs[static_cast<std::size_t>(y[i])] -= 1.0;
        for (std::size_t c = 0; c < classes; ++c) {
            auto g = grad.row(c);
            for (std::size_t j = 0; j < d; ++j) g[j] += probs[c] * xi[j];
            g[d] += probs[c];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const double lambda = 1.0 / (regularization_weight * static_cast<double>(n));
    for (std::size_t c = 0; c < classes; ++c) {
        auto g = grad.row(c);
        auto w = weights.row(c);
        for (std::size_t j = 0; j < d; ++j) g[j] = g[j] * inv_n + lambda * w[j];
        g[d] *= inv_n;
    }
    return grad;
}

LogisticModel LogisticModel::fit(const Matrix& x, const std::vector<int>& y, int num_classes,
                                 const ClassifierConfig& config) {
    if (num_classes < 2) throw DataError("logistic regression: need at least 2 classes");
    if (x.rows() != y.size() || x.rows() == 0)
        throw DataError("logistic regression: empty or inconsistent training data");
    if (config.regularization_weight <= 0.0)
        throw ConfigError("logistic regression: regularization_weight must be positive");
    if (config.max_iterations < 1) throw ConfigError("logistic regression: max_iterations must be >= 1");

    const std::size_t classes = static_cast<std::size_t>(num_classes);
    const std::size_t dim = x.cols() + 1;
    const std::size_t nvar = classes * dim;

    LogisticModel model;
    model.weights_ = Matrix(classes, dim, 0.0);

    auto flat = [&](const Matrix& m) { return m.data(); };
    auto loss_at = [&](const Matrix& w) { return logistic_loss(w, x, y, config.regularization_weight); };

    double loss = loss_at(model.weights_);
    model.loss_trace_.push_back(loss);
    Matrix grad = logistic_loss_gradient(model.weights_, x, y, config.regularization_weight);

    // L-BFGS history
    const std::size_t memory = 10;
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    auto max_norm = [](std::span<const double> v) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    };

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        if (max_norm(flat(grad)) < config.convergence_tolerance) {
            model.converged_ = true;
            break;
        }

        // two-loop recursion
        std::vector<double> direction(flat(grad).begin(), flat(grad).end());
        std::vector<double> alpha(s_hist.size(), 0.0);
        for (std::size_t h = s_hist.size(); h-- > 0;) {
            alpha[h] = rho_hist[h] * dot(s_hist[h], direction);
            for (std::size_t j = 0; j < nvar; ++j) direction[j] -= alpha[h] * y_hist[h][j];
        }
        if (!s_hist.empty()) {
            const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
            for (double& v : direction) v *= gamma;
        }
        for (std::size_t h = 0; h < s_hist.size(); ++h) {
            const double beta = rho_hist[h] * dot(y_hist[h], direction);
            for (std::size_t j = 0; j < nvar; ++j) direction[j] += (alpha[h] - beta) * s_hist[h][j];
        }
        for (double& v : direction) v = -v;

        double descent = dot(direction, flat(grad));
        if (descent >= 0.0) { // fall back to steepest descent
            for (std::size_t j = 0; j < nvar; ++j) direction[j] = -flat(grad)[j];
            descent = dot(direction, flat(grad));
        }

        // backtracking Armijo line search
        double step = 1.0;
        Matrix next = model.weights_;
        double next_loss = loss;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t j = 0; j < nvar; ++j)
                next.data()[j] = flat(model.weights_)[j] + step * direction[j];
            next_loss = loss_at(next);
            if (next_loss <= loss + 1e-4 * step * descent) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // no further progress representable

        Matrix next_grad = logistic_loss_gradient(next, x, y, config.regularization_weight);
        std::vector<double> s(nvar), dy(nvar);
        for (std::size_t j = 0; j < nvar; ++j) {
            s[j] = next.data()[j] - flat(model.weights_)[j];
            dy[j] = next_grad.data()[j] - flat(grad)[j];
        }
        const double sy = dot(s, dy);
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(dy));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        model.weights_ = std::move(next);
        grad = std::move(next_grad);
        loss = next_loss;
        model.loss_trace_.push_back(loss);
    }
    if (max_norm(flat(grad)) < config.convergence_tolerance) model.converged_ = true;
    return model;
}

LogisticModel LogisticModel::fit(const Dataset& train, const ClassifierConfig& config) {
    std::vector<bool> present(train.class_names.size(), false);
    for (int y : train.labels) present[static_cast<std::size_t>(y)] = true;
    const auto observed = std::count(present.begin(), present.end(), true);
    if (observed < 2) throw DataError("logistic regression: training data has a single class");
    return fit(train.features, train.labels, train.num_classes(), config);
}

std::vector<double> LogisticModel::predict_proba(std::span<const double> x) const {
    std::vector<double> probs(weights_.rows());
    compute_logits(weights_, x, probs);
    softmax_row(probs);
    return probs;
}

Matrix LogisticModel::predict_proba(const Matrix& x) const {
    Matrix out(x.rows(), weights_.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto probs = predict_proba(x.row(i));
        for (std::size_t c = 0; c < probs.size(); ++c) out(i, c) = probs[c];
    }
    return out;
}

int LogisticModel::predict(std::span<const double> x) const {
    auto probs = predict_proba(x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c)
        if (probs[c] > probs[best]) best = c;
    return static_cast<int>(best);
}

std::vector<int> LogisticModel::predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
    return out;
}

FittedScores cross_val_scores(const Dataset& train, const ClassifierConfig& config, int folds,
                              std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross_val_scores: folds must be >= 2");
    if (static_cast<std::size_t>(folds) > train.size())
        throw ConfigError("cross_val_scores: more folds than instances");
    std::vector<bool> present(train.class_names.size(), false);
    for (int y : train.labels) present[static_cast<std::size_t>(y)] = true;
    if (std::count(present.begin(), present.end(), true) < 2)
        throw DataError("cross_val_scores: fewer than 2 classes present");

    const std::size_t n = train.size();
    const int classes = train.num_classes();

    // Stratified fold assignment: per class, shuffle then deal round-robin.
    // The dealing cursor runs across classes so that classes smaller than the
    // fold count spread over different folds.
    std::vector<int> fold_of(n, 0);
    std::size_t cursor = 0;
    for (int c = 0; c < classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (train.labels[i] == c) members.push_back(i);
        Rng rng(mix_seed(seed, 0xf01dULL + static_cast<std::uint64_t>(c)));
        partial_shuffle(members, members.size(), rng);
        for (std::size_t m : members) {
            fold_of[m] = static_cast<int>(cursor % static_cast<std::size_t>(folds));
            ++cursor;
        }
    }

    FittedScores out;
    out.oof_scores = Matrix(n, static_cast<std::size_t>(classes));
    out.oof_labels = train.labels;
    out.fold_assignment = fold_of;

    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> fit_rows, held_rows;
        for (std::size_t i = 0; i < n; ++i)
            (fold_of[i] == f ? held_rows : fit_rows).push_back(i);
        if (held_rows.empty()) continue;
        Matrix x(fit_rows.size(), train.features.cols());
        std::vector<int> y(fit_rows.size());
        for (std::size_t r = 0; r < fit_rows.size(); ++r) {
            for (std::size_t j = 0; j < x.cols(); ++j) x(r, j) = train.features(fit_rows[r], j);
            y[r] = train.labels[fit_rows[r]];
        }
        LogisticModel fold_model = LogisticModel::fit(x, y, classes, config);
        for (std::size_t i : held_rows) {
            auto probs = fold_model.predict_proba(train.features.row(i));
            for (int c = 0; c < classes; ++c) out.oof_scores(i, static_cast<std::size_t>(c)) = probs[static_cast<std::size_t>(c)];
        }
    }

    out.model = LogisticModel::fit(train.features, train.labels, classes, config);
    return out;
}

ConfusionRates confusion_rates(const FittedScores& scores) {
    const int classes = scores.num_classes();
    const std::size_t n = scores.oof_scores.rows();
    std::vector<std::size_t> class_totals(static_cast<std::size_t>(classes), 0);
    Matrix counts(static_cast<std::size_t>(classes), static_cast<std::size_t>(classes), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = scores.oof_scores.row(i);
        std::size_t pred = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (row[c] > row[pred]) pred = c;
        const auto truth = static_cast<std::size_t>(scores.oof_labels[i]);
        counts(pred, truth) += 1.0;
        class_totals[truth] += 1;
    }
    ConfusionRates rates;
    rates.matrix = Matrix(static_cast<std::size_t>(classes), static_cast<std::size_t>(classes), 0.0);
    for (std::size_t j = 0; j < static_cast<std::size_t>(classes); ++j) {
        if (class_totals[j] == 0)
            throw DataError("confusion_rates: class " + std::to_string(j) + " absent from out-of-fold labels");
        for (std::size_t i = 0; i < static_cast<std::size_t>(classes); ++i)
            rates.matrix(i, j) = counts(i, j) / static_cast<double>(class_totals[j]);
    }
    if (classes == 2) {
        rates.tpr = rates.matrix(0, 0);
        rates.fpr = rates.matrix(0, 1);
    }
    return rates;
}

Matrix class_conditional_mean_scores(const FittedScores& scores) {
    const int classes = scores.num_classes();
    const std::size_t n = scores.oof_scores.rows();
    std::vector<std::size_t> class_totals(static_cast<std::size_t>(classes), 0);
    Matrix means(static_cast<std::size_t>(classes), static_cast<std::size_t>(classes), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto truth = static_cast<std::size_t>(scores.oof_labels[i]);
        class_totals[truth] += 1;
        auto row = scores.oof_scores.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) means(c, truth) += row[c];
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(classes); ++j) {
        if (class_totals[j] == 0)
            throw DataError("class_conditional_mean_scores: class " + std::to_string(j) +
                            " absent from out-of-fold labels");
        for (std::size_t i = 0; i < static_cast<std::size_t>(classes); ++i)
            means(i, j) /= static_cast<double>(class_totals[j]);
    }
    return means;
}

double round_to_two_decimals(double score) {
    return std::floor(score * 100.0) / 100.0;
}

RocCurve roc_curve(const FittedScores& scores, int positive_class) {
    if (scores.num_classes() != 2) throw DataError("roc_curve: binary scores required");
    const std::size_t n = scores.oof_scores.rows();
    const auto pos = static_cast<std::size_t>(positive_class);

    std::vector<double> rounded(n);
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        rounded[i] = round_to_two_decimals(scores.oof_scores(i, pos));
        if (scores.oof_labels[i] == positive_class) ++n_pos;
        else ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0) throw DataError("roc_curve: both classes must be present");

    std::vector<double> thresholds(rounded);
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    RocCurve curve;
    curve.thresholds = thresholds;
    curve.tpr_at.resize(thresholds.size());
    curve.fpr_at.resize(thresholds.size());
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (rounded[i] < thresholds[t]) continue;
            if (scores.oof_labels[i] == positive_class) ++tp;
            else ++fp;
        }
        curve.tpr_at[t] = static_cast<double>(tp) / static_cast<double>(n_pos);
        curve.fpr_at[t] = static_cast<double>(fp) / static_cast<double>(n_neg);
    }
    return curve;
}

} // namespace quant
