#include "quant/dm_methods.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace quant {

namespace {

std::vector<double> mean_rows(const Matrix& m) {
    std::vector<double> mean(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) mean[j] += r[j];
    }
    for (double& v : mean) v /= static_cast<double>(m.rows());
    return mean;
}

std::vector<double> cc_distribution(const Matrix& test_scores) {
    std::vector<double> counts(test_scores.cols(), 0.0);
    for (std::size_t i = 0; i < test_scores.rows(); ++i) {
        auto r = test_scores.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < r.size(); ++c)
            if (r[c] > r[best]) best = c;
        counts[best] += 1.0;
    }
    for (double& v : counts) v /= static_cast<double>(test_scores.rows());
    return counts;
}

PrevalenceEstimate finish_solution(SimplexSolution solution, EstimateFlags* flags) {
    if (flags) {
        flags->fallback |= solution.degenerate;
        flags->non_converged |= !solution.converged;
    }
    return PrevalenceEstimate{std::move(solution.theta)};
}

} // namespace

PrevalenceEstimate gac(const FittedScores& scores, const Matrix& test_scores, EstimateFlags* flags) {
    MatchSystem system;
    system.design = confusion_rates(scores).matrix;
    system.target = cc_distribution(test_scores);
    return finish_solution(solve_simplex_least_squares(system), flags);
}

PrevalenceEstimate gpac(const FittedScores& scores, const Matrix& test_scores, EstimateFlags* flags) {
    MatchSystem system;
    system.design = class_conditional_mean_scores(scores);
    system.target = mean_rows(test_scores);
    return finish_solution(solve_simplex_least_squares(system), flags);
}

BinnedScoreHist bin_scores(std::span<const double> train_pos_scores,
                           std::span<const int> train_labels,
                           std::span<const double> test_pos_scores, int bins,
                           bool round_two_decimals) {
    if (bins < 2) throw ConfigError("bin_scores: need at least 2 bins");
    if (train_pos_scores.size() != train_labels.size())
        throw DataError("bin_scores: score/label length mismatch");
    BinnedScoreHist hist;
    hist.bin_count = bins;
    hist.hist_pos.assign(static_cast<std::size_t>(bins), 0.0);
    hist.hist_neg.assign(static_cast<std::size_t>(bins), 0.0);
    hist.hist_test.assign(static_cast<std::size_t>(bins), 0.0);

    auto bin_of = [&](double s) {
        if (round_two_decimals) s = round_to_two_decimals(s);
        int b = static_cast<int>(std::floor(s * bins));
        return static_cast<std::size_t>(std::clamp(b, 0, bins - 1));
    };

    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < train_pos_scores.size(); ++i) {
        if (train_labels[i] == 0) {
            hist.hist_pos[bin_of(train_pos_scores[i])] += 1.0;
            ++n_pos;
        } else {
            hist.hist_neg[bin_of(train_pos_scores[i])] += 1.0;
            ++n_neg;
        }
    }
    if (n_pos == 0 || n_neg == 0) throw DataError("bin_scores: both classes must be present");
    for (double& v : hist.hist_pos) v /= static_cast<double>(n_pos);
    for (double& v : hist.hist_neg) v /= static_cast<double>(n_neg);
    for (double s : test_pos_scores) hist.hist_test[bin_of(s)] += 1.0;
    for (double& v : hist.hist_test) v /= static_cast<double>(test_pos_scores.size());
    return hist;
}

namespace {

std::vector<double> positive_column(const FittedScores& scores) {
    std::vector<double> out(scores.oof_scores.rows());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scores.oof_scores(i, 0);
    return out;
}

PrevalenceEstimate mixture_estimate(const FittedScores& scores, std::span<const double> test_scores,
                                    int bins, MixDistance distance, bool round_scores) {
    if (scores.num_classes() != 2) throw DataError("mixture quantifier: binary scores required");
    if (test_scores.empty()) throw DataError("mixture quantifier: empty test scores");
    const auto train_scores = positive_column(scores);
    const auto hist = bin_scores(train_scores, scores.oof_labels, test_scores, bins, round_scores);
    const double alpha = mixture_search_binary(hist.hist_pos, hist.hist_neg, hist.hist_test, distance);
    return PrevalenceEstimate{{alpha, 1.0 - alpha}};
}

} // namespace

PrevalenceEstimate dys(const FittedScores& scores, std::span<const double> test_scores, int bins) {
    return mixture_estimate(scores, test_scores, bins, MixDistance::Topsoe, false);
}

PrevalenceEstimate fmm(const FittedScores& scores, std::span<const double> test_scores, int bins) {
    return mixture_estimate(scores, test_scores, bins, MixDistance::L1, true);
}

PrevalenceEstimate hdy(const FittedScores& scores, const Matrix& test_scores) {
    HellingerSystem system;
    system.designs.push_back(confusion_rates(scores).matrix);
    system.targets.push_back(cc_distribution(test_scores));
    return PrevalenceEstimate{minimize_hellinger_mixture(system).theta};
}

namespace {

struct FeatureHistograms {
    Matrix design; // cardinality x L
    std::vector<double> target;
};

FeatureHistograms feature_histograms(const Dataset& train, const Matrix& test, std::size_t column) {
    const int cardinality = train.schema[column].cardinality;
    const int classes = train.num_classes();
    FeatureHistograms out;
    out.design = Matrix(static_cast<std::size_t>(cardinality), static_cast<std::size_t>(classes), 0.0);
    out.target.assign(static_cast<std::size_t>(cardinality), 0.0);

    std::vector<double> class_totals(static_cast<std::size_t>(classes), 0.0);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto code = static_cast<std::size_t>(train.features(i, column));
        const auto cls = static_cast<std::size_t>(train.labels[i]);
        out.design(code, cls) += 1.0;
        class_totals[cls] += 1.0;
    }
    for (std::size_t b = 0; b < static_cast<std::size_t>(cardinality); ++b)
        for (std::size_t c = 0; c < static_cast<std::size_t>(classes); ++c)
            if (class_totals[c] > 0.0) out.design(b, c) /= class_totals[c];

    for (std::size_t i = 0; i < test.rows(); ++i) {
        const int code = std::clamp(static_cast<int>(test(i, column)), 0, cardinality - 1);
        out.target[static_cast<std::size_t>(code)] += 1.0;
    }
    for (double& v : out.target) v /= static_cast<double>(test.rows());
    return out;
}

void require_all_binned(const Dataset& data) {
    for (const auto& col : data.schema)
        if (col.kind != ColumnKind::Categorical)
            throw DataError("feature '" + col.name + "' is not binned/categorical");
}

} // namespace

PrevalenceEstimate hdx(const Dataset& train_binned, const Matrix& test_binned) {
    require_all_binned(train_binned);
    if (test_binned.rows() == 0) throw DataError("hdx: empty test set");
    HellingerSystem system;
    for (std::size_t j = 0; j < train_binned.dim(); ++j) {
        auto fh = feature_histograms(train_binned, test_binned, j);
        system.designs.push_back(std::move(fh.design));
        system.targets.push_back(std::move(fh.target));
    }
    return PrevalenceEstimate{minimize_hellinger_mixture(system).theta};
}

namespace {

// Unconstrained least squares via the normal equations; a tiny ridge handles
// rank-deficient subsets.
std::vector<double> ordinary_least_squares(const Matrix& a, const std::vector<double>& b) {
    const std::size_t n = a.cols();
    Matrix g = gram(a);
    auto atb = mat_tvec(a, b);
    double scale = 0.0;
    for (double v : g.data()) scale = std::max(scale, std::abs(v));
    for (std::size_t j = 0; j < n; ++j) g(j, j) += 1e-10 * (1.0 + scale);

    // Gaussian elimination with partial pivoting
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(g(perm[r], col)) > std::abs(g(perm[pivot], col))) pivot = r;
        std::swap(perm[col], perm[pivot]);
        const double diag = g(perm[col], col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = g(perm[r], col) / diag;
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) g(perm[r], c) -= factor * g(perm[col], c);
            atb[perm[r]] -= factor * atb[perm[col]];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = atb[perm[i]];
        for (std::size_t c = i + 1; c < n; ++c) acc -= g(perm[i], c) * x[c];
        x[i] = acc / g(perm[i], i);
    }
    return x;
}

std::vector<std::size_t> draw_subset(std::size_t dim, std::size_t size, Rng& rng) {
    std::vector<std::size_t> all(dim);
    std::iota(all.begin(), all.end(), 0);
    partial_shuffle(all, size, rng);
    all.resize(size);
    std::sort(all.begin(), all.end());
    return all;
}

} // namespace

PrevalenceEstimate readme(const Dataset& train_binned, const Matrix& test_binned,
                          int subset_count, std::uint64_t seed, int cell_cap) {
    require_all_binned(train_binned);
    if (test_binned.rows() == 0) throw DataError("readme: empty test set");
    const std::size_t dim = train_binned.dim();
    const std::size_t subset_size = std::min(
        dim, static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(dim))) + 1.0));
    const int classes = train_binned.num_classes();

    Rng rng(mix_seed(seed, 0x4eadULL));
    std::vector<double> accumulated(static_cast<std::size_t>(classes), 0.0);

    for (int s = 0; s < subset_count; ++s) {
        std::vector<std::size_t> subset;
        bool ok = false;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            subset = draw_subset(dim, subset_size, rng);
            double cells = 1.0;
            for (std::size_t j : subset) cells *= train_binned.schema[j].cardinality;
            if (cells <= static_cast<double>(cell_cap)) {
                ok = true;
                break;
            }
        }
        if (!ok) throw DataError("readme: every drawn subset exceeds the joint cell cap");

        // joint cells observed in train or test, keyed by the code tuple
        std::map<std::vector<int>, std::size_t> cell_index;
        auto key_of = [&](const Matrix& m, std::size_t row) {
            std::vector<int> key(subset.size());
            for (std::size_t j = 0; j < subset.size(); ++j)
                key[j] = static_cast<int>(m(row, subset[j]));
            return key;
        };
        for (std::size_t i = 0; i < train_binned.size(); ++i)
            cell_index.try_emplace(key_of(train_binned.features, i), cell_index.size());
        for (std::size_t i = 0; i < test_binned.rows(); ++i)
            cell_index.try_emplace(key_of(test_binned, i), cell_index.size());

        Matrix design(cell_index.size(), static_cast<std::size_t>(classes), 0.0);
        std::vector<double> target(cell_index.size(), 0.0);
        std::vector<double> class_totals(static_cast<std::size_t>(classes), 0.0);
        for (std::size_t i = 0; i < train_binned.size(); ++i) {
            const auto cls = static_cast<std::size_t>(train_binned.labels[i]);
            design(cell_index.at(key_of(train_binned.features, i)), cls) += 1.0;
            class_totals[cls] += 1.0;
        }
        for (std::size_t cell = 0; cell < cell_index.size(); ++cell)
            for (std::size_t c = 0; c < static_cast<std::size_t>(classes); ++c)
                if (class_totals[c] > 0.0) design(cell, c) /= class_totals[c];
        for (std::size_t i = 0; i < test_binned.rows(); ++i)
            target[cell_index.at(key_of(test_binned, i))] += 1.0;
        for (double& v : target) v /= static_cast<double>(test_binned.rows());

        auto theta = ordinary_least_squares(design, target);
        for (std::size_t c = 0; c < accumulated.size(); ++c) accumulated[c] += theta[c];
    }

    for (double& v : accumulated) v /= static_cast<double>(subset_count);
    return project_to_simplex(std::move(accumulated));
}

PrevalenceEstimate friedman_method(const FittedScores& scores, const Matrix& test_scores,
                                   EstimateFlags* flags) {
    const int classes = scores.num_classes();
    const std::size_t n = scores.oof_scores.rows();

    std::vector<double> train_prev(static_cast<std::size_t>(classes), 0.0);
    for (int y : scores.oof_labels) train_prev[static_cast<std::size_t>(y)] += 1.0;
    for (double& v : train_prev) v /= static_cast<double>(n);

    MatchSystem system;
    system.design = Matrix(static_cast<std::size_t>(classes), static_cast<std::size_t>(classes), 0.0);
    std::vector<double> class_totals(static_cast<std::size_t>(classes), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto cls = static_cast<std::size_t>(scores.oof_labels[i]);
        class_totals[cls] += 1.0;
        auto row = scores.oof_scores.row(i);
        for (std::size_t c = 0; c < row.size(); ++c)
            if (row[c] > train_prev[c]) system.design(c, cls) += 1.0;
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(classes); ++j) {
        if (class_totals[j] == 0.0)
            throw DataError("friedman_method: class " + std::to_string(j) + " absent from training data");
        for (std::size_t c = 0; c < static_cast<std::size_t>(classes); ++c)
            system.design(c, j) /= class_totals[j];
    }

    system.target.assign(static_cast<std::size_t>(classes), 0.0);
    for (std::size_t i = 0; i < test_scores.rows(); ++i) {
        auto row = test_scores.row(i);
        for (std::size_t c = 0; c < row.size(); ++c)
            if (row[c] > train_prev[c]) system.target[c] += 1.0;
    }
    for (double& v : system.target) v /= static_cast<double>(test_scores.rows());

    return finish_solution(solve_simplex_least_squares(system), flags);
}

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace

PrevalenceEstimate energy_distance_quantify(const Dataset& train, const Matrix& test_features,
                                            EstimateFlags* flags) {
    if (test_features.rows() == 0) throw DataError("energy_distance_quantify: empty test set");
    const int classes = train.num_classes();
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < train.size(); ++i)
        members[static_cast<std::size_t>(train.labels[i])].push_back(i);
    for (std::size_t c = 0; c < members.size(); ++c)
        if (members[c].empty())
            throw DataError("energy_distance_quantify: class " + std::to_string(c) + " is empty");

    // mean pairwise distances between classes (V-statistic: all ordered pairs)
    Matrix m(static_cast<std::size_t>(classes), static_cast<std::size_t>(classes), 0.0);
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a; b < members.size(); ++b) {
            double acc = 0.0;
            for (std::size_t i : members[a])
                for (std::size_t j : members[b])
                    acc += euclidean(train.features.row(i), train.features.row(j));
            acc /= static_cast<double>(members[a].size() * members[b].size());
            m(a, b) = acc;
            m(b, a) = acc;
        }
    }

    std::vector<double> b_vec(static_cast<std::size_t>(classes), 0.0);
    for (std::size_t c = 0; c < members.size(); ++c) {
        double acc = 0.0;
        for (std::size_t t = 0; t < test_features.rows(); ++t)
            for (std::size_t i : members[c]) acc += euclidean(test_features.row(t), train.features.row(i));
        b_vec[c] = acc / static_cast<double>(test_features.rows() * members[c].size());
    }

    // minimize 2 theta' b - theta' M theta, convex on the simplex
    Matrix q(static_cast<std::size_t>(classes), static_cast<std::size_t>(classes), 0.0);
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = 0; j < q.cols(); ++j) q(i, j) = -m(i, j);
    std::vector<double> lin(b_vec.size());
    for (std::size_t j = 0; j < lin.size(); ++j) lin[j] = 2.0 * b_vec[j];
    return finish_solution(minimize_quadratic_on_simplex(q, lin, 1e-12, 500000), flags);
}

PrevalenceEstimate em_quantify(std::span<const double> train_prevalence, const Matrix& test_scores,
                               const IterControl& control, EstimateFlags* flags) {
    const std::size_t classes = train_prevalence.size();
    if (test_scores.cols() != classes) throw DataError("em_quantify: score width mismatch");
    if (test_scores.rows() == 0) throw DataError("em_quantify: empty test scores");

    std::vector<double> theta(train_prevalence.begin(), train_prevalence.end());
    const std::size_t n = test_scores.rows();
    std::vector<double> posterior(classes, 0.0);
    bool converged = false;

    for (std::size_t iter = 0; iter < control.max_iterations; ++iter) {
        std::vector<double> next(classes, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = test_scores.row(i);
            double total = 0.0;
            for (std::size_t c = 0; c < classes; ++c) {
                // classes with zero training prevalence stay excluded
                posterior[c] = train_prevalence[c] > 0.0 ? (theta[c] / train_prevalence[c]) * row[c] : 0.0;
                total += posterior[c];
            }
            if (total <= 0.0) continue;
            for (std::size_t c = 0; c < classes; ++c) next[c] += posterior[c] / total;
        }
        for (double& v : next) v /= static_cast<double>(n);
        const double change = l1_distance(theta, next);
        theta = std::move(next);
        if (change < control.epsilon) {
            converged = true;
            break;
        }
    }
    if (flags) flags->non_converged |= !converged;
    return PrevalenceEstimate{std::move(theta)};
}

PrevalenceEstimate cde_iterate(const FittedScores& scores, std::span<const double> test_scores,
                               const IterControl& control, EstimateFlags* flags) {
    if (scores.num_classes() != 2) throw DataError("cde_iterate: binary problem required");
    if (test_scores.empty()) throw DataError("cde_iterate: empty test scores");

    const std::size_t n = scores.oof_scores.rows();
    std::size_t n_pos = 0;
    for (int y : scores.oof_labels)
        if (y == 0) ++n_pos;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("cde_iterate: both classes must be present");
    const double p_train = static_cast<double>(n_pos) / static_cast<double>(n);

    const auto oof_pos = [&](std::size_t i) { return scores.oof_scores(i, 0); };

    double estimate = p_train;
    bool converged = false;
    for (std::size_t iter = 0; iter < control.max_iterations; ++iter) {
        // Bayes-optimal threshold for the current prevalence estimate
        const double numer = p_train * (1.0 - estimate);
        const double denom = numer + (1.0 - p_train) * estimate;
        const double threshold = denom > 0.0 ? numer / denom : 1.0;

        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (oof_pos(i) < threshold) continue;
            if (scores.oof_labels[i] == 0) ++tp;
            else ++fp;
        }
        const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);

        std::size_t hits = 0;
        for (double s : test_scores)
            if (s >= threshold) ++hits;
        const double ppos = static_cast<double>(hits) / static_cast<double>(test_scores.size());

        double next;
        if (tpr == fpr) {
            next = ppos;
            if (flags) flags->fallback = true;
        } else {
            const double raw = (ppos - fpr) / (tpr - fpr);
            next = clip_to_unit(raw);
            if (flags && next != raw) flags->clipped = true;
        }
        const double change = std::abs(next - estimate);
        estimate = next;
        if (change < control.epsilon) {
            converged = true;
            break;
        }
    }
    if (flags) flags->non_converged |= !converged;
    return PrevalenceEstimate{{estimate, 1.0 - estimate}};
}

} // namespace quant
