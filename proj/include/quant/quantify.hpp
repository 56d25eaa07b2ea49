#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "quant/clf_methods.hpp"
#include "quant/count_methods.hpp"
#include "quant/dm_methods.hpp"

namespace quant {

enum class Method {
    CC, ACC, PCC, PACC, TSX, TS50, TSMax, MS,
    GAC, GPAC, DyS, FMM, Readme, HDx, HDy, FM, ED, EM, CDE, PWK,
};

struct MethodTraits {
    const char* id;           // exact string constant exposed externally
    bool native_multiclass;   // handles L > 2 directly
    bool ovr_multiclass;      // extended via one-vs-rest for L > 2
    bool needs_classifier;
    bool needs_binned;        // requires a finite (binned) feature space
};

const MethodTraits& method_traits(Method method);
Method method_from_id(const std::string& id);
const std::vector<Method>& all_methods();

enum class MulticlassStrategy { Auto, Native, OneVsRest };

/// A fully specified quantifier: the method plus its hyperparameters.
struct QuantifierSpec {
    Method method = Method::CC;
    MulticlassStrategy strategy = MulticlassStrategy::Auto;

    ClassifierConfig classifier;
    int dys_bins = 10;
    int fmm_bins = 100;
    int readme_subsets = 50;
    int readme_cell_cap = 4096;
    double ms_denominator_floor = 0.25;
    int pwk_neighbors = 10;
    double pwk_alpha = 1.0;
    IterControl iteration;
};

struct QuantifyResult {
    PrevalenceEstimate estimate;
    EstimateFlags flags;
};

/// Shared per-draw artifacts. All classifier-based methods of one draw consume
/// the same cross-validated scores; one-vs-rest sub-problems refit their own
/// binary classifiers, built lazily and shared across OVR methods.
class DrawContext {
public:
    /// `train` must be classifier-ready (standardized / one-hot encoded);
    /// binned variants may be omitted when no binned method runs.
    DrawContext(const Dataset& train, Matrix test_features, const Dataset* train_binned,
                const Matrix* test_binned, ClassifierConfig classifier_config, int cv_folds,
                std::uint64_t seed);

    const Dataset& train() const { return train_; }
    const Matrix& test_features() const { return test_features_; }
    const Dataset& train_binned() const;
    const Matrix& test_binned() const;
    int num_classes() const { return train_.num_classes(); }
    std::uint64_t seed() const { return seed_; }

    /// Cross-validated scores on the full multiclass problem (lazy).
    const FittedScores& scores();
    /// Refit-model scores on the test set (lazy).
    const Matrix& test_scores();
    /// Cross-validated scores of the one-vs-rest relabeling for `cls`.
    const FittedScores& binary_scores(int cls);
    /// Positive-class test scores of the one-vs-rest relabeling for `cls`.
    const std::vector<double>& binary_test_scores(int cls);

    /// Combined content hash of the distinct classifier artifacts a method
    /// consumed; 0 when no classifier artifact was touched.
    std::uint64_t consumed_hash() const;
    void reset_consumed_hash() { consumed_.clear(); }

private:
    const Dataset& train_;
    Matrix test_features_;
    const Dataset* train_binned_ = nullptr;
    const Matrix* test_binned_ = nullptr;
    ClassifierConfig config_;
    int cv_folds_;
    std::uint64_t seed_;

    std::optional<FittedScores> scores_;
    std::optional<Matrix> test_scores_;
    std::uint64_t scores_hash_ = 0;
    struct BinaryArtifacts {
        FittedScores scores;
        std::vector<double> test_scores;
        std::uint64_t hash = 0;
    };
    std::vector<std::optional<BinaryArtifacts>> binary_;
    std::set<std::uint64_t> consumed_;
};

/// Runs one quantifier on a prepared draw. The one-vs-rest wrapper relabels
/// per class, runs the binary method and normalizes the per-class estimates.
QuantifyResult quantify(const QuantifierSpec& spec, DrawContext& context);

/// Convenience entry point: builds the draw context from a training set and
/// test features. Binned methods require an all-categorical dataset.
QuantifyResult quantify(const QuantifierSpec& spec, const Dataset& train,
                        const Matrix& test_features, std::uint64_t seed = 0, int cv_folds = 10);

} // namespace quant
