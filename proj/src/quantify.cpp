#include "quant/quantify.hpp"

#include <algorithm>
#include <cstring>

namespace quant {

namespace {

constexpr MethodTraits kTraits[] = {
    {"cc", true, false, true, false},
    {"acc", false, true, true, false},
    {"pcc", true, false, true, false},
    {"pacc", false, true, true, false},
    {"tsx", false, true, true, false},
    {"ts50", false, true, true, false},
    {"tsmax", false, true, true, false},
    {"ms", false, true, true, false},
    {"gac", true, false, true, false},
    {"gpac", true, false, true, false},
    {"dys", false, true, true, false},
    {"fmm", false, true, true, false},
    {"readme", true, false, false, true},
    {"hdx", true, false, false, true},
    {"hdy", true, false, true, false},
    {"fm", true, false, true, false},
    {"ed", true, false, false, false},
    {"em", true, false, true, false},
    {"cde", false, false, true, false}, // binary only
    {"pwk", true, false, false, false},
};

std::uint64_t fnv1a(const void* bytes, std::size_t count, std::uint64_t hash = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < count; ++i) {
        hash ^= p[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t hash_scores(const FittedScores& scores) {
    auto data = scores.oof_scores.data();
    std::uint64_t h = fnv1a(data.data(), data.size() * sizeof(double));
    h = fnv1a(scores.oof_labels.data(), scores.oof_labels.size() * sizeof(int), h);
    h = fnv1a(scores.fold_assignment.data(), scores.fold_assignment.size() * sizeof(int), h);
    return h;
}

} // namespace

const MethodTraits& method_traits(Method method) {
    return kTraits[static_cast<std::size_t>(method)];
}

Method method_from_id(const std::string& id) {
    for (std::size_t i = 0; i < std::size(kTraits); ++i)
        if (id == kTraits[i].id) return static_cast<Method>(i);
    throw ConfigError("unknown method id '" + id + "'");
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods = [] {
        std::vector<Method> out;
        for (std::size_t i = 0; i < std::size(kTraits); ++i) out.push_back(static_cast<Method>(i));
        return out;
    }();
    return methods;
}

DrawContext::DrawContext(const Dataset& train, Matrix test_features, const Dataset* train_binned,
                         const Matrix* test_binned, ClassifierConfig classifier_config,
                         int cv_folds, std::uint64_t seed)
    : train_(train),
      test_features_(std::move(test_features)),
      train_binned_(train_binned),
      test_binned_(test_binned),
      config_(classifier_config),
      cv_folds_(cv_folds),
      seed_(seed) {
    binary_.resize(static_cast<std::size_t>(train.num_classes()));
}

const Dataset& DrawContext::train_binned() const {
    if (!train_binned_) throw DataError("this method needs binned features, none were provided");
    return *train_binned_;
}

const Matrix& DrawContext::test_binned() const {
    if (!test_binned_) throw DataError("this method needs binned features, none were provided");
    return *test_binned_;
}

std::uint64_t DrawContext::consumed_hash() const {
    std::uint64_t combined = 0;
    for (std::uint64_t h : consumed_) combined = fnv1a(&h, sizeof h, combined ? combined : 0xcbf29ce484222325ULL);
    return combined;
}

const FittedScores& DrawContext::scores() {
    if (!scores_) {
        scores_ = cross_val_scores(train_, config_, cv_folds_, seed_);
        scores_hash_ = hash_scores(*scores_);
    }
    consumed_.insert(scores_hash_);
    return *scores_;
}

const Matrix& DrawContext::test_scores() {
    const auto& fitted = scores(); // also registers artifact consumption
    if (!test_scores_) test_scores_ = fitted.model.predict_proba(test_features_);
    return *test_scores_;
}

const FittedScores& DrawContext::binary_scores(int cls) {
    auto& slot = binary_[static_cast<std::size_t>(cls)];
    if (!slot) {
        Dataset relabeled;
        relabeled.name = train_.name;
        relabeled.features = train_.features;
        relabeled.schema = train_.schema;
        relabeled.class_names = {"positive", "rest"};
        relabeled.labels.resize(train_.size());
        for (std::size_t i = 0; i < train_.size(); ++i)
            relabeled.labels[i] = train_.labels[i] == cls ? 0 : 1;
        BinaryArtifacts artifacts;
        artifacts.scores = cross_val_scores(relabeled, config_, cv_folds_,
                                            mix_seed(seed_, 0x0b1aULL + static_cast<std::uint64_t>(cls)));
        Matrix test = artifacts.scores.model.predict_proba(test_features_);
        artifacts.test_scores.resize(test.rows());
        for (std::size_t i = 0; i < test.rows(); ++i) artifacts.test_scores[i] = test(i, 0);
        artifacts.hash = hash_scores(artifacts.scores);
        slot = std::move(artifacts);
    }
    consumed_.insert(slot->hash);
    return slot->scores;
}

const std::vector<double>& DrawContext::binary_test_scores(int cls) {
    binary_scores(cls);
    return binary_[static_cast<std::size_t>(cls)]->test_scores;
}

namespace {

std::vector<double> positive_test_column(DrawContext& ctx) {
    const Matrix& scores = ctx.test_scores();
    std::vector<double> out(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) out[i] = scores(i, 0);
    return out;
}

// Runs a binary-only method on prepared binary artifacts; returns the
// positive-class prevalence.
double run_binary(const QuantifierSpec& spec, const FittedScores& scores,
                  const std::vector<double>& test_scores, EstimateFlags& flags) {
    switch (spec.method) {
        case Method::ACC: {
            const auto rates = confusion_rates(scores);
            std::size_t hits = 0;
            for (double s : test_scores)
                if (s >= 0.5) ++hits;
            // argmax of a binary score row is the 0.5 rule on the positive score
            const double ppos = static_cast<double>(hits) / static_cast<double>(test_scores.size());
            if (rates.tpr == rates.fpr) {
                flags.fallback = true;
                return ppos;
            }
            const double raw = (ppos - rates.fpr) / (rates.tpr - rates.fpr);
            const double clipped = clip_to_unit(raw);
            flags.clipped |= clipped != raw;
            return clipped;
        }
        case Method::PACC: {
            const auto means = class_conditional_mean_scores(scores);
            double mean_test = 0.0;
            for (double s : test_scores) mean_test += s;
            mean_test /= static_cast<double>(test_scores.size());
            const double given_pos = means(0, 0);
            const double given_neg = means(0, 1);
            if (given_pos == given_neg) {
                flags.fallback = true;
                return mean_test;
            }
            const double raw = (mean_test - given_neg) / (given_pos - given_neg);
            const double clipped = clip_to_unit(raw);
            flags.clipped |= clipped != raw;
            return clipped;
        }
        case Method::TSX:
        case Method::TS50:
        case Method::TSMax:
        case Method::MS: {
            ThresholdPolicy policy;
            policy.ms_denominator_floor = spec.ms_denominator_floor;
            switch (spec.method) {
                case Method::TSX: policy.kind = ThresholdKind::TSX; break;
                case Method::TS50: policy.kind = ThresholdKind::TS50; break;
                case Method::TSMax: policy.kind = ThresholdKind::TSMax; break;
                default: policy.kind = ThresholdKind::MS; break;
            }
            return threshold_quantify(scores, test_scores, policy, &flags);
        }
        case Method::DyS:
            return dys(scores, test_scores, spec.dys_bins).values[0];
        case Method::FMM:
            return fmm(scores, test_scores, spec.fmm_bins).values[0];
        case Method::CDE:
            return cde_iterate(scores, test_scores, spec.iteration, &flags).values[0];
        default:
            throw ConfigError("method is not a binary count/mixture quantifier");
    }
}

QuantifyResult run_native(const QuantifierSpec& spec, DrawContext& ctx) {
    QuantifyResult result;
    switch (spec.method) {
        case Method::CC:
            ctx.scores();
            result.estimate = classify_and_count(ctx.scores().model, ctx.test_features());
            break;
        case Method::PCC:
            result.estimate = pcc(ctx.test_scores());
            break;
        case Method::GAC:
            result.estimate = gac(ctx.scores(), ctx.test_scores(), &result.flags);
            break;
        case Method::GPAC:
            result.estimate = gpac(ctx.scores(), ctx.test_scores(), &result.flags);
            break;
        case Method::HDy:
            result.estimate = hdy(ctx.scores(), ctx.test_scores());
            break;
        case Method::FM:
            result.estimate = friedman_method(ctx.scores(), ctx.test_scores(), &result.flags);
            break;
        case Method::EM: {
            const auto prevalence = ctx.train().class_prevalence();
            result.estimate = em_quantify(prevalence, ctx.test_scores(), spec.iteration, &result.flags);
            break;
        }
        case Method::ED:
            result.estimate = energy_distance_quantify(ctx.train(), ctx.test_features(), &result.flags);
            break;
        case Method::PWK:
            result.estimate = pwk(ctx.train(), ctx.test_features(), spec.pwk_neighbors, spec.pwk_alpha);
            break;
        case Method::Readme:
            result.estimate = readme(ctx.train_binned(), ctx.test_binned(), spec.readme_subsets,
                                     ctx.seed(), spec.readme_cell_cap);
            break;
        case Method::HDx:
            result.estimate = hdx(ctx.train_binned(), ctx.test_binned());
            break;
        default: {
            // binary-only methods run natively when L == 2
            result.estimate.values.resize(2);
            const double positive = run_binary(spec, ctx.scores(), positive_test_column(ctx), result.flags);
            result.estimate.values[0] = positive;
            result.estimate.values[1] = 1.0 - positive;
            break;
        }
    }
    return result;
}

QuantifyResult run_ovr(const QuantifierSpec& spec, DrawContext& ctx) {
    QuantifyResult result;
    const int classes = ctx.num_classes();
    std::vector<double> per_class(static_cast<std::size_t>(classes), 0.0);
    for (int c = 0; c < classes; ++c)
        per_class[static_cast<std::size_t>(c)] =
            run_binary(spec, ctx.binary_scores(c), ctx.binary_test_scores(c), result.flags);
    double total = 0.0;
    for (double v : per_class) total += v;
    if (total <= 0.0) result.flags.fallback = true; // uniform fallback
    result.estimate = ovr_combine(per_class);
    return result;
}

} // namespace

QuantifyResult quantify(const QuantifierSpec& spec, DrawContext& context) {
    const auto& traits = method_traits(spec.method);
    const int classes = context.num_classes();

    if (classes == 2) {
        if (spec.strategy == MulticlassStrategy::OneVsRest) {
            if (!traits.ovr_multiclass)
                throw ConfigError(std::string(traits.id) + ": one-vs-rest not supported");
            QuantifyResult result = run_ovr(spec, context);
            result.estimate.validate();
            return result;
        }
        QuantifyResult result = run_native(spec, context);
        result.estimate.validate();
        return result;
    }

    const bool want_ovr = spec.strategy == MulticlassStrategy::OneVsRest ||
                          (spec.strategy == MulticlassStrategy::Auto && !traits.native_multiclass);
    if (want_ovr) {
        if (!traits.ovr_multiclass)
            throw ConfigError(std::string(traits.id) + ": no multiclass support (one-vs-rest excluded)");
        QuantifyResult result = run_ovr(spec, context);
        result.estimate.validate();
        return result;
    }
    if (!traits.native_multiclass)
        throw ConfigError(std::string(traits.id) + ": not a native multiclass method (use one-vs-rest)");
    QuantifyResult result = run_native(spec, context);
    result.estimate.validate();
    return result;
}

QuantifyResult quantify(const QuantifierSpec& spec, const Dataset& train,
                        const Matrix& test_features, std::uint64_t seed, int cv_folds) {
    const auto& traits = method_traits(spec.method);
    const Dataset* binned = nullptr;
    const Matrix* binned_test = nullptr;
    if (traits.needs_binned) {
        binned = &train;
        binned_test = &test_features;
    }
    DrawContext ctx(train, test_features, binned, binned_test, spec.classifier, cv_folds, seed);
    return quantify(spec, ctx);
}

} // namespace quant
