#include "quant/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quant {

void ScenarioSpec::validate() const {
    if (train_dist.size() != test_dist.size() || train_dist.empty())
        throw ConfigError("scenario: train and test distributions must have equal, positive length");
    for (const auto* dist : {&train_dist, &test_dist}) {
        double total = 0.0;
        for (double v : *dist) {
            if (v < 0.0) throw ConfigError("scenario: distribution entries must be nonnegative");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw ConfigError("scenario: distribution must sum to 1");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("scenario: train_fraction must lie in (0, 1)");
}

std::size_t max_feasible_total(const std::vector<std::size_t>& class_counts,
                               const ScenarioSpec& spec) {
    spec.validate();
    if (class_counts.size() != spec.num_classes())
        throw ConfigError("max_feasible_total: class count length mismatch");
    const double f = spec.train_fraction;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < class_counts.size(); ++j) {
        const double demand = f * spec.train_dist[j] + (1.0 - f) * spec.test_dist[j];
        if (demand <= 0.0) continue;
        if (class_counts[j] == 0)
            throw DataError("class " + std::to_string(j) +
                            " has positive requested prevalence but no instances");
        best = std::min(best, static_cast<double>(class_counts[j]) / demand);
    }
    if (!std::isfinite(best)) throw ConfigError("max_feasible_total: all demands are zero");
    return static_cast<std::size_t>(std::floor(best + 1e-9));
}

namespace {

// Largest-remainder apportionment. Zero targets stay at exactly zero; the
// integer total is the rounded sum of the real-valued targets.
std::vector<std::size_t> apportion(const std::vector<double>& targets) {
    const std::size_t n = targets.size();
    std::vector<std::size_t> counts(n, 0);
    std::vector<double> remainders(n, 0.0);
    double total_target = 0.0;
    std::size_t floor_sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
        total_target += targets[j];
        const double fl = std::floor(targets[j] + 1e-12);
        counts[j] = static_cast<std::size_t>(fl);
        remainders[j] = targets[j] - fl;
        floor_sum += counts[j];
    }
    std::size_t total = static_cast<std::size_t>(std::llround(total_target));
    if (total < floor_sum) total = floor_sum;
    std::size_t leftover = total - floor_sum;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainders[a] > remainders[b];
    });
    for (std::size_t t = 0; t < order.size() && leftover > 0; ++t) {
        const std::size_t j = order[t];
        if (targets[j] <= 0.0 || remainders[j] <= 1e-12) continue;
        counts[j] += 1;
        --leftover;
    }
    return counts;
}

} // namespace

DrawnSplit draw_split(const Dataset& data, const ScenarioSpec& spec) {
    spec.validate();
    if (static_cast<std::size_t>(data.num_classes()) != spec.num_classes())
        throw ConfigError("draw_split: scenario class count does not match dataset");
    const auto counts = data.class_counts();
    const std::size_t n = max_feasible_total(counts, spec);
    if (n < spec.num_classes()) throw DataError("draw_split: infeasible scenario (too few instances)");

    const double f = spec.train_fraction;
    const std::size_t classes = spec.num_classes();
    std::vector<double> train_targets(classes), test_targets(classes);
    for (std::size_t j = 0; j < classes; ++j) {
        train_targets[j] = static_cast<double>(n) * f * spec.train_dist[j];
        test_targets[j] = static_cast<double>(n) * (1.0 - f) * spec.test_dist[j];
    }
    auto train_counts = apportion(train_targets);
    auto test_counts = apportion(test_targets);

    // Rounding both sides up can exceed a tight class budget by one; pull the
    // bumped side back to its floor.
    for (std::size_t j = 0; j < classes; ++j) {
        while (train_counts[j] + test_counts[j] > counts[j]) {
            const double train_rem = train_targets[j] - std::floor(train_targets[j]);
            const double test_rem = test_targets[j] - std::floor(test_targets[j]);
            const bool train_bumped = train_counts[j] > static_cast<std::size_t>(std::floor(train_targets[j] + 1e-12));
            const bool test_bumped = test_counts[j] > static_cast<std::size_t>(std::floor(test_targets[j] + 1e-12));
            if (test_bumped && (!train_bumped || test_rem <= train_rem)) test_counts[j] -= 1;
            else if (train_bumped) train_counts[j] -= 1;
            else throw DataError("draw_split: internal rounding overflow");
        }
    }

    std::vector<std::vector<std::size_t>> per_class(classes);
    for (std::size_t i = 0; i < data.size(); ++i)
        per_class[static_cast<std::size_t>(data.labels[i])].push_back(i);

    DrawnSplit split;
    for (std::size_t j = 0; j < classes; ++j) {
        const std::size_t need = train_counts[j] + test_counts[j];
        if (need == 0) continue;
        Rng rng(mix_seed(spec.seed, j));
        partial_shuffle(per_class[j], need, rng);
        for (std::size_t i = 0; i < train_counts[j]; ++i)
            split.train_indices.push_back(per_class[j][i]);
        for (std::size_t i = train_counts[j]; i < need; ++i)
            split.test_indices.push_back(per_class[j][i]);
    }
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.test_indices.begin(), split.test_indices.end());

    const double train_total = std::max<double>(1.0, static_cast<double>(split.train_indices.size()));
    const double test_total = std::max<double>(1.0, static_cast<double>(split.test_indices.size()));
    split.realized_train_dist.resize(classes);
    split.realized_test_dist.resize(classes);
    for (std::size_t j = 0; j < classes; ++j) {
        split.realized_train_dist[j] = static_cast<double>(train_counts[j]) / train_total;
        split.realized_test_dist[j] = static_cast<double>(test_counts[j]) / test_total;
    }
    return split;
}

namespace {

constexpr double kTrainPositives[] = {0.05, 0.1, 0.3, 0.5, 0.7, 0.9};
constexpr double kTestPositives[] = {0.0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
constexpr double kTrainFractions[] = {0.1, 0.3, 0.5, 0.7};

} // namespace

std::vector<ScenarioSpec> binary_grid() {
    std::vector<ScenarioSpec> grid;
    grid.reserve(288);
    for (double pos_train : kTrainPositives)
        for (double pos_test : kTestPositives)
            for (double fraction : kTrainFractions) {
                ScenarioSpec spec;
                spec.train_dist = {pos_train, 1.0 - pos_train};
                spec.test_dist = {pos_test, 1.0 - pos_test};
                spec.train_fraction = fraction;
                grid.push_back(std::move(spec));
            }
    return grid;
}

std::vector<ScenarioSpec> multiclass_grid(int num_classes) {
    std::vector<std::vector<double>> trains, tests;
    switch (num_classes) {
        case 3:
            trains = {{0.2, 0.5, 0.3}, {0.05, 0.8, 0.15}, {0.35, 0.3, 0.35}};
            tests = {{0.1, 0.7, 0.2},
                     {0.55, 0.1, 0.35},
                     {0.35, 0.55, 0.1},
                     {0.4, 0.25, 0.35},
                     {0.0, 0.05, 0.95}};
            break;
        case 4:
            trains = {{0.5, 0.3, 0.1, 0.1}, {0.7, 0.1, 0.1, 0.1}, {0.25, 0.25, 0.25, 0.25}};
            tests = {{0.65, 0.25, 0.05, 0.05},
                     {0.2, 0.25, 0.3, 0.25},
                     {0.45, 0.15, 0.2, 0.2},
                     {0.2, 0.0, 0.0, 0.8},
                     {0.3, 0.25, 0.35, 0.1}};
            break;
        case 5:
            trains = {{0.05, 0.2, 0.1, 0.2, 0.45},
                      {0.05, 0.1, 0.7, 0.1, 0.05},
                      {0.2, 0.2, 0.2, 0.2, 0.2}};
            tests = {{0.15, 0.1, 0.65, 0.1, 0.0},
                     {0.45, 0.1, 0.3, 0.05, 0.1},
                     {0.2, 0.25, 0.25, 0.1, 0.2},
                     {0.35, 0.05, 0.05, 0.05, 0.5},
                     {0.05, 0.25, 0.15, 0.15, 0.4}};
            break;
        default:
            throw ConfigError("multiclass_grid: supported class counts are 3, 4 and 5");
    }
    std::vector<ScenarioSpec> grid;
    grid.reserve(trains.size() * tests.size() * 4);
    for (const auto& train : trains)
        for (const auto& test : tests)
            for (double fraction : kTrainFractions) {
                ScenarioSpec spec;
                spec.train_dist = train;
                spec.test_dist = test;
                spec.train_fraction = fraction;
                grid.push_back(std::move(spec));
            }
    return grid;
}

ShiftCategory shift_category(std::span<const double> train_dist, std::span<const double> test_dist,
                             ShiftMode mode) {
    if (train_dist.size() != test_dist.size())
        throw ConfigError("shift_category: distribution length mismatch");
    const double shift = l1_distance(train_dist, test_dist);
    if (mode == ShiftMode::Multiclass) return shift < 0.5 ? ShiftCategory::Minor : ShiftCategory::Major;
    if (shift < 0.4) return ShiftCategory::Minor;
    if (shift < 0.8) return ShiftCategory::Medium;
    return ShiftCategory::Major;
}

std::string to_string(ShiftCategory category) {
    switch (category) {
        case ShiftCategory::Minor: return "minor";
        case ShiftCategory::Medium: return "medium";
        case ShiftCategory::Major: return "major";
    }
    return "?";
}

} // namespace quant
