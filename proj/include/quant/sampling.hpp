#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "quant/dataset.hpp"

namespace quant {

/// One evaluation cell: requested train/test class distributions, the
/// train fraction of the drawn instances, and the draw seed.
struct ScenarioSpec {
    std::vector<double> train_dist;
    std::vector<double> test_dist;
    double train_fraction = 0.5;
    std::uint64_t seed = 0;

    std::size_t num_classes() const { return train_dist.size(); }
    void validate() const;
};

struct DrawnSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::vector<double> realized_train_dist;
    std::vector<double> realized_test_dist;
};

/// Largest total n such that every class j can supply
/// n * (f * train_dist_j + (1-f) * test_dist_j) instances.
std::size_t max_feasible_total(const std::vector<std::size_t>& class_counts,
                               const ScenarioSpec& spec);

/// Undersamples the dataset to realize the requested distributions. Per-class
/// counts come from largest-remainder rounding of the feasible total; sampling
/// is uniform without replacement and fully determined by spec.seed.
DrawnSplit draw_split(const Dataset& data, const ScenarioSpec& spec);

/// The 6 x 12 x 4 binary evaluation grid (288 scenarios, seed left at 0).
std::vector<ScenarioSpec> binary_grid();

/// The fixed 3 x 5 distribution pairs per class count L in {3,4,5}, crossed
/// with the four splits (60 scenarios).
std::vector<ScenarioSpec> multiclass_grid(int num_classes);

enum class ShiftMode { Binary, Multiclass };
enum class ShiftCategory { Minor, Medium, Major };

/// Binary: minor < 0.4 <= medium < 0.8 <= major (L1 distance).
/// Multiclass: minor < 0.5 <= major.
ShiftCategory shift_category(std::span<const double> train_dist, std::span<const double> test_dist,
                             ShiftMode mode);

std::string to_string(ShiftCategory category);

} // namespace quant
