#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "quant/common.hpp"

namespace quant {

enum class ColumnKind { Continuous, Categorical };

struct ColumnInfo {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    int cardinality = 0; // categorical columns hold integer codes in [0, cardinality)
};

/// A labeled dataset: N x D feature matrix, dense class indices in
/// {0..L-1}, and a per-column schema describing which columns are
/// categorical codes.
struct Dataset {
    std::string name;
    Matrix features;
    std::vector<int> labels;
    std::vector<ColumnInfo> schema;
    std::vector<std::string> class_names;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return schema.size(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }

    std::vector<std::size_t> class_counts() const;
    std::vector<double> class_prevalence() const;

    Dataset subset(std::span<const std::size_t> indices, const std::string& subset_name) const;

    /// Checks the structural invariants (label range, schema consistency).
    /// `require_all_classes` additionally demands every class index appears.
    void validate(bool require_all_classes = true) const;
};

/// Loads a CSV with a header row. Rows containing empty cells are removed,
/// target labels are recoded to dense indices by first appearance, and
/// columns named in `categorical_columns` are recoded the same way.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::set<std::string>& categorical_columns);

/// Writes a dataset back to CSV; load_csv(write_csv(d)) round-trips features
/// to text precision and labels exactly.
void write_csv(const Dataset& data, const std::string& path);

/// Per-column preprocessing recipe fitted on training data only.
struct PreprocessPlan {
    struct Column {
        enum class Action { Standardize, OneHot, Bin, Keep, Drop };
        Action action = Action::Standardize;
        std::string source_name;
        ColumnKind source_kind = ColumnKind::Continuous;
        double mean = 0.0;
        double stddev = 1.0;
        int one_hot_width = 0;
        std::vector<double> bin_edges; // strictly increasing interior edges
    };

    std::vector<Column> columns;
    std::vector<std::string> dropped_columns; // constant continuous columns

    std::size_t output_width() const;
};

/// bin_continuous = false: standardize continuous columns (constant ones are
/// dropped and recorded) and one-hot encode categorical columns.
/// bin_continuous = true: replace continuous columns by equal-frequency bin
/// codes and keep categorical columns as codes.
PreprocessPlan fit_preprocess(const Dataset& train, bool bin_continuous, int bins_per_feature = 10);

/// Deterministic transform; out-of-range values clamp to the extreme bins.
Dataset apply_preprocess(const PreprocessPlan& plan, const Dataset& data);

/// Applies the plan to a bare feature matrix that conforms to the plan's
/// source schema (used for test-side features).
Matrix apply_preprocess(const PreprocessPlan& plan, const Matrix& features);

/// Isotropic Gaussian blobs, one per class; deterministic given the seed.
Dataset synth_gaussian(const std::vector<std::size_t>& n_per_class, const Matrix& means,
                       double stddev, std::uint64_t seed, const std::string& name = "synthetic");

} // namespace quant
