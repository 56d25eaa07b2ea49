#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "quant/metrics.hpp"
#include "quant/quantify.hpp"
#include "quant/sampling.hpp"

namespace quant {

struct CsvSource {
    std::string name;
    std::string path;
    std::string target_column;
    std::set<std::string> categorical_columns;
};

struct SyntheticSource {
    std::string name;
    std::vector<std::size_t> n_per_class;
    Matrix means;
    double stddev = 1.0;
    std::uint64_t seed = 0;
};

using DatasetSource = std::variant<CsvSource, SyntheticSource>;

enum class GridKind { Binary, Multiclass, Custom };

struct MethodConfig {
    std::string id;
    QuantifierSpec spec;
};

struct RunConfig {
    std::vector<DatasetSource> datasets;
    std::vector<MethodConfig> methods;
    GridKind grid = GridKind::Binary;
    std::vector<ScenarioSpec> custom_scenarios;
    std::vector<std::uint64_t> seeds; // defaults to the ten fixed seeds 1..10
    std::string output_dir = "out";
    int cv_folds = 10;
    int bins_per_feature = 10;
    std::size_t workers = 0; // 0 = hardware concurrency
    bool record_timing = true;

    void validate() const;
};

/// Parses the JSON run-config file. QUANTBENCH_OUT overrides the output
/// directory (the only environment override).
RunConfig load_run_config(const std::string& path);

struct ResultRecord {
    std::string dataset;
    std::string train_dist;
    std::string test_dist;
    double train_fraction = 0.0;
    std::uint64_t seed = 0;
    std::string shift;
    std::string method;
    std::string estimate;  // semicolon-joined, 6 fractional digits
    std::string true_dist; // realized test distribution
    double ae = 0.0;
    double nkld = 0.0;
    double wall_time_ms = 0.0;
    bool clipped = false;
    bool non_converged = false;
    bool fallback = false;
    std::uint64_t scores_hash = 0;
    std::string status = "ok"; // ok | skipped
    std::string reason;
};

struct RunSummary {
    std::size_t completed_cells = 0;
    std::size_t skipped_cells = 0;
    std::size_t rows = 0;
    std::string results_path;
};

/// Executes the full cross product dataset x scenario x seed, running every
/// configured method on the same draw and shared classifier artifacts.
/// Deterministic given the config and resumable: finished cells recorded in a
/// sidecar index are not recomputed, and the final file is written in
/// canonical order regardless of worker count.
RunSummary run(const RunConfig& config);

enum class ErrorMetric { AE, NKLD };

struct AggregateFilter {
    std::optional<ShiftCategory> shift;
    std::optional<double> train_fraction;
};

/// Mean error per (dataset, method) under the filter, ranked and tested.
/// Datasets missing any method under the filter are dropped with a warning
/// collected into `warnings`.
RankReport aggregate(const std::string& results_path, ErrorMetric metric,
                     const AggregateFilter& filter, std::vector<std::string>* warnings = nullptr);

std::string format_distribution(std::span<const double> values);
std::vector<double> parse_distribution(const std::string& text);

/// Fixed result-file header, exposed for tests.
extern const char* const kResultHeader;

} // namespace quant
