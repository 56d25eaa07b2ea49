#include "quant/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "quant/csv.hpp"

namespace quant {

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (int y : labels) counts[static_cast<std::size_t>(y)]++;
    return counts;
}

std::vector<double> Dataset::class_prevalence() const {
    auto counts = class_counts();
    std::vector<double> prev(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j)
        prev[j] = static_cast<double>(counts[j]) / static_cast<double>(size());
    return prev;
}

Dataset Dataset::subset(std::span<const std::size_t> indices, const std::string& subset_name) const {
    Dataset out;
    out.name = subset_name;
    out.schema = schema;
    out.class_names = class_names;
    out.features = Matrix(indices.size(), dim());
    out.labels.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t src = indices[i];
        for (std::size_t j = 0; j < dim(); ++j) out.features(i, j) = features(src, j);
        out.labels[i] = labels[src];
    }
    return out;
}

void Dataset::validate(bool require_all_classes) const {
    if (size() == 0) throw DataError("dataset '" + name + "' is empty");
    if (dim() == 0) throw DataError("dataset '" + name + "' has no features");
    if (num_classes() < 2) throw DataError("dataset '" + name + "' needs at least 2 classes");
    if (features.rows() != size() || features.cols() != dim())
        throw DataError("dataset '" + name + "' has inconsistent shapes");
    std::vector<bool> seen(class_names.size(), false);
    for (int y : labels) {
        if (y < 0 || y >= num_classes())
            throw DataError("dataset '" + name + "' has a label outside {0..L-1}");
        seen[static_cast<std::size_t>(y)] = true;
    }
    if (require_all_classes)
        for (std::size_t j = 0; j < seen.size(); ++j)
            if (!seen[j]) throw DataError("dataset '" + name + "' is missing class " + class_names[j]);
    for (std::size_t j = 0; j < dim(); ++j) {
        if (schema[j].kind != ColumnKind::Categorical) continue;
        for (std::size_t i = 0; i < size(); ++i) {
            const double v = features(i, j);
            if (v != std::floor(v) || v < 0.0 || v >= schema[j].cardinality)
                throw DataError("dataset '" + name + "': categorical column '" + schema[j].name +
                                "' holds a value outside its code range");
        }
    }
}

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::set<std::string>& categorical_columns) {
    auto records = csv::read_file(path);
    if (records.empty()) throw DataError("CSV file has no header row: " + path);
    const auto& header = records.front();

    std::size_t target_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == target_column) target_idx = j;
    if (target_idx == header.size()) throw DataError("missing target column '" + target_column + "'");

    for (const auto& c : categorical_columns) {
        if (c == target_column) continue;
        if (std::find(header.begin(), header.end(), c) == header.end())
            throw DataError("categorical column '" + c + "' not found in CSV header");
    }

    Dataset out;
    out.name = path;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == target_idx) continue;
        ColumnInfo info;
        info.name = header[j];
        info.kind = categorical_columns.count(header[j]) ? ColumnKind::Categorical
                                                         : ColumnKind::Continuous;
        out.schema.push_back(info);
    }

    std::vector<std::unordered_map<std::string, int>> code_maps(out.schema.size());
    std::unordered_map<std::string, int> label_map;
    std::vector<std::vector<double>> rows;

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() == 1 && rec[0].empty()) continue; // trailing blank line
        if (rec.size() != header.size())
            throw DataError("CSV row " + std::to_string(r + 1) + " has " + std::to_string(rec.size()) +
                            " fields, expected " + std::to_string(header.size()));
        bool missing = false;
        for (const auto& field : rec)
            if (field.empty()) missing = true;
        if (missing) continue;

        std::vector<double> row(out.schema.size());
        std::size_t col = 0;
        for (std::size_t j = 0; j < rec.size(); ++j) {
            if (j == target_idx) continue;
            if (out.schema[col].kind == ColumnKind::Categorical) {
                auto [it, inserted] =
                    code_maps[col].try_emplace(rec[j], static_cast<int>(code_maps[col].size()));
                row[col] = static_cast<double>(it->second);
            } else {
                std::size_t consumed = 0;
                double value = 0.0;
                try {
                    value = std::stod(rec[j], &consumed);
                } catch (const std::exception&) {
                    throw DataError("non-numeric value '" + rec[j] + "' in continuous column '" +
                                    out.schema[col].name + "'");
                }
                if (consumed != rec[j].size())
                    throw DataError("non-numeric value '" + rec[j] + "' in continuous column '" +
                                    out.schema[col].name + "'");
                row[col] = value;
            }
            ++col;
        }
        auto [it, inserted] = label_map.try_emplace(rec[target_idx], static_cast<int>(label_map.size()));
        out.labels.push_back(it->second);
        rows.push_back(std::move(row));
    }

    if (rows.empty()) throw DataError("dataset is empty after removing rows with missing values: " + path);

    out.class_names.resize(label_map.size());
    for (const auto& [key, code] : label_map) out.class_names[static_cast<std::size_t>(code)] = key;
    for (std::size_t j = 0; j < out.schema.size(); ++j)
        if (out.schema[j].kind == ColumnKind::Categorical)
            out.schema[j].cardinality = static_cast<int>(code_maps[j].size());

    out.features = Matrix(rows.size(), out.schema.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < out.schema.size(); ++j) out.features(i, j) = rows[i][j];

    out.validate();
    return out;
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream outf(path, std::ios::binary);
    if (!outf) throw DataError("cannot write file: " + path);
    std::vector<std::string> header;
    for (const auto& col : data.schema) header.push_back(col.name);
    header.push_back("target");
    outf << csv::join(header) << "\n";
    char buf[64];
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<std::string> fields;
        for (std::size_t j = 0; j < data.dim(); ++j) {
            if (data.schema[j].kind == ColumnKind::Categorical) {
                std::snprintf(buf, sizeof buf, "%d", static_cast<int>(data.features(i, j)));
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", data.features(i, j));
            }
            fields.emplace_back(buf);
        }
        fields.push_back(data.class_names[static_cast<std::size_t>(data.labels[i])]);
        outf << csv::join(fields) << "\n";
    }
}

std::size_t PreprocessPlan::output_width() const {
    std::size_t width = 0;
    for (const auto& col : columns) {
        switch (col.action) {
            case Column::Action::OneHot: width += static_cast<std::size_t>(col.one_hot_width); break;
            case Column::Action::Drop: break;
            default: width += 1; break;
        }
    }
    return width;
}

namespace {

// Interior cut points for b equal-frequency bins: the midpoint between the
// sorted values around rank n*k/b, deduplicated to stay strictly increasing.
std::vector<double> equal_frequency_edges(std::vector<double> values, int bins) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    std::vector<double> edges;
    for (int k = 1; k < bins; ++k) {
        const std::size_t rank = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(bins);
        if (rank == 0 || rank >= n) continue;
        const double edge = (values[rank - 1] + values[rank]) / 2.0;
        if (edges.empty() || edge > edges.back()) edges.push_back(edge);
    }
    return edges;
}

std::size_t bin_index(const std::vector<double>& edges, double value) {
    // first edge >= value keeps values at an edge in the lower bin; values
    // outside the train range clamp to the extreme bins automatically
    std::size_t idx = 0;
    while (idx < edges.size() && value > edges[idx]) ++idx;
    return idx;
}

} // namespace

PreprocessPlan fit_preprocess(const Dataset& train, bool bin_continuous, int bins_per_feature) {
    if (train.size() == 0) throw DataError("fit_preprocess: empty training data");
    if (bin_continuous && bins_per_feature < 2)
        throw ConfigError("fit_preprocess: bins_per_feature must be at least 2");

    PreprocessPlan plan;
    for (std::size_t j = 0; j < train.dim(); ++j) {
        PreprocessPlan::Column col;
        col.source_name = train.schema[j].name;
        col.source_kind = train.schema[j].kind;
        if (train.schema[j].kind == ColumnKind::Categorical) {
            col.one_hot_width = train.schema[j].cardinality;
            col.action = bin_continuous ? PreprocessPlan::Column::Action::Keep
                                        : PreprocessPlan::Column::Action::OneHot;
            plan.columns.push_back(col);
            continue;
        }

        std::vector<double> values(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) values[i] = train.features(i, j);

        if (bin_continuous) {
            col.action = PreprocessPlan::Column::Action::Bin;
            col.bin_edges = equal_frequency_edges(values, bins_per_feature);
            plan.columns.push_back(col);
            continue;
        }

        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        const double stddev = std::sqrt(var);
        if (stddev <= 0.0) {
            col.action = PreprocessPlan::Column::Action::Drop;
            plan.dropped_columns.push_back(col.source_name);
        } else {
            col.action = PreprocessPlan::Column::Action::Standardize;
            col.mean = mean;
            col.stddev = stddev;
        }
        plan.columns.push_back(col);
    }
    return plan;
}

namespace {

void check_schema(const PreprocessPlan& plan, const std::vector<ColumnInfo>& schema) {
    if (plan.columns.size() != schema.size())
        throw DataError("apply_preprocess: schema mismatch (column count)");
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (plan.columns[j].source_name != schema[j].name ||
            plan.columns[j].source_kind != schema[j].kind)
            throw DataError("apply_preprocess: schema mismatch at column '" + schema[j].name + "'");
    }
}

} // namespace

Matrix apply_preprocess(const PreprocessPlan& plan, const Matrix& features) {
    if (features.cols() != plan.columns.size())
        throw DataError("apply_preprocess: feature width does not match plan");
    Matrix out(features.rows(), plan.output_width());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        std::size_t o = 0;
        for (std::size_t j = 0; j < plan.columns.size(); ++j) {
            const auto& col = plan.columns[j];
            const double v = features(i, j);
            switch (col.action) {
                case PreprocessPlan::Column::Action::Standardize:
                    out(i, o++) = (v - col.mean) / col.stddev;
                    break;
                case PreprocessPlan::Column::Action::OneHot: {
                    int code = static_cast<int>(v);
                    code = std::clamp(code, 0, col.one_hot_width - 1);
                    for (int w = 0; w < col.one_hot_width; ++w) out(i, o++) = (w == code) ? 1.0 : 0.0;
                    break;
                }
                case PreprocessPlan::Column::Action::Bin:
                    out(i, o++) = static_cast<double>(bin_index(col.bin_edges, v));
                    break;
                case PreprocessPlan::Column::Action::Keep:
                    out(i, o++) = std::clamp(v, 0.0, static_cast<double>(col.one_hot_width - 1));
                    break;
                case PreprocessPlan::Column::Action::Drop:
                    break;
            }
        }
    }
    return out;
}

Dataset apply_preprocess(const PreprocessPlan& plan, const Dataset& data) {
    check_schema(plan, data.schema);
    Dataset out;
    out.name = data.name;
    out.labels = data.labels;
    out.class_names = data.class_names;
    out.features = apply_preprocess(plan, data.features);
    for (const auto& col : plan.columns) {
        switch (col.action) {
            case PreprocessPlan::Column::Action::Standardize:
                out.schema.push_back({col.source_name, ColumnKind::Continuous, 0});
                break;
            case PreprocessPlan::Column::Action::OneHot:
                for (int w = 0; w < col.one_hot_width; ++w)
                    out.schema.push_back({col.source_name + "=" + std::to_string(w),
                                          ColumnKind::Continuous, 0});
                break;
            case PreprocessPlan::Column::Action::Bin:
                out.schema.push_back({col.source_name, ColumnKind::Categorical,
                                      static_cast<int>(col.bin_edges.size()) + 1});
                break;
            case PreprocessPlan::Column::Action::Keep:
                out.schema.push_back({col.source_name, ColumnKind::Categorical, col.one_hot_width});
                break;
            case PreprocessPlan::Column::Action::Drop:
                break;
        }
    }
    return out;
}

Dataset synth_gaussian(const std::vector<std::size_t>& n_per_class, const Matrix& means,
                       double stddev, std::uint64_t seed, const std::string& name) {
    const std::size_t classes = n_per_class.size();
    if (classes < 2) throw ConfigError("synth_gaussian: need at least 2 classes");
    if (means.rows() != classes)
        throw ConfigError("synth_gaussian: means must have one row per class");
    if (stddev <= 0.0) throw ConfigError("synth_gaussian: stddev must be positive");
    for (std::size_t c = 0; c < classes; ++c)
        if (n_per_class[c] == 0)
            throw ConfigError("synth_gaussian: class " + std::to_string(c) + " has zero instances");

    const std::size_t dim = means.cols();
    std::size_t total = 0;
    for (std::size_t n : n_per_class) total += n;

    Dataset out;
    out.name = name;
    out.features = Matrix(total, dim);
    out.labels.resize(total);
    for (std::size_t j = 0; j < dim; ++j)
        out.schema.push_back({"x" + std::to_string(j), ColumnKind::Continuous, 0});
    for (std::size_t c = 0; c < classes; ++c) out.class_names.push_back("c" + std::to_string(c));

    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        Rng rng(mix_seed(seed, c));
        for (std::size_t i = 0; i < n_per_class[c]; ++i, ++row) {
            for (std::size_t j = 0; j < dim; ++j)
                out.features(row, j) = means(c, j) + stddev * rng.next_normal();
            out.labels[row] = static_cast<int>(c);
        }
    }
    out.validate();
    return out;
}

} // namespace quant
