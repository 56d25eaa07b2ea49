#include "quant/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "quant/csv.hpp"

namespace quant {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
    if (datasets.empty()) throw ConfigError("run config: no datasets");
    if (methods.empty()) throw ConfigError("run config: no methods");
    if (seeds.empty()) throw ConfigError("run config: seed list is empty");
    if (grid == GridKind::Custom && custom_scenarios.empty())
        throw ConfigError("run config: custom grid without scenarios");
    if (cv_folds < 2) throw ConfigError("run config: cv_folds must be >= 2");
    if (output_dir.empty()) throw ConfigError("run config: output_dir is empty");
}

namespace {

std::vector<std::uint64_t> default_seeds() {
    return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
}

// Per-method hyperparameters; the classifier is configured globally so every
// method of a draw shares one fitted artifact.
QuantifierSpec spec_from_json(const std::string& id, const json& body, const RunConfig& config) {
    QuantifierSpec spec;
    spec.method = method_from_id(id);
    spec.dys_bins = body.value("dys_bins", 10);
    spec.fmm_bins = body.value("fmm_bins", 100);
    spec.readme_subsets = body.value("readme_subsets", 50);
    spec.readme_cell_cap = body.value("readme_cell_cap", 4096);
    spec.ms_denominator_floor = body.value("ms_denominator_floor", 0.25);
    spec.pwk_neighbors = body.value("k", 10);
    spec.pwk_alpha = body.value("alpha", 1.0);
    spec.iteration.epsilon = body.value("epsilon", 1e-6);
    spec.iteration.max_iterations = body.value("iteration_limit", std::size_t{1000});
    const std::string strategy = body.value("strategy", "auto");
    if (strategy == "auto") spec.strategy = MulticlassStrategy::Auto;
    else if (strategy == "native") spec.strategy = MulticlassStrategy::Native;
    else if (strategy == "ovr") spec.strategy = MulticlassStrategy::OneVsRest;
    else throw ConfigError("run config: unknown multiclass strategy '" + strategy + "'");
    (void)config;
    return spec;
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run config: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config is not valid JSON: ") + e.what());
    }

    RunConfig config;
    try {
        config.output_dir = doc.value("output_dir", std::string("out"));
        if (const char* env = std::getenv("QUANTBENCH_OUT"); env && *env) config.output_dir = env;

        if (doc.contains("seeds")) config.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
        else config.seeds = default_seeds();

        config.cv_folds = doc.value("cv_folds", 10);
        config.bins_per_feature = doc.value("bins_per_feature", 10);
        config.workers = doc.value("workers", std::size_t{0});
        config.record_timing = doc.value("record_timing", true);

        const json grid = doc.value("grid", json{{"kind", "binary"}});
        const std::string kind = grid.value("kind", "binary");
        if (kind == "binary") config.grid = GridKind::Binary;
        else if (kind == "multiclass") config.grid = GridKind::Multiclass;
        else if (kind == "custom") {
            config.grid = GridKind::Custom;
            for (const auto& s : grid.at("scenarios")) {
                ScenarioSpec spec;
                spec.train_dist = s.at("train_dist").get<std::vector<double>>();
                spec.test_dist = s.at("test_dist").get<std::vector<double>>();
                spec.train_fraction = s.at("train_fraction").get<double>();
                spec.validate();
                config.custom_scenarios.push_back(std::move(spec));
            }
        } else {
            throw ConfigError("run config: unknown grid kind '" + kind + "'");
        }

        ClassifierConfig classifier_defaults;
        if (doc.contains("classifier")) {
            const auto& c = doc["classifier"];
            classifier_defaults.regularization_weight = c.value("regularization_weight", 1.0);
            classifier_defaults.max_iterations = c.value("max_iterations", std::size_t{1000});
            classifier_defaults.convergence_tolerance = c.value("tolerance", 1e-6);
        }

        for (const auto& m : doc.at("methods")) {
            MethodConfig mc;
            if (m.is_string()) {
                mc.id = m.get<std::string>();
                mc.spec = spec_from_json(mc.id, json::object(), config);
            } else {
                mc.id = m.at("id").get<std::string>();
                mc.spec = spec_from_json(mc.id, m, config);
            }
            mc.spec.classifier.regularization_weight = classifier_defaults.regularization_weight;
            mc.spec.classifier.max_iterations = classifier_defaults.max_iterations;
            mc.spec.classifier.convergence_tolerance = classifier_defaults.convergence_tolerance;
            config.methods.push_back(std::move(mc));
        }

        for (const auto& d : doc.at("datasets")) {
            const std::string type = d.value("type", "csv");
            if (type == "csv") {
                CsvSource src;
                src.path = d.at("path").get<std::string>();
                src.name = d.value("name", src.path);
                src.target_column = d.at("target").get<std::string>();
                if (d.contains("categorical"))
                    for (const auto& c : d["categorical"]) src.categorical_columns.insert(c.get<std::string>());
                config.datasets.emplace_back(std::move(src));
            } else if (type == "synthetic") {
                SyntheticSource src;
                src.name = d.at("name").get<std::string>();
                src.n_per_class = d.at("n_per_class").get<std::vector<std::size_t>>();
                const auto rows = d.at("means").get<std::vector<std::vector<double>>>();
                if (rows.empty()) throw ConfigError("run config: synthetic means must be non-empty");
                src.means = Matrix(rows.size(), rows.front().size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (rows[i].size() != src.means.cols())
                        throw ConfigError("run config: ragged synthetic means");
                    for (std::size_t j = 0; j < rows[i].size(); ++j) src.means(i, j) = rows[i][j];
                }
                src.stddev = d.value("stddev", 1.0);
                src.seed = d.value("seed", std::uint64_t{0});
                config.datasets.emplace_back(std::move(src));
            } else {
                throw ConfigError("run config: unknown dataset type '" + type + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }

    config.validate();
    return config;
}

std::string format_distribution(std::span<const double> values) {
    std::ostringstream os;
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) os << ';';
        std::snprintf(buf, sizeof buf, "%.6f", values[i]);
        os << buf;
    }
    return os.str();
}

std::vector<double> parse_distribution(const std::string& text) {
    std::vector<double> out;
    std::string token;
    std::istringstream is(text);
    while (std::getline(is, token, ';')) out.push_back(std::stod(token));
    return out;
}

const char* const kResultHeader =
    "dataset,train_dist,test_dist,train_fraction,seed,shift_category,method,estimate,true_dist,"
    "ae,nkld,wall_time_ms,clipped,non_converged,fallback,scores_hash,status,reason";

namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string record_to_line(const ResultRecord& r) {
    std::vector<std::string> fields;
    fields.push_back(r.dataset);
    fields.push_back(r.train_dist);
    fields.push_back(r.test_dist);
    char frac[16];
    std::snprintf(frac, sizeof frac, "%.2f", r.train_fraction);
    fields.emplace_back(frac);
    fields.push_back(std::to_string(r.seed));
    fields.push_back(r.shift);
    fields.push_back(r.method);
    fields.push_back(r.estimate);
    fields.push_back(r.true_dist);
    fields.push_back(r.status == "ok" ? format_number(r.ae) : "");
    fields.push_back(r.status == "ok" ? format_number(r.nkld) : "");
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.wall_time_ms);
    fields.emplace_back(ms);
    fields.push_back(r.clipped ? "1" : "0");
    fields.push_back(r.non_converged ? "1" : "0");
    fields.push_back(r.fallback ? "1" : "0");
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.scores_hash));
    fields.emplace_back(hash);
    fields.push_back(r.status);
    fields.push_back(r.reason);
    return csv::join(fields);
}

ResultRecord record_from_fields(const std::vector<std::string>& f) {
    if (f.size() != 18) throw DataError("results file: malformed row");
    ResultRecord r;
    r.dataset = f[0];
    r.train_dist = f[1];
    r.test_dist = f[2];
    r.train_fraction = std::stod(f[3]);
    r.seed = std::stoull(f[4]);
    r.shift = f[5];
    r.method = f[6];
    r.estimate = f[7];
    r.true_dist = f[8];
    r.ae = f[9].empty() ? 0.0 : std::stod(f[9]);
    r.nkld = f[10].empty() ? 0.0 : std::stod(f[10]);
    r.wall_time_ms = std::stod(f[11]);
    r.clipped = f[12] == "1";
    r.non_converged = f[13] == "1";
    r.fallback = f[14] == "1";
    r.scores_hash = std::stoull(f[15], nullptr, 16);
    r.status = f[16];
    r.reason = f[17];
    return r;
}

struct LoadedDataset {
    std::string name;
    Dataset raw;
    std::vector<ScenarioSpec> scenarios;
};

struct WorkUnit {
    std::size_t dataset_index = 0;
    std::size_t scenario_index = 0;
    std::size_t seed_index = 0;
};

std::string cell_key(const std::string& dataset, const std::string& train_dist,
                     const std::string& test_dist, double train_fraction, std::uint64_t seed) {
    char frac[16];
    std::snprintf(frac, sizeof frac, "%.2f", train_fraction);
    std::ostringstream os;
    os << dataset << '|' << train_dist << '|' << test_dist << '|' << frac << '|' << seed;
    return os.str();
}

Dataset materialize(const DatasetSource& source) {
    if (std::holds_alternative<CsvSource>(source)) {
        const auto& src = std::get<CsvSource>(source);
        Dataset data = load_csv(src.path, src.target_column, src.categorical_columns);
        data.name = src.name;
        return data;
    }
    const auto& src = std::get<SyntheticSource>(source);
    return synth_gaussian(src.n_per_class, src.means, src.stddev, src.seed, src.name);
}

} // namespace

RunSummary run(const RunConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);
    const std::string results_path = (fs::path(config.output_dir) / "results.csv").string();
    const std::string partial_path = results_path + ".partial";
    const std::string done_path = results_path + ".done";

    // materialize datasets and their scenario grids
    std::vector<LoadedDataset> datasets;
    for (const auto& source : config.datasets) {
        LoadedDataset entry;
        entry.raw = materialize(source);
        entry.name = entry.raw.name;
        switch (config.grid) {
            case GridKind::Binary:
                if (entry.raw.num_classes() != 2)
                    throw ConfigError("dataset '" + entry.name + "' is not binary but the binary grid was requested");
                entry.scenarios = binary_grid();
                break;
            case GridKind::Multiclass:
                entry.scenarios = multiclass_grid(entry.raw.num_classes());
                break;
            case GridKind::Custom:
                for (const auto& s : config.custom_scenarios) {
                    if (s.num_classes() != static_cast<std::size_t>(entry.raw.num_classes()))
                        throw ConfigError("custom scenario class count does not match dataset '" + entry.name + "'");
                    entry.scenarios.push_back(s);
                }
                break;
        }
        datasets.push_back(std::move(entry));
    }

    const bool any_binned = std::any_of(config.methods.begin(), config.methods.end(), [](const auto& m) {
        return method_traits(m.spec.method).needs_binned;
    });

    // Resume support: only rows of cells present in the done index are kept,
    // preserving their exact line bytes; incomplete cells are recomputed.
    struct StoredRecord {
        ResultRecord record;
        std::string line;
    };
    std::unordered_set<std::string> done;
    std::vector<StoredRecord> records;
    if (fs::exists(done_path) && fs::exists(partial_path)) {
        std::ifstream din(done_path);
        std::string line;
        while (std::getline(din, line))
            if (!line.empty()) done.insert(line);
        auto rows = csv::read_file(partial_path);
        for (const auto& row : rows) {
            if (row.size() != 18) continue;
            ResultRecord r = record_from_fields(row);
            if (done.count(cell_key(r.dataset, r.train_dist, r.test_dist, r.train_fraction, r.seed)))
                records.push_back({std::move(r), csv::join(row)});
        }
    }

    std::vector<WorkUnit> units;
    for (std::size_t d = 0; d < datasets.size(); ++d)
        for (std::size_t s = 0; s < datasets[d].scenarios.size(); ++s)
            for (std::size_t k = 0; k < config.seeds.size(); ++k) units.push_back({d, s, k});

    std::ofstream partial_out(partial_path, std::ios::app);
    std::ofstream done_out(done_path, std::ios::app);
    if (!partial_out || !done_out) throw DataError("cannot write into output directory " + config.output_dir);

    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> skipped_cells{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto process_unit = [&](const WorkUnit& unit) {
        const auto& data = datasets[unit.dataset_index];
        ScenarioSpec scenario = data.scenarios[unit.scenario_index];
        scenario.seed = config.seeds[unit.seed_index];
        const std::string key = cell_key(data.name, format_distribution(scenario.train_dist),
                                         format_distribution(scenario.test_dist),
                                         scenario.train_fraction, scenario.seed);
        {
            std::lock_guard<std::mutex> lock(sink_mutex);
            if (done.count(key)) return;
        }

        const ShiftMode mode = data.raw.num_classes() == 2 ? ShiftMode::Binary : ShiftMode::Multiclass;
        ResultRecord base;
        base.dataset = data.name;
        base.train_dist = format_distribution(scenario.train_dist);
        base.test_dist = format_distribution(scenario.test_dist);
        base.train_fraction = scenario.train_fraction;
        base.seed = scenario.seed;
        base.shift = to_string(shift_category(scenario.train_dist, scenario.test_dist, mode));

        std::vector<ResultRecord> cell_records;
        try {
            DrawnSplit split = draw_split(data.raw, scenario);
            if (split.train_indices.size() < static_cast<std::size_t>(data.raw.num_classes()) ||
                split.test_indices.empty())
                throw DataError("degenerate split");
            Dataset train_raw = data.raw.subset(split.train_indices, data.name + ":train");
            Dataset test_raw = data.raw.subset(split.test_indices, data.name + ":test");

            // preprocessing is fitted on the train side only
            PreprocessPlan std_plan = fit_preprocess(train_raw, false, config.bins_per_feature);
            Dataset train_std = apply_preprocess(std_plan, train_raw);
            Matrix test_std = apply_preprocess(std_plan, test_raw.features);

            std::optional<Dataset> train_bin;
            std::optional<Matrix> test_bin;
            if (any_binned) {
                PreprocessPlan bin_plan = fit_preprocess(train_raw, true, config.bins_per_feature);
                train_bin = apply_preprocess(bin_plan, train_raw);
                test_bin = apply_preprocess(bin_plan, test_raw.features);
            }

            std::vector<double> truth(static_cast<std::size_t>(data.raw.num_classes()), 0.0);
            for (int y : test_raw.labels) truth[static_cast<std::size_t>(y)] += 1.0;
            for (double& v : truth) v /= static_cast<double>(test_raw.labels.size());
            const std::string truth_text = format_distribution(truth);
            const std::vector<double> truth_rounded = parse_distribution(truth_text);

            DrawContext context(train_std, std::move(test_std), train_bin ? &*train_bin : nullptr,
                                test_bin ? &*test_bin : nullptr, config.methods.front().spec.classifier,
                                config.cv_folds, scenario.seed);

            for (const auto& method : config.methods) {
                ResultRecord record = base;
                record.method = method.id;
                context.reset_consumed_hash();
                const auto started = std::chrono::steady_clock::now();
                try {
                    QuantifyResult result = quantify(method.spec, context);
                    const auto elapsed = std::chrono::steady_clock::now() - started;
                    record.estimate = format_distribution(result.estimate.values);
                    record.true_dist = truth_text;
                    const std::vector<double> estimate_rounded = parse_distribution(record.estimate);
                    record.ae = absolute_error(truth_rounded, estimate_rounded);
                    record.nkld = nkld(truth_rounded, estimate_rounded);
                    record.wall_time_ms = config.record_timing
                        ? std::chrono::duration<double, std::milli>(elapsed).count()
                        : 0.0;
                    record.clipped = result.flags.clipped;
                    record.non_converged = result.flags.non_converged;
                    record.fallback = result.flags.fallback;
                    record.scores_hash = context.consumed_hash();
                } catch (const std::exception& e) {
                    record.status = "skipped";
                    record.reason = e.what();
                    skipped_cells.fetch_add(1);
                }
                cell_records.push_back(std::move(record));
            }
        } catch (const std::exception& e) {
            ResultRecord record = base;
            record.method = "-";
            record.status = "skipped";
            record.reason = e.what();
            cell_records.push_back(std::move(record));
            skipped_cells.fetch_add(1);
        }

        std::lock_guard<std::mutex> lock(sink_mutex);
        for (auto& record : cell_records) {
            std::string line = record_to_line(record);
            partial_out << line << "\n";
            records.push_back({std::move(record), std::move(line)});
        }
        partial_out.flush();
        done_out << key << "\n";
        done_out.flush();
        done.insert(key);
    };

    std::size_t worker_count = config.workers > 0 ? config.workers
                                                  : std::max(1u, std::thread::hardware_concurrency());
    worker_count = std::min(worker_count, units.size() > 0 ? units.size() : std::size_t{1});
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= units.size()) return;
                try {
                    process_unit(units[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);

    // canonical order: dataset, scenario, seed, then configured method order
    auto method_rank = [&](const std::string& id) {
        for (std::size_t i = 0; i < config.methods.size(); ++i)
            if (config.methods[i].id == id) return i;
        return config.methods.size();
    };
    auto dataset_rank = [&](const std::string& name) {
        for (std::size_t i = 0; i < datasets.size(); ++i)
            if (datasets[i].name == name) return i;
        return datasets.size();
    };
    std::stable_sort(records.begin(), records.end(), [&](const StoredRecord& a, const StoredRecord& b) {
        return std::tuple(dataset_rank(a.record.dataset), a.record.train_dist, a.record.test_dist,
                          a.record.train_fraction, a.record.seed, method_rank(a.record.method)) <
               std::tuple(dataset_rank(b.record.dataset), b.record.train_dist, b.record.test_dist,
                          b.record.train_fraction, b.record.seed, method_rank(b.record.method));
    });

    std::ofstream final_out(results_path, std::ios::binary | std::ios::trunc);
    final_out << kResultHeader << "\n";
    for (const auto& record : records) final_out << record.line << "\n";
    final_out.close();

    RunSummary summary;
    summary.completed_cells = done.size();
    summary.skipped_cells = skipped_cells.load();
    summary.rows = records.size();
    summary.results_path = results_path;
    return summary;
}

RankReport aggregate(const std::string& results_path, ErrorMetric metric,
                     const AggregateFilter& filter, std::vector<std::string>* warnings) {
    auto rows = csv::read_file(results_path);
    if (rows.empty()) throw DataError("results file is empty: " + results_path);
    if (csv::join(rows.front()) != kResultHeader)
        throw DataError("results file has an unexpected header: " + results_path);

    struct Accumulator {
        double total = 0.0;
        std::size_t count = 0;
    };
    std::vector<std::string> datasets, methods;
    std::map<std::pair<std::string, std::string>, Accumulator> cells;

    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() == 1 && rows[i][0].empty()) continue;
        ResultRecord r = record_from_fields(rows[i]);
        if (r.status != "ok") continue;
        if (filter.shift && to_string(*filter.shift) != r.shift) continue;
        if (filter.train_fraction && std::abs(*filter.train_fraction - r.train_fraction) > 1e-9) continue;
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end())
            datasets.push_back(r.dataset);
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);
        auto& acc = cells[{r.dataset, r.method}];
        acc.total += metric == ErrorMetric::AE ? r.ae : r.nkld;
        acc.count += 1;
    }
    if (datasets.empty() || methods.empty())
        throw DataError("aggregate: no rows match the filter");

    // drop datasets that miss any method under the filter
    std::vector<std::string> kept;
    for (const auto& d : datasets) {
        bool complete = true;
        for (const auto& m : methods)
            if (!cells.count({d, m})) complete = false;
        if (complete) kept.push_back(d);
        else if (warnings)
            warnings->push_back("dataset '" + d + "' dropped from ranking: missing methods under filter");
    }
    if (kept.empty()) throw DataError("aggregate: no dataset covers every method under the filter");

    RankReport report;
    report.methods = methods;
    report.datasets = kept;
    report.mean_errors = Matrix(kept.size(), methods.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = 0; j < methods.size(); ++j) {
            const auto& acc = cells.at({kept[i], methods[j]});
            report.mean_errors(i, j) = acc.total / static_cast<double>(acc.count);
        }
    report.ranks = rank_methods(report.mean_errors);
    report.average_ranks.assign(methods.size(), 0.0);
    for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = 0; j < methods.size(); ++j) report.average_ranks[j] += report.ranks(i, j);
    for (double& v : report.average_ranks) v /= static_cast<double>(kept.size());
    if (kept.size() >= 2) report.friedman = friedman_test(report.ranks);
    if (methods.size() >= 2 && methods.size() <= 30) {
        report.critical_difference = nemenyi_cd(static_cast<int>(methods.size()),
                                                static_cast<int>(kept.size()), 0.05);
        report.groups = significance_groups(report.average_ranks, report.critical_difference);
    }
    return report;
}

} // namespace quant
