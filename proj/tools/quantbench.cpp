#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "quant/oracles.hpp"
#include "quant/runner.hpp"
#include "quant/simplex.hpp"

namespace {

namespace fs = std::filesystem;

int cmd_run(const std::string& config_path) {
    quant::RunConfig config = quant::load_run_config(config_path);
    quant::RunSummary summary = quant::run(config);
    std::cout << "results: " << summary.results_path << "\n"
              << "cells completed: " << summary.completed_cells << "\n"
              << "rows written: " << summary.rows << "\n"
              << "skips: " << summary.skipped_cells << "\n";
    return summary.skipped_cells > 0 ? 3 : 0;
}

quant::AggregateFilter make_filter(const std::string& shift, double split) {
    quant::AggregateFilter filter;
    if (shift == "minor") filter.shift = quant::ShiftCategory::Minor;
    else if (shift == "medium") filter.shift = quant::ShiftCategory::Medium;
    else if (shift == "major") filter.shift = quant::ShiftCategory::Major;
    else if (!shift.empty()) throw quant::ConfigError("unknown shift filter '" + shift + "'");
    if (split > 0.0) filter.train_fraction = split;
    return filter;
}

int cmd_aggregate(const std::string& results, const std::string& metric_name,
                  const std::string& shift, double split) {
    const auto metric = metric_name == "nkld" ? quant::ErrorMetric::NKLD : quant::ErrorMetric::AE;
    if (metric_name != "ae" && metric_name != "nkld")
        throw quant::ConfigError("metric must be 'ae' or 'nkld'");
    std::vector<std::string> warnings;
    quant::RankReport report = quant::aggregate(results, metric, make_filter(shift, split), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << report.to_markdown();
    return 0;
}

int cmd_report(const std::string& results, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::string> warnings;
    for (const auto& [metric, tag] :
         {std::pair{quant::ErrorMetric::AE, "ae"}, std::pair{quant::ErrorMetric::NKLD, "nkld"}}) {
        quant::RankReport report = quant::aggregate(results, metric, {}, &warnings);
        std::ofstream md(fs::path(out_dir) / (std::string("report_") + tag + ".md"));
        md << report.to_markdown();
        std::ofstream csv_out(fs::path(out_dir) / (std::string("ranks_") + tag + ".csv"));
        csv_out << report.to_csv();
        std::ofstream cd(fs::path(out_dir) / (std::string("cd_") + tag + ".csv"));
        cd << report.to_cd_data();
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "report written to " << out_dir << "\n";
    return 0;
}

int cmd_grid(const std::string& kind, int classes) {
    std::vector<quant::ScenarioSpec> grid;
    if (kind == "binary") grid = quant::binary_grid();
    else if (kind == "multiclass") grid = quant::multiclass_grid(classes);
    else throw quant::ConfigError("grid kind must be 'binary' or 'multiclass'");
    std::cout << "train_dist,test_dist,train_fraction\n";
    for (const auto& spec : grid)
        std::cout << quant::format_distribution(spec.train_dist) << ','
                  << quant::format_distribution(spec.test_dist) << ',' << spec.train_fraction << "\n";
    std::cerr << grid.size() << " scenarios\n";
    return 0;
}

void write_fixture(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

int cmd_fixtures(const std::string& out_dir) {
    fs::create_directories(out_dir);

    // expected classify-and-count outputs over a small parameter sweep
    {
        std::string content = "p,tpr,fpr,expected_ppos\n";
        char buf[128];
        for (double p : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0})
            for (double tpr : {0.8, 0.9})
                for (double fpr : {0.1, 0.2}) {
                    std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f,%.6f\n", p, tpr, fpr,
                                  quant::oracle::cc_expectation(p, tpr, fpr));
                    content += buf;
                }
        write_fixture(fs::path(out_dir) / "cc_expectation.csv", content);
    }

    // lattice minimizer of the Topsoe mixture objective on the documented
    // two-bin histograms
    {
        const std::vector<double> hist_pos{0.8, 0.2}, hist_neg{0.2, 0.8};
        std::string content = "test_bin0,test_bin1,oracle_alpha\n";
        char buf[128];
        for (int i = 0; i <= 10; ++i) {
            const double b0 = static_cast<double>(i) / 10.0;
            const std::vector<double> test{b0, 1.0 - b0};
            auto best = quant::oracle::simplex_grid_minimize(
                [&](std::span<const double> theta) {
                    std::vector<double> mix(2);
                    for (std::size_t b = 0; b < 2; ++b)
                        mix[b] = theta[0] * hist_pos[b] + theta[1] * hist_neg[b];
                    return quant::topsoe_distance(mix, test);
                },
                2, 200);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.6f\n", b0, 1.0 - b0, best[0]);
            content += buf;
        }
        write_fixture(fs::path(out_dir) / "dys_mixture_oracle.csv", content);
    }

    // brute-force simplex projections
    {
        std::string content = "raw0,raw1,proj0,proj1\n";
        char buf[160];
        for (double a : {-0.5, 0.0, 0.3, 0.7, 1.2, 2.0})
            for (double b : {-0.2, 0.1, 0.5, 0.9}) {
                auto best = quant::oracle::simplex_grid_minimize(
                    [&](std::span<const double> theta) {
                        const double d0 = theta[0] - a;
                        const double d1 = theta[1] - b;
                        return d0 * d0 + d1 * d1;
                    },
                    2, 200);
                std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.6f,%.6f\n", a, b, best[0], best[1]);
                content += buf;
            }
        write_fixture(fs::path(out_dir) / "simplex_projection_oracle.csv", content);
    }

    std::cout << "fixtures regenerated under " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantbench: class-prevalence estimation and benchmarking"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "execute a benchmark run");
    run_cmd->add_option("--config", config_path, "run config JSON file")->required();

    std::string results_path, metric = "ae", shift_filter;
    double split_filter = 0.0;
    auto* agg_cmd = app.add_subcommand("aggregate", "rank methods from a results file");
    agg_cmd->add_option("--results", results_path, "results CSV")->required();
    agg_cmd->add_option("--metric", metric, "ae or nkld");
    agg_cmd->add_option("--shift", shift_filter, "minor, medium or major");
    agg_cmd->add_option("--split", split_filter, "restrict to one train fraction");

    std::string report_results, report_out = "report";
    auto* report_cmd = app.add_subcommand("report", "write markdown tables and CD-diagram data");
    report_cmd->add_option("--results", report_results, "results CSV")->required();
    report_cmd->add_option("--out", report_out, "output directory");

    std::string grid_kind = "binary";
    int grid_classes = 3;
    bool grid_print = false;
    auto* grid_cmd = app.add_subcommand("grid", "print an evaluation grid");
    grid_cmd->add_option("--kind", grid_kind, "binary or multiclass");
    grid_cmd->add_option("--classes", grid_classes, "class count for the multiclass grid");
    grid_cmd->add_flag("--print", grid_print, "print scenarios");

    std::string fixtures_out = "fixtures";
    bool regen = false;
    auto* fixtures_cmd = app.add_subcommand("fixtures", "regenerate oracle fixtures");
    fixtures_cmd->add_flag("--regen", regen, "write fixture CSVs");
    fixtures_cmd->add_option("--out", fixtures_out, "fixtures directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(config_path);
        if (agg_cmd->parsed()) return cmd_aggregate(results_path, metric, shift_filter, split_filter);
        if (report_cmd->parsed()) return cmd_report(report_results, report_out);
        if (grid_cmd->parsed()) return cmd_grid(grid_kind, grid_classes);
        if (fixtures_cmd->parsed()) {
            if (!regen) {
                std::cerr << "nothing to do (pass --regen)\n";
                return 0;
            }
            return cmd_fixtures(fixtures_out);
        }
    } catch (const quant::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const quant::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
