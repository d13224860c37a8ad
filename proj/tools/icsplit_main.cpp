// icsplit: one-class feature learning by intra-class splitting.
//
// Subcommands: run, sweep-rho, sweep-beta, export-plot, split-report.
// Exit codes: 0 success, 1 partial cell failures, 2 configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icsplit/plot.hpp"
#include "icsplit/runner.hpp"

namespace {

int report_cells(const icsplit::RunReport& report) {
    std::size_t ok = 0;
    for (const auto& c : report.cells) {
        std::printf("%-10s class %d seed %llu: ", c.spec.method.c_str(), c.spec.normal_class,
                    static_cast<unsigned long long>(c.spec.seed));
        if (c.ok) {
            std::printf("bacc %.4f\n", c.bacc);
            ++ok;
        } else {
            std::printf("FAILED (%s)\n", c.error.c_str());
        }
    }
    std::printf("%zu/%zu cells ok\n", ok, report.cells.size());
    std::printf("results: %s\naggregate: %s\n", report.results_csv_path.c_str(),
                report.aggregate_csv_path.c_str());
    return report.failures() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-class feature learning via intra-class splitting"};
    app.require_subcommand(1);

    std::string manifest_path, out_dir, out_path, curve_path;
    std::vector<double> rhos, betas;
    int normal_class = 0;
    std::uint64_t seed = 1;
    bool log_x = false;

    auto* cmd_run = app.add_subcommand("run", "run the manifest's experiment grid");
    cmd_run->add_option("--manifest", manifest_path, "experiment manifest")->required();
    cmd_run->add_option("--out", out_dir, "output directory (overrides manifest)");

    auto* cmd_rho = app.add_subcommand("sweep-rho", "balanced accuracy across split ratios");
    cmd_rho->add_option("--manifest", manifest_path)->required();
    cmd_rho->add_option("--rhos", rhos, "rho values in percent")->required()->delimiter(',');
    cmd_rho->add_option("--out", out_path, "curve CSV path");

    auto* cmd_beta = app.add_subcommand("sweep-beta", "balanced accuracy across beta1=beta2");
    cmd_beta->add_option("--manifest", manifest_path)->required();
    cmd_beta->add_option("--betas", betas, "beta values")->required()->delimiter(',');
    cmd_beta->add_option("--out", out_path, "curve CSV path");

    auto* cmd_plot = app.add_subcommand("export-plot", "render a curve CSV as an SVG chart");
    cmd_plot->add_option("--curve", curve_path, "curve CSV")->required();
    cmd_plot->add_option("--out", out_path, "SVG path")->required();
    cmd_plot->add_flag("--log-x", log_x, "logarithmic x axis");

    auto* cmd_split = app.add_subcommand("split-report", "dump the intra-class split assignment");
    cmd_split->add_option("--manifest", manifest_path)->required();
    cmd_split->add_option("--class", normal_class, "normal class id");
    cmd_split->add_option("--seed", seed, "training seed");
    cmd_split->add_option("--out", out_path, "assignment CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            const auto m = icsplit::parse_manifest(manifest_path);
            return report_cells(icsplit::run_experiments(m, out_dir));
        }
        if (cmd_rho->parsed()) {
            const auto m = icsplit::parse_manifest(manifest_path);
            const auto points = icsplit::sweep_rho(m, rhos);
            if (out_path.empty()) {
                std::filesystem::create_directories(m.run.output_dir);
                out_path = m.run.output_dir + "/rho_curve.csv";
            }
            icsplit::write_curve_csv(out_path, "rho", points);
            std::printf("curve: %s\n", out_path.c_str());
            std::size_t failures = 0;
            for (const auto& p : points) failures += p.failures;
            return failures == 0 ? 0 : 1;
        }
        if (cmd_beta->parsed()) {
            const auto m = icsplit::parse_manifest(manifest_path);
            const auto points = icsplit::sweep_beta(m, betas);
            if (out_path.empty()) {
                std::filesystem::create_directories(m.run.output_dir);
                out_path = m.run.output_dir + "/beta_curve.csv";
            }
            icsplit::write_curve_csv(out_path, "beta", points);
            std::printf("curve: %s\n", out_path.c_str());
            std::size_t failures = 0;
            for (const auto& p : points) failures += p.failures;
            return failures == 0 ? 0 : 1;
        }
        if (cmd_plot->parsed()) {
            icsplit::export_plot(curve_path, out_path, log_x);
            std::printf("chart: %s\n", out_path.c_str());
            return 0;
        }
        if (cmd_split->parsed()) {
            const auto m = icsplit::parse_manifest(manifest_path);
            if (out_path.empty()) {
                std::filesystem::create_directories(m.run.output_dir);
                out_path = m.run.output_dir + "/split_report.csv";
            }
            icsplit::write_split_report(m, normal_class, seed, out_path, std::cout);
            std::printf("assignment: %s\n", out_path.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
