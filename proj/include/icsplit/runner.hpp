#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "icsplit/manifest.hpp"
#include "icsplit/metrics.hpp"

namespace icsplit {

struct CellSpec {
    int normal_class = 0;
    std::string method;
    std::uint64_t seed = 0;
};

struct CellResult {
    CellSpec spec;
    bool ok = false;
    double bacc = 0.0;
    double threshold = 0.0;
    std::string error;
};

struct RunReport {
    std::vector<CellResult> cells;
    std::string results_csv_path;
    std::string aggregate_csv_path;

    std::size_t failures() const;
};

/// The experiment split used for one normal class. It is a function of the
/// corpus and the class only - repetition seeds vary the training
/// initialization, not the data partition (deterministic feature baselines
/// therefore have zero spread across seeds, like the reference protocol).
ExperimentSplit cell_experiment(const ImageSet& corpus, const ManifestConfig& m, int normal_class);

/// One (class, method, seed) cell end to end: features, one-class SVM,
/// validation-tuned threshold, balanced accuracy on the evaluation rows.
CellResult run_cell(const ImageSet& corpus, const ManifestConfig& m, const CellSpec& cell);

/// Whole manifest grid with a worker pool; writes results.csv,
/// aggregate.csv and manifest.txt into out_dir (falls back to the
/// manifest's output_dir when out_dir is empty).
RunReport run_experiments(const ManifestConfig& m, const std::string& out_dir = "");

struct CurvePoint {
    double x = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t failures = 0;
};

std::vector<CurvePoint> sweep_rho(const ManifestConfig& m, const std::vector<double>& rhos);
/// beta sweep sets beta1 = beta2 = beta for every point.
std::vector<CurvePoint> sweep_beta(const ManifestConfig& m, const std::vector<double>& betas);

void write_curve_csv(const std::string& path, const std::string& x_name,
                     const std::vector<CurvePoint>& points);
std::vector<CurvePoint> read_curve_csv(const std::string& path, std::string* x_name = nullptr);

/// Stage-1 + split diagnostic for one class: writes the assignment CSV
/// (index, src_index, score, flag) and logs the lowest/highest-similarity
/// sample indices.
void write_split_report(const ManifestConfig& m, int normal_class, std::uint64_t seed,
                        const std::string& out_path, std::ostream& log);

}  // namespace icsplit
