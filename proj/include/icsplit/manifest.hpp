#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icsplit/datasets.hpp"
#include "icsplit/ocsvm.hpp"
#include "icsplit/pipeline.hpp"

namespace icsplit {

/// Experiment manifest: plain-text key=value with [section] headers.
/// Unknown sections or keys are rejected; referenced paths must exist at
/// load time.
struct DatasetSection {
    std::string kind = "synthetic";  // idx | cifar10 | csv | synthetic
    std::string name = "synthetic";  // dataset label in result rows
    std::vector<std::string> images;  // idx image files
    std::vector<std::string> labels;  // idx label files
    std::vector<std::string> files;   // cifar10 batches
    std::string file;                 // csv fixture
    int classes = 10;                 // synthetic
    int per_class = 700;
    int image_size = 28;
    std::uint64_t data_seed = 7;
    double noise = 0.05;
    double atypical_fraction = 0.15;
};

struct ExperimentSection {
    std::vector<int> normal_classes = {0, 1, 2};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<std::string> methods = {"ours", "cae", "original"};
    std::size_t n_train = 1000;
    std::size_t test_normal = 0;    // 0 = all remaining normal images
    std::size_t test_abnormal = 0;  // 0 = all abnormal images
    double validation_fraction = 0.2;
};

struct OcsvmSection {
    double nu = 0.1;
    double gamma = 0.0;  // 0 = 1/#features
    double tol = 1e-4;
};

struct RunSection {
    std::string output_dir = "out";
    int threads = 0;  // 0 = hardware concurrency
    std::string external_features;
};

struct ManifestConfig {
    DatasetSection dataset;
    ExperimentSection experiment;
    TrainConfig train;  // per-cell seed is assigned by the runner
    OcsvmSection ocsvm;
    RunSection run;

    void validate() const;
};

ManifestConfig parse_manifest(const std::string& path);
ManifestConfig parse_manifest_text(const std::string& text, const std::string& origin = "<text>");

/// Serialize the resolved configuration back to manifest syntax (written
/// into the output directory as the run record).
std::string manifest_to_text(const ManifestConfig& m);

/// Load and minmax-scale the corpus the manifest describes.
ImageSet load_manifest_corpus(const ManifestConfig& m);

}  // namespace icsplit
