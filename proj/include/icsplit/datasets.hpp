#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icsplit/common.hpp"

namespace icsplit {

/// A labeled collection of fixed-shape images, stored row-major H x W x C
/// with channel-last layout. Pixels are raw byte values (0..255) after
/// loading and lie in [0, 1] after minmax_scale.
struct ImageSet {
    int h = 0;
    int w = 0;
    int c = 0;
    std::vector<double> pixels;  // count * h * w * c
    std::vector<int> labels;     // class id per image, 0..9

    std::size_t count() const { return labels.size(); }
    std::size_t image_size() const { return static_cast<std::size_t>(h) * w * c; }

    std::span<const double> image(std::size_t i) const {
        return {pixels.data() + i * image_size(), image_size()};
    }
    std::span<double> image(std::size_t i) {
        return {pixels.data() + i * image_size(), image_size()};
    }
};

/// One-class experiment partition: train holds only normal-class images,
/// test mixes leftover normal images with abnormal ones. Binary labels use
/// 0 = negative (normal) and 1 = positive (abnormal). The validation rows
/// are a seeded subset of test used for threshold tuning; evaluation rows
/// are the complement and are what metrics get reported on.
struct ExperimentSplit {
    ImageSet train;
    ImageSet test;
    std::vector<int> test_binary;             // 0 negative/normal, 1 positive/abnormal
    std::vector<std::size_t> validation_rows; // indices into test
    std::vector<std::size_t> evaluation_rows; // complement of validation_rows
    std::vector<std::size_t> train_src;       // source indices into the corpus
    std::vector<std::size_t> test_src;
    int normal_class = 0;
    std::uint64_t seed = 0;
};

struct ExperimentOptions {
    std::size_t n_train = 4000;
    /// 0 means "all remaining normal images". The paper states the test
    /// composition two contradictory ways; both are reachable through these
    /// two knobs.
    std::size_t test_normal = 0;
    /// 0 means "all abnormal images"; otherwise a seeded sample of that size.
    std::size_t test_abnormal = 9000;
    double validation_fraction = 0.2;
};

/// Parse an IDX image/label file pair (the MNIST/FMNIST distribution
/// format; big-endian magic and dimension fields).
ImageSet load_idx(const std::string& images_path, const std::string& labels_path);

/// Parse CIFAR-10 binary batches (3073-byte records: label byte followed by
/// 3072 channel-planar pixel bytes).
ImageSet load_cifar10(const std::vector<std::string>& batch_paths);

/// Portable CSV image format used for synthetic fixtures.
/// Line 1: "shape,H,W,C"; then one row per image: label, pixels row-major.
ImageSet load_image_csv(const std::string& path);
void save_image_csv(const std::string& path, const ImageSet& set);

/// Min-max scale every pixel into [0, 1] using the min/max of the whole
/// corpus, not per image. A constant corpus maps to all zeros.
ImageSet minmax_scale(const ImageSet& set);

/// Build a seeded one-class experiment. Throws if the corpus has fewer than
/// n_train images of the normal class.
ExperimentSplit make_experiment(const ImageSet& set, int normal_class, std::uint64_t seed,
                                const ExperimentOptions& opt = {});

}  // namespace icsplit
