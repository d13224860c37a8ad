#pragma once

#include <span>
#include <vector>

#include "icsplit/datasets.hpp"
#include "icsplit/pipeline.hpp"

namespace icsplit {

/// Raw-pixel features: row-major vectorization, width 784 for 28x28x1 and
/// 3072 for 32x32x3.
Matrix original_features(const ImageSet& images);

struct PcaModel {
    std::vector<double> mean;       // D
    Matrix axes;                    // k x D, orthonormal rows; rows past the
                                    // data rank are zero-padded
    std::vector<double> variance;   // per-axis explained variance, non-increasing
};

/// Top-k principal axes of the centered feature matrix. Rank-deficient
/// inputs keep the available components and zero-pad the remainder.
PcaModel pca_fit(const Matrix& features, int k = 64);
Matrix pca_transform(const PcaModel& model, const Matrix& features);

/// Histogram-of-oriented-gradients configuration. Orientation bins are
/// unsigned (0..180 degrees) with linear vote interpolation; cell
/// histograms are grouped into blocks and L2-normalized per block. A
/// constant image yields the all-zero feature vector.
struct HogConfig {
    int cell = 7;          // pixels per cell side
    int block = 2;         // cells per block side
    int block_stride = 2;  // cells between block origins
    int bins = 9;

    /// 28x28 -> cell 7, block 2, stride 2 (length 144);
    /// 32x32 -> cell 8, block 2, stride 1 (length 324).
    static HogConfig for_shape(int h, int w);
    std::size_t feature_length(int h, int w) const;
};

std::vector<double> hog_features(std::span<const double> img, int h, int w, int c,
                                 const HogConfig& cfg);
Matrix hog_features(const ImageSet& images, const HogConfig& cfg);

/// Precomputed-features CSV: header "label,f0,f1,...", one row per sample
/// in corpus order. Lets externally computed features (e.g. pretrained
/// network embeddings) run through the same evaluation harness.
struct FeatureTable {
    Matrix features;
    std::vector<int> labels;
};
FeatureTable load_features_csv(const std::string& path);
void save_features_csv(const std::string& path, const Matrix& features,
                       const std::vector<int>& labels);

/// CAE: the shared pipeline with alpha = beta1 = beta2 = 0 and rho = 0.
/// CLS: the shared pipeline with beta1 = beta2 = 0 and rho = 0.
TrainConfig cae_config(TrainConfig base);
TrainConfig cls_config(TrainConfig base);
PipelineResult cae_train(const ImageSet& train, const TrainConfig& cfg);
PipelineResult cls_train(const ImageSet& train, const TrainConfig& cfg);

}  // namespace icsplit
