#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icsplit/datasets.hpp"
#include "icsplit/nn.hpp"
#include "icsplit/ssim.hpp"

namespace icsplit {

struct TrainConfig {
    int batch_size = 64;
    int stage1_epochs = 60;
    int stage3_epochs = 30;
    LossWeights weights;      // alpha=1, beta1=beta2=1e-5
    double rho = 10.0;        // percentage of training samples flagged atypical
    std::uint64_t seed = 1;
    SsimConfig ssim;
    AdamConfig adam;          // lr 1e-3
    double l2 = 1e-6;         // on conv weights
    int latent_dim = 64;
    int base_channels = 8;

    void validate() const;
};

/// Per-sample outcome of intra-class splitting, order-aligned with the
/// training set. Exactly round(rho% * N) samples carry the atypical flag:
/// the ones with the lowest similarity scores, ties broken by dataset order.
struct SplitAssignment {
    std::vector<double> score;
    std::vector<std::uint8_t> atypical;
    double rho = 10.0;

    std::size_t atypical_count() const;
};

struct EpochStats {
    double mean_total = 0.0;
    double mean_rec = 0.0;
};

/// Training state threaded across stages. Optimizer moments and the global
/// epoch counter continue from stage 1 into stage 3, which is what makes
/// "stage 1 extended by k epochs" and "stage 3 with all-zero weights for k
/// epochs" the same trajectory bit for bit.
struct TrainState {
    AutoencoderParams params;
    AdamState opt;
    long epoch = 0;
    std::vector<EpochStats> history;
};

/// Stage 1: reconstruction + L2 only, over the whole training set. The
/// closeness/dispersion weights in cfg are ignored here by contract.
TrainState stage1_train(const ImageSet& train, const TrainConfig& cfg);

/// Stage 2 helpers: similarity scoring and the bottom-rho% rule.
SplitAssignment split_by_scores(const std::vector<double>& scores, double rho);
SplitAssignment split(const AutoencoderParams& params, const ImageSet& train, double rho,
                      const SsimConfig& cfg);

/// Stage 3: joint training with per-role objectives, continuing from the
/// given state. Requires >= 2 typical samples, and >= 2 atypical samples
/// whenever the assignment flags any.
TrainState stage3_train(TrainState from, const ImageSet& train, const SplitAssignment& assignment,
                        const TrainConfig& cfg);

struct PipelineResult {
    AutoencoderParams stage1_params;
    SplitAssignment assignment;
    TrainState final_state;

    const AutoencoderParams& params() const { return final_state.params; }
};

/// All three stages end to end. Deterministic function of (train, cfg).
PipelineResult run_pipeline(const ImageSet& train, const TrainConfig& cfg);

/// The trained encoder as a feature extractor (no decoder involvement).
Matrix extract_features(const AutoencoderParams& params, const ImageSet& images);
Matrix extract_features(const AutoencoderParams& params, const Matrix& batch);

/// Split assignment CSV: index[,src_index],score,flag.
void save_split_csv(const std::string& path, const SplitAssignment& assignment,
                    const std::vector<std::size_t>& src_indices = {});

}  // namespace icsplit
