#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icsplit/common.hpp"
#include "icsplit/losses.hpp"

namespace icsplit {

enum class LayerKind { Conv, Dense, ReLU, Sigmoid, Flatten, Reshape, Upsample };

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    int in_ch = 0, out_ch = 0, ksize = 0, stride = 1, pad = 0;  // Conv
    int in_dim = 0, out_dim = 0;                                // Dense
    int out_h = 0, out_w = 0;                                   // Reshape (with out_ch), Upsample

    static LayerSpec conv(int in_ch, int out_ch, int k, int stride, int pad);
    static LayerSpec dense(int in_dim, int out_dim);
    static LayerSpec relu() { return {LayerKind::ReLU}; }
    static LayerSpec sigmoid() { return {LayerKind::Sigmoid}; }
    static LayerSpec flatten() { return {LayerKind::Flatten}; }
    static LayerSpec reshape(int h, int w, int c);
    static LayerSpec upsample(int h, int w);

    bool has_params() const { return kind == LayerKind::Conv || kind == LayerKind::Dense; }
};

/// Shape of an activation: spatial (h, w, c) or flat (dim).
struct ActShape {
    bool flat = false;
    int h = 0, w = 0, c = 0;
    int dim() const { return flat ? h : h * w * c; }
    static ActShape spatial(int h, int w, int c) { return {false, h, w, c}; }
    static ActShape flat_dim(int d) { return {true, d, 0, 0}; }
};

struct ArchitectureSpec {
    int input_h = 28, input_w = 28, input_c = 1;
    int latent_dim = 64;
    std::vector<LayerSpec> encoder;
    std::vector<LayerSpec> decoder;

    std::size_t layer_count() const { return encoder.size() + decoder.size(); }
    const LayerSpec& layer(std::size_t i) const {
        return i < encoder.size() ? encoder[i] : decoder[i - encoder.size()];
    }
    ActShape input_shape() const { return ActShape::spatial(input_h, input_w, input_c); }

    /// Walks shapes through both chains; throws on any inconsistency,
    /// on empty chains, if the encoder does not end in a flat latent_dim
    /// vector, if the decoder does not restore the input shape, or if the
    /// parameterized layer counts of the two chains differ (bottleneck
    /// symmetry).
    void validate() const;
};

/// Output shape of one layer. Throws on shape violations.
ActShape layer_output_shape(const LayerSpec& layer, const ActShape& in);

/// Desk-scale convolutional autoencoder: three stride-2 conv+ReLU blocks
/// into a dense latent layer; the decoder mirrors them with nearest
/// upsampling and a sigmoid output so reconstructions live in [0, 1].
ArchitectureSpec default_architecture(int h, int w, int c, int latent_dim = 64,
                                      int base_channels = 8);

struct LayerParams {
    std::vector<double> w;
    std::vector<double> b;
};

/// One tensor pair per layer, shape-congruent with AutoencoderParams.
using GradientSet = std::vector<LayerParams>;

struct AutoencoderParams {
    ArchitectureSpec arch;
    std::vector<LayerParams> layers;  // aligned with encoder then decoder
    std::uint64_t init_seed = 0;

    bool congruent_with(const GradientSet& g) const;
};

/// Deterministic fan-in-scaled initialization: weights ~ N(0, 2/fan_in),
/// zero biases.
AutoencoderParams init_params(const ArchitectureSpec& arch, std::uint64_t seed);

std::size_t param_count(const AutoencoderParams& params);

/// Encoder forward: batch rows are vectorized images, output is B x latent_dim.
Matrix encode(const AutoencoderParams& params, const Matrix& batch);

/// Decoder forward: latent rows to vectorized images.
Matrix decode(const AutoencoderParams& params, const Matrix& latent);

/// Batch plan for the composite objective: which rows are typical/atypical
/// and how they are paired. Partner entries are batch row indices.
struct BatchPlan {
    std::vector<int> typical_rows;
    std::vector<int> atypical_rows;
    std::vector<int> closeness_partner;  // per typical row, a typical row != itself
    std::vector<int> disp1_partner;      // per atypical row, an atypical row != itself
    std::vector<int> disp2_partner;      // per atypical row, a typical row
};

struct CompositeLossSpec {
    LossWeights weights;
    double l2 = 0.0;  // on conv weights; d/dw of l2*sum(w^2) is 2*l2*w
    BatchPlan plan;
};

struct BackwardResult {
    double loss = 0.0;  // total, including the L2 term
    double rec = 0.0, cls = 0.0, disp1 = 0.0, disp2 = 0.0;
    GradientSet grads;
};

/// Loss and gradients of the unified objective over one batch.
/// Throws on non-finite loss (divergence signal).
BackwardResult backward(const AutoencoderParams& params, const Matrix& batch,
                        const CompositeLossSpec& spec);

/// Forward-only evaluation of the same objective (used by finite-difference
/// checks and epoch reporting).
double composite_loss(const AutoencoderParams& params, const Matrix& batch,
                      const CompositeLossSpec& spec);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    long t = 0;
    GradientSet m, v;
};

AdamState make_adam(const AutoencoderParams& params, const AdamConfig& cfg = {});
void optimizer_step(AutoencoderParams& params, const GradientSet& grads, AdamState& state);

/// Versioned JSON checkpoint: architecture descriptor plus flat tensors.
void save_checkpoint(const std::string& path, const AutoencoderParams& params);
AutoencoderParams load_checkpoint(const std::string& path);
std::string checkpoint_to_string(const AutoencoderParams& params);
AutoencoderParams checkpoint_from_string(const std::string& text);

}  // namespace icsplit
