#pragma once

#include <span>
#include <vector>

#include "icsplit/datasets.hpp"

namespace icsplit {

struct AutoencoderParams;  // nn.hpp

/// Structural similarity configuration. Stabilizers follow the usual
/// convention C1=(k1*D)^2, C2=(k2*D)^2 with dynamic range D=1 for scaled
/// pixels. Default window is 7x7 Gaussian (sigma 1.5) so it stays valid on
/// 28x28 inputs.
struct SsimConfig {
    int window = 7;
    bool gaussian = true;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

/// Mean local SSIM between two images of shape h x w x c (channel-last,
/// pixels in [0,1]). Windows slide over valid positions only; multi-channel
/// scores are the mean of per-channel scores. Symmetric in (x, y), range
/// [-1, 1], exactly 1 for identical images.
double ssim(std::span<const double> x, std::span<const double> y, int h, int w, int c,
            const SsimConfig& cfg = {});

double ssim(const ImageSet& a, std::size_t i, const ImageSet& b, std::size_t j,
            const SsimConfig& cfg = {});

/// Reconstruction similarity of every sample in the set under the given
/// autoencoder: score[i] = ssim(x_i, decode(encode(x_i))). Order-aligned
/// with the dataset.
std::vector<double> score_dataset(const AutoencoderParams& params, const ImageSet& set,
                                  const SsimConfig& cfg = {});

}  // namespace icsplit
