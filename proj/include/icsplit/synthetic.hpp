#pragma once

#include <cstdint>

#include "icsplit/datasets.hpp"

namespace icsplit {

/// Deterministic generator for a 10-class grayscale shape corpus used as a
/// desk-scale stand-in and for CSV fixtures. Every class is a stroke
/// pattern (rings, bars, crosses, ...) rendered with per-sample jitter in
/// rotation, scale, translation, stroke width and brightness. A seeded
/// minority of samples receives much stronger deformations plus occlusion
/// or clutter, so each class carries a genuine typical/atypical structure.
struct SyntheticConfig {
    int classes = 10;           // 1..10
    int per_class = 700;
    int size = 28;              // square images, single channel
    std::uint64_t seed = 7;
    double noise = 0.05;        // additive Gaussian pixel noise, in [0,1] units
    double atypical_fraction = 0.15;
};

/// Pixels come back quantized to 0..255 like a raw byte dataset, so the
/// normal ingestion path (minmax_scale and friends) applies unchanged.
ImageSet synthetic_imageset(const SyntheticConfig& cfg);

}  // namespace icsplit
