#include "icsplit/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace icsplit {

namespace {

double seg_dist(double u, double v, double x0, double y0, double x1, double y1) {
    const double dx = x1 - x0, dy = y1 - y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((u - x0) * dx + (v - y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double px = x0 + t * dx - u, py = y0 + t * dy - v;
    return std::sqrt(px * px + py * py);
}

/// Distance from (u, v) to the stroke skeleton of class k, in normalized
/// [-1, 1] coordinates.
double shape_dist(int k, double u, double v) {
    const double r = std::sqrt(u * u + v * v);
    switch (k) {
        case 0: return std::abs(r - 0.55);
        case 1: return seg_dist(u, v, 0.0, -0.65, 0.0, 0.65);
        case 2:
            return std::min(seg_dist(u, v, -0.6, 0.0, 0.6, 0.0),
                            seg_dist(u, v, 0.0, -0.6, 0.0, 0.6));
        case 3: {
            const double a = 0.5;
            double d = seg_dist(u, v, -a, -a, a, -a);
            d = std::min(d, seg_dist(u, v, a, -a, a, a));
            d = std::min(d, seg_dist(u, v, a, a, -a, a));
            return std::min(d, seg_dist(u, v, -a, a, -a, -a));
        }
        case 4: return seg_dist(u, v, -0.55, -0.55, 0.55, 0.55);
        case 5:
            return std::min(seg_dist(u, v, -0.55, -0.35, 0.55, -0.35),
                            seg_dist(u, v, -0.55, 0.35, 0.55, 0.35));
        case 6: return std::max(0.0, r - 0.45);  // filled disc
        case 7: {
            double d = seg_dist(u, v, 0.0, -0.6, 0.55, 0.5);
            d = std::min(d, seg_dist(u, v, 0.55, 0.5, -0.55, 0.5));
            return std::min(d, seg_dist(u, v, -0.55, 0.5, 0.0, -0.6));
        }
        case 8: return std::min(std::abs(r - 0.3), std::abs(r - 0.62));
        default: {  // 9: Z stroke
            double d = seg_dist(u, v, -0.55, -0.45, 0.55, -0.45);
            d = std::min(d, seg_dist(u, v, 0.55, -0.45, -0.55, 0.45));
            return std::min(d, seg_dist(u, v, -0.55, 0.45, 0.55, 0.45));
        }
    }
}

struct SampleParams {
    double theta, scale, tx, ty, thickness, intensity, noise_sigma;
    bool occlude = false, clutter = false;
    int occ_axis = 0, occ_start = 0, occ_width = 0;
    double blob_x[4], blob_y[4], blob_r[4];
    int n_blobs = 0;
};

SampleParams draw_params(Rng& rng, bool atypical, double base_noise) {
    SampleParams p{};
    if (!atypical) {
        p.theta = rng.uniform(-0.18, 0.18);
        p.scale = rng.uniform(0.85, 1.10);
        p.tx = rng.uniform(-1.8, 1.8);
        p.ty = rng.uniform(-1.8, 1.8);
        p.thickness = rng.uniform(0.10, 0.16);
        p.intensity = rng.uniform(0.72, 1.0);
        p.noise_sigma = base_noise;
    } else {
        p.theta = rng.uniform(-0.85, 0.85);
        p.scale = rng.uniform(0.55, 1.45);
        p.tx = rng.uniform(-4.5, 4.5);
        p.ty = rng.uniform(-4.5, 4.5);
        p.thickness = rng.uniform(0.05, 0.30);
        p.intensity = rng.uniform(0.5, 1.0);
        p.noise_sigma = base_noise * rng.uniform(1.0, 3.0);
        const double kind = rng.uniform();
        if (kind < 0.45) {
            p.occlude = true;
            p.occ_axis = rng.index(2) == 0 ? 0 : 1;
            p.occ_width = 4 + int(rng.index(4));
            p.occ_start = int(rng.index(20));
        } else if (kind < 0.85) {
            p.clutter = true;
            p.n_blobs = 2 + int(rng.index(3));
            for (int b = 0; b < p.n_blobs; ++b) {
                p.blob_x[b] = rng.uniform(-0.9, 0.9);
                p.blob_y[b] = rng.uniform(-0.9, 0.9);
                p.blob_r[b] = rng.uniform(0.05, 0.14);
            }
        }
        // otherwise deformation + heavier noise alone
    }
    return p;
}

}  // namespace

ImageSet synthetic_imageset(const SyntheticConfig& cfg) {
    if (cfg.classes < 1 || cfg.classes > 10)
        throw std::invalid_argument("synthetic_imageset: classes must be 1..10");
    if (cfg.per_class < 1 || cfg.size < 8)
        throw std::invalid_argument("synthetic_imageset: bad per_class/size");

    ImageSet set;
    set.h = set.w = cfg.size;
    set.c = 1;
    const std::size_t px = set.image_size();
    set.pixels.resize(std::size_t(cfg.classes) * cfg.per_class * px);
    set.labels.resize(std::size_t(cfg.classes) * cfg.per_class);

    const double half = cfg.size / 2.0;
    std::size_t out = 0;
    for (int k = 0; k < cfg.classes; ++k) {
        for (int s = 0; s < cfg.per_class; ++s, ++out) {
            Rng rng(mix_seed(cfg.seed, std::uint64_t(k), std::uint64_t(s)));
            const bool atypical = rng.uniform() < cfg.atypical_fraction;
            const SampleParams p = draw_params(rng, atypical, cfg.noise);
            const double ct = std::cos(p.theta), st = std::sin(p.theta);
            double* img = set.pixels.data() + out * px;
            set.labels[out] = k;
            for (int y = 0; y < cfg.size; ++y) {
                for (int x = 0; x < cfg.size; ++x) {
                    // image -> shape coordinates (undo translate, rotate, scale)
                    const double ix = (x + 0.5 - half - p.tx) / (half * p.scale);
                    const double iy = (y + 0.5 - half - p.ty) / (half * p.scale);
                    const double u = ct * ix + st * iy;
                    const double v = -st * ix + ct * iy;
                    double d = shape_dist(k, u, v);
                    if (p.clutter)
                        for (int b = 0; b < p.n_blobs; ++b) {
                            const double bx = ix - p.blob_x[b], by = iy - p.blob_y[b];
                            d = std::min(d, std::max(0.0, std::sqrt(bx * bx + by * by) - p.blob_r[b]));
                        }
                    double val = p.intensity / (1.0 + std::exp((d - p.thickness) / 0.035));
                    if (p.occlude) {
                        const int coord = p.occ_axis == 0 ? y : x;
                        if (coord >= p.occ_start && coord < p.occ_start + p.occ_width) val = 0.0;
                    }
                    val += p.noise_sigma * rng.normal();
                    img[std::size_t(y) * cfg.size + x] =
                        std::round(std::clamp(val, 0.0, 1.0) * 255.0);
                }
            }
        }
    }
    return set;
}

}  // namespace icsplit
