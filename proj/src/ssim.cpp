#include "icsplit/ssim.hpp"

#include <cmath>
#include <stdexcept>

#include "icsplit/nn.hpp"

namespace icsplit {

namespace {

std::vector<double> window_weights(const SsimConfig& cfg) {
    const int n = cfg.window;
    std::vector<double> w(std::size_t(n) * n, 1.0);
    if (cfg.gaussian) {
        const double half = (n - 1) / 2.0;
        const double inv2s2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const double dy = y - half, dx = x - half;
                w[std::size_t(y) * n + x] = std::exp(-(dx * dx + dy * dy) * inv2s2);
            }
    }
    double sum = 0.0;
    for (double x : w) sum += x;
    for (double& x : w) x /= sum;
    return w;
}

}  // namespace

double ssim(std::span<const double> x, std::span<const double> y, int h, int w, int c,
            const SsimConfig& cfg) {
    if (x.size() != y.size() || x.size() != std::size_t(h) * w * c)
        throw std::invalid_argument("ssim: shape mismatch");
    if (cfg.window < 1 || cfg.window > h || cfg.window > w)
        throw std::invalid_argument("ssim: window does not fit the image");

    const int n = cfg.window;
    const double c1 = cfg.c1(), c2 = cfg.c2();
    const std::vector<double> wt = window_weights(cfg);

    double channel_sum = 0.0;
    for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        std::size_t positions = 0;
        for (int oy = 0; oy + n <= h; ++oy) {
            for (int ox = 0; ox + n <= w; ++ox) {
                double mx = 0.0, my = 0.0;
                for (int ky = 0; ky < n; ++ky)
                    for (int kx = 0; kx < n; ++kx) {
                        const std::size_t p =
                            (std::size_t(oy + ky) * w + (ox + kx)) * c + ch;
                        const double wk = wt[std::size_t(ky) * n + kx];
                        mx += wk * x[p];
                        my += wk * y[p];
                    }
                double vx = 0.0, vy = 0.0, cov = 0.0;
                for (int ky = 0; ky < n; ++ky)
                    for (int kx = 0; kx < n; ++kx) {
                        const std::size_t p =
                            (std::size_t(oy + ky) * w + (ox + kx)) * c + ch;
                        const double wk = wt[std::size_t(ky) * n + kx];
                        const double dx = x[p] - mx, dy = y[p] - my;
                        vx += wk * dx * dx;
                        vy += wk * dy * dy;
                        cov += wk * dx * dy;
                    }
                acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                       ((mx * mx + my * my + c1) * (vx + vy + c2));
                ++positions;
            }
        }
        channel_sum += acc / double(positions);
    }
    return channel_sum / double(c);
}

double ssim(const ImageSet& a, std::size_t i, const ImageSet& b, std::size_t j,
            const SsimConfig& cfg) {
    if (a.h != b.h || a.w != b.w || a.c != b.c)
        throw std::invalid_argument("ssim: image sets have different shapes");
    return ssim(a.image(i), b.image(j), a.h, a.w, a.c, cfg);
}

std::vector<double> score_dataset(const AutoencoderParams& params, const ImageSet& set,
                                  const SsimConfig& cfg) {
    const std::size_t dim = set.image_size();
    std::vector<double> scores(set.count());
    // batched reconstruction to keep the dense/conv kernels on full rows
    constexpr std::size_t kChunk = 64;
    for (std::size_t start = 0; start < set.count(); start += kChunk) {
        const std::size_t b = std::min(kChunk, set.count() - start);
        Matrix batch(b, dim);
        for (std::size_t r = 0; r < b; ++r) {
            auto img = set.image(start + r);
            std::copy(img.begin(), img.end(), batch.row(r));
        }
        const Matrix recon = decode(params, encode(params, batch));
        for (std::size_t r = 0; r < b; ++r)
            scores[start + r] = ssim({batch.row(r), dim}, {recon.row(r), dim}, set.h, set.w,
                                     set.c, cfg);
    }
    return scores;
}

}  // namespace icsplit
