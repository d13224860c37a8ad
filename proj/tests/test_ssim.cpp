#include <doctest.h>

#include <algorithm>

#include "icsplit/nn.hpp"
#include "icsplit/ssim.hpp"
#include "oracles.hpp"

using namespace icsplit;

namespace {

std::vector<double> random_image(Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("ssim identity is exactly 1") {
    Rng rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        const auto x = random_image(rng, 12 * 12);
        CHECK(ssim(x, x, 12, 12, 1) == 1.0);
    }
}

TEST_CASE("two equal constant images score 1") {
    std::vector<double> a(10 * 10, 0.42), b(10 * 10, 0.42);
    CHECK(ssim(a, b, 10, 10, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("8x8 fixtures match the direct oracle to 1e-6") {
    Rng rng(7);
    SsimConfig cfg;
    cfg.window = 5;  // must fit 8x8
    for (int rep = 0; rep < 50; ++rep) {
        const auto x = random_image(rng, 64);
        const auto y = random_image(rng, 64);
        CHECK(ssim(x, y, 8, 8, 1, cfg) ==
              doctest::Approx(oracle::naive_ssim(x, y, 8, 8, 1, cfg)).epsilon(1e-6));
    }
    SsimConfig uni = cfg;
    uni.gaussian = false;
    for (int rep = 0; rep < 20; ++rep) {
        const auto x = random_image(rng, 64);
        const auto y = random_image(rng, 64);
        CHECK(ssim(x, y, 8, 8, 1, uni) ==
              doctest::Approx(oracle::naive_ssim(x, y, 8, 8, 1, uni)).epsilon(1e-6));
    }
}

TEST_CASE("multi-channel scores average per-channel ssim") {
    Rng rng(11);
    SsimConfig cfg;
    cfg.window = 5;
    const int h = 9, w = 9, c = 3;
    std::vector<double> x = random_image(rng, std::size_t(h) * w * c);
    std::vector<double> y = random_image(rng, std::size_t(h) * w * c);
    double per_channel = 0.0;
    for (int ch = 0; ch < c; ++ch) {
        std::vector<double> xc(std::size_t(h) * w), yc(xc.size());
        for (std::size_t p = 0; p < xc.size(); ++p) {
            xc[p] = x[p * c + ch];
            yc[p] = y[p * c + ch];
        }
        per_channel += ssim(xc, yc, h, w, 1, cfg);
    }
    CHECK(ssim(x, y, h, w, c, cfg) == doctest::Approx(per_channel / 3.0).epsilon(1e-12));
}

TEST_CASE("symmetry is exact and results stay in [-1, 1]") {
    Rng rng(3);
    SsimConfig cfg;
    cfg.window = 7;
    for (int rep = 0; rep < 1000; ++rep) {
        const auto x = random_image(rng, 10 * 10);
        const auto y = random_image(rng, 10 * 10);
        const double a = ssim(x, y, 10, 10, 1, cfg);
        const double b = ssim(y, x, 10, 10, 1, cfg);
        CHECK(a == b);
        CHECK(a >= -1.0);
        CHECK(a <= 1.0);
    }
}

TEST_CASE("score 1 only for identical images (tolerance 1e-9)") {
    Rng rng(5);
    const auto x = random_image(rng, 12 * 12, 0.2, 0.8);
    auto y = x;
    y[40] += 0.05;
    CHECK(ssim(x, y, 12, 12, 1) < 1.0 - 1e-9);
    CHECK(ssim(x, x, 12, 12, 1) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("shared translation of a matched-mean pair moves the score by < 1e-3") {
    // y differs from x by a checkerboard perturbation, so window means match
    // closely and the luminance term stays stable under a shared shift.
    Rng rng(9);
    const int n = 12;
    std::vector<double> x = random_image(rng, n * n, 0.25, 0.45);
    std::vector<double> y = x;
    for (int r = 0; r < n; ++r)
        for (int cc = 0; cc < n; ++cc) y[std::size_t(r) * n + cc] += ((r + cc) % 2 ? 0.01 : -0.01);
    const double c = 0.3;
    std::vector<double> xs = x, ys = y;
    for (auto& v : xs) v += c;
    for (auto& v : ys) v += c;
    const double before = ssim(x, y, n, n, 1);
    const double after = ssim(xs, ys, n, n, 1);
    CHECK(std::abs(after - before) < 1e-3);
}

TEST_CASE("shape and window errors") {
    std::vector<double> a(64, 0.0), b(49, 0.0);
    CHECK_THROWS(ssim(a, b, 8, 8, 1));
    SsimConfig cfg;
    cfg.window = 9;
    CHECK_THROWS(ssim(a, a, 8, 8, 1, cfg));
}

namespace {

/// Linear identity autoencoder over flattened images: dense layers carrying
/// the identity matrix in both directions.
AutoencoderParams identity_autoencoder(int h, int w, int c) {
    const int d = h * w * c;
    ArchitectureSpec arch;
    arch.input_h = h;
    arch.input_w = w;
    arch.input_c = c;
    arch.latent_dim = d;
    arch.encoder = {LayerSpec::flatten(), LayerSpec::dense(d, d)};
    arch.decoder = {LayerSpec::dense(d, d), LayerSpec::reshape(h, w, c)};
    AutoencoderParams p = init_params(arch, 0);
    for (std::size_t layer : {std::size_t(1), std::size_t(2)}) {
        std::fill(p.layers[layer].w.begin(), p.layers[layer].w.end(), 0.0);
        for (int i = 0; i < d; ++i) p.layers[layer].w[std::size_t(i) * d + i] = 1.0;
    }
    return p;
}

}  // namespace

TEST_CASE("score_dataset: identity autoencoder gives all 1.0") {
    Rng rng(21);
    ImageSet set;
    set.h = set.w = 8;
    set.c = 1;
    for (int i = 0; i < 6; ++i) {
        set.labels.push_back(0);
        for (int p = 0; p < 64; ++p) set.pixels.push_back(rng.uniform());
    }
    const AutoencoderParams id = identity_autoencoder(8, 8, 1);
    SsimConfig cfg;
    cfg.window = 5;
    const auto scores = score_dataset(id, set, cfg);
    REQUIRE(scores.size() == 6);
    for (double s : scores) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("score_dataset matches per-sample oracle and is order-equivariant") {
    Rng rng(33);
    ImageSet set;
    set.h = set.w = 8;
    set.c = 1;
    const int n = 10;
    for (int i = 0; i < n; ++i) {
        set.labels.push_back(0);
        for (int p = 0; p < 64; ++p) set.pixels.push_back(rng.uniform());
    }
    const ArchitectureSpec arch = default_architecture(8, 8, 1, 6, 2);
    const AutoencoderParams params = init_params(arch, 4);
    SsimConfig cfg;
    cfg.window = 5;
    const auto scores = score_dataset(params, set, cfg);

    // per-sample oracle: run each image through encode/decode on its own
    for (int i = 0; i < n; ++i) {
        Matrix one(1, 64);
        std::copy(set.image(i).begin(), set.image(i).end(), one.row(0));
        const Matrix rec = decode(params, encode(params, one));
        const double expect = oracle::naive_ssim(
            {set.image(i).begin(), set.image(i).end()},
            {rec.row(0), rec.row(0) + 64}, 8, 8, 1, cfg);
        CHECK(scores[std::size_t(i)] == doctest::Approx(expect).epsilon(1e-9));
    }

    // shuffled dataset -> same multiset of scores
    ImageSet shuffled = set;
    std::vector<std::size_t> order = {4, 2, 9, 0, 7, 1, 3, 8, 5, 6};
    for (std::size_t r = 0; r < order.size(); ++r) {
        auto img = set.image(order[r]);
        std::copy(img.begin(), img.end(), shuffled.image(r).begin());
    }
    auto s2 = score_dataset(params, shuffled, cfg);
    auto s1 = scores;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    for (std::size_t i = 0; i < s1.size(); ++i)
        CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-12));
}
