#include <doctest.h>

#include <cmath>

#include "icsplit/nn.hpp"

using namespace icsplit;

namespace {

Matrix random_batch(Rng& rng, std::size_t b, std::size_t d, double lo = 0.0, double hi = 1.0) {
    Matrix m(b, d);
    for (auto& v : m.v) v = rng.uniform(lo, hi);
    return m;
}

/// Central finite differences against backward() over every parameter.
void check_gradients(const AutoencoderParams& params, const Matrix& batch,
                     const CompositeLossSpec& spec, double h = 1e-4, double tol = 1e-3) {
    const BackwardResult res = backward(params, batch, spec);
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        auto check_tensor = [&](bool is_w) {
            const auto& tensor = is_w ? params.layers[li].w : params.layers[li].b;
            const auto& grad = is_w ? res.grads[li].w : res.grads[li].b;
            for (std::size_t k = 0; k < tensor.size(); ++k) {
                AutoencoderParams pp = params, pm = params;
                (is_w ? pp.layers[li].w : pp.layers[li].b)[k] += h;
                (is_w ? pm.layers[li].w : pm.layers[li].b)[k] -= h;
                const double fd =
                    (composite_loss(pp, batch, spec) - composite_loss(pm, batch, spec)) / (2 * h);
                const double scale = std::max({std::abs(grad[k]), std::abs(fd), 1e-4});
                CHECK(std::abs(grad[k] - fd) <= tol * scale);
            }
        };
        check_tensor(true);
        check_tensor(false);
    }
}

AutoencoderParams tiny_conv_net(std::uint64_t seed) {
    // 2 conv + 1 dense encoder on 8x8 inputs, mirrored decoder
    ArchitectureSpec a;
    a.input_h = a.input_w = 8;
    a.input_c = 1;
    a.latent_dim = 4;
    a.encoder = {LayerSpec::conv(1, 2, 3, 2, 1), LayerSpec::relu(),
                 LayerSpec::conv(2, 4, 3, 2, 1), LayerSpec::relu(),
                 LayerSpec::flatten(),           LayerSpec::dense(2 * 2 * 4, 4)};
    a.decoder = {LayerSpec::dense(4, 2 * 2 * 4), LayerSpec::relu(),
                 LayerSpec::reshape(2, 2, 4),    LayerSpec::upsample(4, 4),
                 LayerSpec::conv(4, 2, 3, 1, 1), LayerSpec::relu(),
                 LayerSpec::upsample(8, 8),      LayerSpec::conv(2, 1, 3, 1, 1),
                 LayerSpec::sigmoid()};
    return init_params(a, seed);
}

}  // namespace

TEST_CASE("init_params is a bit-deterministic function of (arch, seed)") {
    const ArchitectureSpec arch = default_architecture(28, 28, 1);
    const AutoencoderParams a = init_params(arch, 7);
    const AutoencoderParams b = init_params(arch, 7);
    REQUIRE(a.layers.size() == b.layers.size());
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        CHECK(a.layers[i].w == b.layers[i].w);
        CHECK(a.layers[i].b == b.layers[i].b);
    }
    const AutoencoderParams c = init_params(arch, 8);
    CHECK(a.layers[0].w != c.layers[0].w);
}

TEST_CASE("init_params: dense fan_in 100 draws have stdev near sqrt(2/100)") {
    ArchitectureSpec a;
    a.input_h = 10;
    a.input_w = 10;
    a.input_c = 1;
    a.latent_dim = 200;
    a.encoder = {LayerSpec::flatten(), LayerSpec::dense(100, 200)};
    a.decoder = {LayerSpec::dense(200, 100), LayerSpec::reshape(10, 10, 1)};
    const AutoencoderParams p = init_params(a, 3);
    const auto& w = p.layers[1].w;  // 100*200 = 2e4 draws
    REQUIRE(w.size() == 20000);
    double mean = 0.0;
    for (double x : w) mean += x;
    mean /= double(w.size());
    double var = 0.0;
    for (double x : w) var += (x - mean) * (x - mean);
    const double stdev = std::sqrt(var / double(w.size()));
    const double expect = std::sqrt(2.0 / 100.0);
    CHECK(stdev > 0.9 * expect);
    CHECK(stdev < 1.1 * expect);
    for (double b : p.layers[1].b) CHECK(b == 0.0);
}

TEST_CASE("zero-layer architecture is rejected") {
    ArchitectureSpec a;
    a.encoder.clear();
    a.decoder.clear();
    CHECK_THROWS(init_params(a, 0));
}

TEST_CASE("architecture validation catches inconsistent shapes") {
    ArchitectureSpec a;
    a.input_h = a.input_w = 8;
    a.input_c = 1;
    a.latent_dim = 4;
    a.encoder = {LayerSpec::flatten(), LayerSpec::dense(64, 5)};  // 5 != latent_dim
    a.decoder = {LayerSpec::dense(4, 64), LayerSpec::reshape(8, 8, 1)};
    CHECK_THROWS(a.validate());
}

TEST_CASE("encode: default width, duplicated rows, zero-weight path") {
    const ArchitectureSpec arch = default_architecture(28, 28, 1);
    AutoencoderParams p = init_params(arch, 5);
    Rng rng(1);
    Matrix one = random_batch(rng, 1, 784);
    const Matrix z1 = encode(p, one);
    CHECK(z1.rows == 1);
    CHECK(z1.cols == 64);

    Matrix dup(2, 784);
    std::copy(one.v.begin(), one.v.end(), dup.row(0));
    std::copy(one.v.begin(), one.v.end(), dup.row(1));
    const Matrix z2 = encode(p, dup);
    for (std::size_t c = 0; c < 64; ++c) {
        CHECK(z2.at(0, c) == z2.at(1, c));
        CHECK(z2.at(0, c) == z1.at(0, c));
    }

    for (auto& layer : p.layers) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
    Matrix zeros(1, 784);
    const Matrix z0 = encode(p, zeros);
    for (double v : z0.v) CHECK(v == 0.0);
}

TEST_CASE("decode: sigmoid output range, empty batch, determinism") {
    const ArchitectureSpec arch = default_architecture(28, 28, 1);
    const AutoencoderParams p = init_params(arch, 5);
    Rng rng(2);
    Matrix z(3, 64);
    for (auto& v : z.v) v = 4.0 * rng.normal();
    const Matrix x1 = decode(p, z);
    CHECK(x1.rows == 3);
    CHECK(x1.cols == 784);
    for (double v : x1.v) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const Matrix x2 = decode(p, z);
    CHECK(x1.v == x2.v);

    const Matrix empty = decode(p, Matrix(0, 64));
    CHECK(empty.rows == 0);

    CHECK_THROWS(decode(p, Matrix(1, 63)));
    CHECK_THROWS(encode(p, Matrix(1, 100)));
}

TEST_CASE("batch order does not change per-sample outputs") {
    const AutoencoderParams p = tiny_conv_net(11);
    Rng rng(3);
    Matrix ab = random_batch(rng, 2, 64);
    Matrix ba(2, 64);
    std::copy(ab.row(1), ab.row(1) + 64, ba.row(0));
    std::copy(ab.row(0), ab.row(0) + 64, ba.row(1));
    const Matrix z_ab = encode(p, ab);
    const Matrix z_ba = encode(p, ba);
    for (std::size_t c = 0; c < z_ab.cols; ++c) {
        CHECK(z_ab.at(0, c) == z_ba.at(1, c));
        CHECK(z_ab.at(1, c) == z_ba.at(0, c));
    }
}

TEST_CASE("gradient check: dense/flatten/reshape in isolation") {
    ArchitectureSpec a;
    a.input_h = a.input_w = 4;
    a.input_c = 1;
    a.latent_dim = 4;
    a.encoder = {LayerSpec::flatten(), LayerSpec::dense(16, 4)};
    a.decoder = {LayerSpec::dense(4, 16), LayerSpec::reshape(4, 4, 1)};
    const AutoencoderParams p = init_params(a, 1);
    Rng rng(4);
    CompositeLossSpec spec;
    check_gradients(p, random_batch(rng, 3, 16), spec);
}

TEST_CASE("gradient check: sigmoid in isolation") {
    ArchitectureSpec a;
    a.input_h = a.input_w = 4;
    a.input_c = 1;
    a.latent_dim = 4;
    a.encoder = {LayerSpec::flatten(), LayerSpec::dense(16, 4), LayerSpec::sigmoid()};
    a.decoder = {LayerSpec::dense(4, 16), LayerSpec::sigmoid(), LayerSpec::reshape(4, 4, 1)};
    const AutoencoderParams p = init_params(a, 2);
    Rng rng(5);
    CompositeLossSpec spec;
    check_gradients(p, random_batch(rng, 3, 16), spec);
}

TEST_CASE("gradient check: relu in isolation") {
    ArchitectureSpec a;
    a.input_h = a.input_w = 4;
    a.input_c = 1;
    a.latent_dim = 3;
    a.encoder = {LayerSpec::flatten(), LayerSpec::dense(16, 8), LayerSpec::relu(),
                 LayerSpec::dense(8, 3)};
    a.decoder = {LayerSpec::dense(3, 8), LayerSpec::relu(), LayerSpec::dense(8, 16),
                 LayerSpec::reshape(4, 4, 1)};
    const AutoencoderParams p = init_params(a, 3);
    Rng rng(6);
    CompositeLossSpec spec;
    check_gradients(p, random_batch(rng, 3, 16), spec);
}

TEST_CASE("gradient check: conv stride 2 with padding plus upsample") {
    ArchitectureSpec a;
    a.input_h = a.input_w = 7;  // odd size forces an uneven upsample mapping
    a.input_c = 1;
    a.latent_dim = 5;
    a.encoder = {LayerSpec::conv(1, 3, 3, 2, 1), LayerSpec::relu(), LayerSpec::flatten(),
                 LayerSpec::dense(4 * 4 * 3, 5)};
    a.decoder = {LayerSpec::dense(5, 4 * 4 * 3), LayerSpec::reshape(4, 4, 3),
                 LayerSpec::upsample(7, 7), LayerSpec::conv(3, 1, 3, 1, 1)};
    const AutoencoderParams p = init_params(a, 4);
    Rng rng(7);
    CompositeLossSpec spec;
    check_gradients(p, random_batch(rng, 2, 49), spec);
}

TEST_CASE("gradient check: conv stride 1 without padding") {
    ArchitectureSpec a;
    a.input_h = a.input_w = 4;
    a.input_c = 2;
    a.latent_dim = 3;
    a.encoder = {LayerSpec::conv(2, 2, 3, 1, 0), LayerSpec::flatten(),
                 LayerSpec::dense(2 * 2 * 2, 3)};
    a.decoder = {LayerSpec::dense(3, 32), LayerSpec::reshape(4, 4, 2),
                 LayerSpec::conv(2, 2, 3, 1, 1)};
    const AutoencoderParams p = init_params(a, 5);
    Rng rng(8);
    CompositeLossSpec spec;
    check_gradients(p, random_batch(rng, 2, 32), spec);
}

TEST_CASE("gradient check: full composite objective on the tiny 2conv+1dense net") {
    const AutoencoderParams p = tiny_conv_net(6);
    Rng rng(9);
    const Matrix batch = random_batch(rng, 6, 64);
    CompositeLossSpec spec;
    spec.weights = LossWeights{0.7, 0.3, 0.2};
    spec.l2 = 1e-4;
    spec.plan.typical_rows = {0, 1, 2, 3};
    spec.plan.atypical_rows = {4, 5};
    spec.plan.closeness_partner = {1, 2, 3, 0};
    spec.plan.disp1_partner = {5, 4};
    spec.plan.disp2_partner = {0, 2};
    check_gradients(p, batch, spec);
}

TEST_CASE("perfect reconstruction with zero weights gives zero data gradients") {
    // identity autoencoder built by hand: dense identity both ways
    ArchitectureSpec a;
    a.input_h = a.input_w = 3;
    a.input_c = 1;
    a.latent_dim = 9;
    a.encoder = {LayerSpec::flatten(), LayerSpec::dense(9, 9)};
    a.decoder = {LayerSpec::dense(9, 9), LayerSpec::reshape(3, 3, 1)};
    AutoencoderParams p = init_params(a, 0);
    for (std::size_t li : {std::size_t(1), std::size_t(2)}) {
        std::fill(p.layers[li].w.begin(), p.layers[li].w.end(), 0.0);
        for (int i = 0; i < 9; ++i) p.layers[li].w[std::size_t(i) * 9 + i] = 1.0;
    }
    Rng rng(10);
    const Matrix batch = random_batch(rng, 4, 9);
    CompositeLossSpec spec;  // alpha = beta = 0 by leaving the plan empty
    spec.weights = LossWeights{0.0, 0.0, 0.0};
    const BackwardResult res = backward(p, batch, spec);
    CHECK(res.rec == doctest::Approx(0.0).epsilon(1e-15));
    for (const auto& g : res.grads) {
        for (double v : g.w) CHECK(v == 0.0);
        for (double v : g.b) CHECK(v == 0.0);
    }
}

TEST_CASE("L2-only configuration: conv weight gradient is exactly 2e-6 w") {
    ArchitectureSpec a;
    a.input_h = a.input_w = 4;
    a.input_c = 1;
    a.latent_dim = 4;
    a.encoder = {LayerSpec::conv(1, 2, 3, 2, 1), LayerSpec::flatten(), LayerSpec::dense(8, 4)};
    a.decoder = {LayerSpec::dense(4, 8), LayerSpec::reshape(2, 2, 2), LayerSpec::upsample(4, 4),
                 LayerSpec::conv(2, 1, 3, 1, 1)};
    const AutoencoderParams p = init_params(a, 12);
    const Matrix zeros(2, 16);  // all-zero input keeps every activation at zero
    CompositeLossSpec spec;
    spec.weights = LossWeights{0.0, 0.0, 0.0};
    spec.l2 = 1e-6;
    const BackwardResult res = backward(p, zeros, spec);
    CHECK(res.rec == 0.0);
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
        const bool is_conv = p.arch.layer(li).kind == LayerKind::Conv;
        for (std::size_t k = 0; k < p.layers[li].w.size(); ++k) {
            const double expect = is_conv ? 2.0 * 1e-6 * p.layers[li].w[k] : 0.0;
            CHECK(res.grads[li].w[k] == expect);
        }
    }
}

TEST_CASE("optimizer_step: zero gradients leave parameters unchanged") {
    AutoencoderParams p = tiny_conv_net(13);
    const AutoencoderParams before = p;
    AdamState adam = make_adam(p);
    GradientSet zeros(p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        zeros[i].w.assign(p.layers[i].w.size(), 0.0);
        zeros[i].b.assign(p.layers[i].b.size(), 0.0);
    }
    for (int step = 0; step < 5; ++step) optimizer_step(p, zeros, adam);
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        CHECK(p.layers[i].w == before.layers[i].w);
        CHECK(p.layers[i].b == before.layers[i].b);
    }
}

TEST_CASE("optimizer_step: identical runs give identical trajectories") {
    Rng rng(14);
    const Matrix batch = random_batch(rng, 4, 64);
    CompositeLossSpec spec;
    spec.weights = LossWeights{0.0, 0.0, 0.0};
    auto run = [&]() {
        AutoencoderParams p = tiny_conv_net(15);
        AdamState adam = make_adam(p);
        for (int step = 0; step < 10; ++step) {
            const BackwardResult res = backward(p, batch, spec);
            optimizer_step(p, res.grads, adam);
        }
        return p;
    };
    const AutoencoderParams a = run();
    const AutoencoderParams b = run();
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        CHECK(a.layers[i].w == b.layers[i].w);
        CHECK(a.layers[i].b == b.layers[i].b);
    }
}

TEST_CASE("adam drives a scalar quadratic to |w| < 1e-3") {
    ArchitectureSpec a;
    a.input_h = a.input_w = 1;
    a.input_c = 1;
    a.latent_dim = 1;
    a.encoder = {LayerSpec::flatten(), LayerSpec::dense(1, 1)};
    a.decoder = {LayerSpec::dense(1, 1), LayerSpec::reshape(1, 1, 1)};
    AutoencoderParams p = init_params(a, 1);
    p.layers[1].w[0] = 1.0;  // minimize f(w) = w^2 via its gradient 2w
    AdamConfig cfg;
    cfg.lr = 1e-2;
    AdamState adam = make_adam(p, cfg);
    GradientSet g(p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        g[i].w.assign(p.layers[i].w.size(), 0.0);
        g[i].b.assign(p.layers[i].b.size(), 0.0);
    }
    for (int step = 0; step < 2000; ++step) {
        g[1].w[0] = 2.0 * p.layers[1].w[0];
        optimizer_step(p, g, adam);
    }
    CHECK(std::abs(p.layers[1].w[0]) < 1e-3);
}

TEST_CASE("parameter count of the default desk-scale architecture is stable") {
    const ArchitectureSpec arch = default_architecture(28, 28, 1, 64, 8);
    const AutoencoderParams p = init_params(arch, 0);
    CHECK(param_count(p) == 77857);
    const ArchitectureSpec cifar = default_architecture(32, 32, 3, 64, 8);
    const AutoencoderParams q = init_params(cifar, 0);
    CHECK(param_count(q) == param_count(init_params(cifar, 99)));
}

TEST_CASE("checkpoint round-trips bit-exactly and rejects bad headers") {
    const AutoencoderParams p = tiny_conv_net(21);
    const std::string text = checkpoint_to_string(p);
    const AutoencoderParams q = checkpoint_from_string(text);
    CHECK(q.init_seed == p.init_seed);
    REQUIRE(q.layers.size() == p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        CHECK(q.layers[i].w == p.layers[i].w);
        CHECK(q.layers[i].b == p.layers[i].b);
    }
    CHECK_THROWS(checkpoint_from_string("{\"format\":\"something-else\",\"version\":1}"));
    std::string bad = text;
    const auto pos = bad.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, 11, "\"version\":9");
    CHECK_THROWS(checkpoint_from_string(bad));
}

TEST_CASE("backward flags divergence as an error") {
    AutoencoderParams p = tiny_conv_net(22);
    p.layers[0].w[0] = std::numeric_limits<double>::infinity();
    Rng rng(23);
    CompositeLossSpec spec;
    CHECK_THROWS(backward(p, random_batch(rng, 2, 64), spec));
}
