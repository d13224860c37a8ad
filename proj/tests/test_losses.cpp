#include <doctest.h>

#include <cmath>

#include "icsplit/losses.hpp"
#include "oracles.hpp"

using namespace icsplit;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (auto& v : m.v) v = scale * rng.normal();
    return m;
}

PairedLatentBatch make_batch(Rng& rng, std::size_t b, std::size_t l) {
    PairedLatentBatch batch;
    batch.z = random_matrix(rng, b, l);
    batch.partner = fixed_point_free_permutation(b, rng);
    batch.role.assign(b, Role::Typical);
    return batch;
}

}  // namespace

TEST_CASE("rec_loss basics") {
    Matrix x(1, 4), xhat(1, 4);
    CHECK(rec_loss(x, xhat) == 0.0);
    xhat.at(0, 2) = 0.5;
    CHECK(rec_loss(x, xhat) == doctest::Approx(0.25).epsilon(1e-15));
    Matrix bad(2, 4);
    CHECK_THROWS(rec_loss(x, bad));
}

TEST_CASE("rec_loss matches the double-loop oracle on random fixtures") {
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t b = 1 + rng.index(6), l = 1 + rng.index(10);
        const Matrix x = random_matrix(rng, b, l);
        const Matrix y = random_matrix(rng, b, l);
        CHECK(rec_loss(x, y) == doctest::Approx(oracle::naive_rec_loss(x, y)).epsilon(1e-9));
    }
}

TEST_CASE("closeness_loss: identical rows give 0 (up to the sqrt guard)") {
    Rng rng(2);
    PairedLatentBatch batch = make_batch(rng, 5, 3);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 3; ++c) batch.z.at(r, c) = 1.5;
    CHECK(closeness_loss(batch) == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("closeness_loss: forced arithmetic example B=2 L=1") {
    PairedLatentBatch batch;
    batch.z = Matrix(2, 1);
    batch.z.at(0, 0) = 0.0;
    batch.z.at(1, 0) = 2.0;
    batch.partner = {1, 0};
    batch.role = {Role::Typical, Role::Typical};
    CHECK(closeness_loss(batch) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("closeness_loss matches direct evaluation on fixtures") {
    Rng rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t b = 2 + rng.index(6), l = 1 + rng.index(8);
        PairedLatentBatch batch = make_batch(rng, b, l);
        CHECK(closeness_loss(batch) ==
              doctest::Approx(oracle::naive_pair_term(batch.z, batch.partner, kSqrtEps))
                  .epsilon(1e-9));
    }
}

TEST_CASE("closeness_loss: B=4 L=3 fixed permutation fixture") {
    Rng rng(17);
    PairedLatentBatch batch;
    batch.z = random_matrix(rng, 4, 3);
    batch.partner = {2, 3, 1, 0};
    batch.role.assign(4, Role::Typical);
    CHECK(closeness_loss(batch) ==
          doctest::Approx(oracle::naive_pair_term(batch.z, batch.partner, kSqrtEps))
              .epsilon(1e-9));
}

TEST_CASE("dispersion_loss: degenerate cases and fixtures") {
    Rng rng(4);
    PairedLatentBatch aty = make_batch(rng, 4, 4);
    aty.role.assign(4, Role::Atypical);

    SUBCASE("identical atypical rows -> disp1 == 0") {
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) aty.z.at(r, c) = -0.3;
        const Matrix typ = random_matrix(rng, 4, 4);
        const DispersionLoss d = dispersion_loss(aty, typ);
        CHECK(d.disp1 == doctest::Approx(0.0).epsilon(1e-5));
        CHECK(d.disp2 <= 0.0);
    }
    SUBCASE("atypical row equal to its typical partner -> disp2 == 0") {
        const Matrix typ = aty.z;
        const DispersionLoss d = dispersion_loss(aty, typ);
        CHECK(d.disp2 == doctest::Approx(0.0).epsilon(1e-5));
    }
    SUBCASE("B=2 L=4 fixture matches direct evaluation") {
        PairedLatentBatch small = make_batch(rng, 2, 4);
        small.role.assign(2, Role::Atypical);
        const Matrix typ = random_matrix(rng, 2, 4);
        const DispersionLoss d = dispersion_loss(small, typ);
        CHECK(d.disp1 ==
              doctest::Approx(-oracle::naive_pair_term(small.z, small.partner, kSqrtEps))
                  .epsilon(1e-9));
        CHECK(d.disp2 ==
              doctest::Approx(-oracle::naive_cross_term(small.z, typ, kSqrtEps)).epsilon(1e-9));
    }
}

TEST_CASE("total_loss composition") {
    CHECK(total_loss(3.5, 123.0, -9.0, -7.0, LossWeights{0, 0, 0}) == 3.5);
    CHECK(total_loss(1.0, 2.0, -3.0, -4.0, LossWeights{1.0, 1e-5, 1e-5}) ==
          doctest::Approx(1.0 + 2.0 - 7e-5).epsilon(1e-12));
    LossWeights defaults;
    CHECK(defaults.alpha == 1.0);
    CHECK(defaults.beta1 == 1e-5);
    CHECK(defaults.beta2 == 1e-5);
    CHECK_THROWS(total_loss(std::nan(""), 0, 0, 0, defaults));
}

TEST_CASE("pairing validation rejects fixed points and non-permutations") {
    Rng rng(8);
    PairedLatentBatch batch = make_batch(rng, 4, 2);
    batch.partner = {0, 2, 3, 1};  // fixed point at 0
    CHECK_THROWS(closeness_loss(batch));
    batch.partner = {1, 2, 1, 0};  // not a permutation
    CHECK_THROWS(closeness_loss(batch));
    batch.partner = {1, 0};  // wrong size
    CHECK_THROWS(closeness_loss(batch));
}

TEST_CASE("property: permutation invariance of closeness_loss") {
    Rng rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t b = 3 + rng.index(5);
        PairedLatentBatch batch = make_batch(rng, b, 4);
        const double base = closeness_loss(batch);

        // permute rows and conjugate the pairing
        std::vector<int> sigma(b);
        for (std::size_t i = 0; i < b; ++i) sigma[i] = int(i);
        rng.shuffle(sigma);
        PairedLatentBatch permuted;
        permuted.z = Matrix(b, 4);
        permuted.partner.resize(b);
        permuted.role.assign(b, Role::Typical);
        for (std::size_t i = 0; i < b; ++i) {
            for (std::size_t c = 0; c < 4; ++c)
                permuted.z.at(std::size_t(sigma[i]), c) = batch.z.at(i, c);
            permuted.partner[std::size_t(sigma[i])] = sigma[std::size_t(batch.partner[i])];
        }
        CHECK(closeness_loss(permuted) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("property: signs, zeros on identical latents, and scaling") {
    Rng rng(14);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t b = 2 + rng.index(5);
        PairedLatentBatch batch = make_batch(rng, b, 3);
        batch.role.assign(b, Role::Atypical);
        const Matrix typ = random_matrix(rng, b, 3);

        const double cls = closeness_loss(batch);
        const DispersionLoss d = dispersion_loss(batch, typ);
        CHECK(cls >= 0.0);
        CHECK(d.disp1 <= 0.0);
        CHECK(d.disp2 <= 0.0);

        // scaling latents by c > 0 scales magnitudes by c (guard makes this
        // approximate at 1e-6 level)
        const double c = 0.5 + rng.uniform();
        PairedLatentBatch scaled = batch;
        for (auto& v : scaled.z.v) v *= c;
        Matrix typ_scaled = typ;
        for (auto& v : typ_scaled.v) v *= c;
        CHECK(closeness_loss(scaled) == doctest::Approx(c * cls).epsilon(1e-6));
        const DispersionLoss ds = dispersion_loss(scaled, typ_scaled);
        CHECK(ds.disp1 == doctest::Approx(c * d.disp1).epsilon(1e-6));
        CHECK(ds.disp2 == doctest::Approx(c * d.disp2).epsilon(1e-6));
    }
}

TEST_CASE("gradients of the distance terms match finite differences") {
    Rng rng(22);
    const std::size_t b = 5, l = 3;
    Matrix z = random_matrix(rng, b, l);
    std::vector<int> rows = {0, 1, 2, 3, 4};
    std::vector<int> partner = {1, 2, 0, 4, 3};

    for (double sign : {+1.0, -1.0}) {
        Matrix dz(b, l);
        distance_loss_grad(z, rows, partner, sign, 1.0, dz);
        const double h = 1e-6;
        Matrix unused;
        for (std::size_t r = 0; r < b; ++r) {
            for (std::size_t c = 0; c < l; ++c) {
                Matrix zp = z, zm = z;
                zp.at(r, c) += h;
                zm.at(r, c) -= h;
                const double fp = distance_loss_grad(zp, rows, partner, sign, 0.0, unused);
                const double fm = distance_loss_grad(zm, rows, partner, sign, 0.0, unused);
                const double fd = (fp - fm) / (2 * h);
                CHECK(dz.at(r, c) == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("gradient stays finite at exactly zero distance (sqrt guard)") {
    Matrix z(2, 3);  // both rows zero: distance 0
    std::vector<int> rows = {0, 1}, partner = {1, 0};
    Matrix dz(2, 3);
    const double val = distance_loss_grad(z, rows, partner, +1.0, 1.0, dz);
    CHECK(std::isfinite(val));
    CHECK(val == doctest::Approx(std::sqrt(kSqrtEps)).epsilon(1e-12));
    for (double g : dz.v) CHECK(std::isfinite(g));
}

TEST_CASE("fixed_point_free_permutation is seeded and fixed-point free") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        Rng rng(s);
        const std::size_t n = 2 + s % 7;
        const auto p = fixed_point_free_permutation(n, rng);
        std::vector<char> seen(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(p[i] != int(i));
            seen[std::size_t(p[i])] = 1;
        }
        for (char c : seen) CHECK(c == 1);
        Rng rng2(s);
        CHECK(fixed_point_free_permutation(n, rng2) == p);
    }
    Rng rng(0);
    CHECK_THROWS(fixed_point_free_permutation(1, rng));
}
