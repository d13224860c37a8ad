#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>

#include "icsplit/datasets.hpp"
#include "icsplit/synthetic.hpp"

using namespace icsplit;

namespace {

void put_u32_be(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_idx_pair(const std::string& img_path, const std::string& lab_path,
                    const std::vector<std::vector<unsigned char>>& images,
                    const std::vector<unsigned char>& labels, int rows, int cols,
                    bool truncate_payload = false) {
    std::ofstream img(img_path, std::ios::binary);
    put_u32_be(img, 0x00000803u);
    put_u32_be(img, std::uint32_t(images.size()));
    put_u32_be(img, std::uint32_t(rows));
    put_u32_be(img, std::uint32_t(cols));
    for (std::size_t i = 0; i < images.size(); ++i) {
        auto payload = images[i];
        if (truncate_payload && i + 1 == images.size()) payload.resize(payload.size() / 2);
        img.write(reinterpret_cast<const char*>(payload.data()),
                  std::streamsize(payload.size()));
    }
    img.close();
    std::ofstream lab(lab_path, std::ios::binary);
    put_u32_be(lab, 0x00000801u);
    put_u32_be(lab, std::uint32_t(labels.size()));
    lab.write(reinterpret_cast<const char*>(labels.data()), std::streamsize(labels.size()));
}

}  // namespace

TEST_CASE("idx round-trip: synthetic header with 4 28x28 images") {
    Rng rng(42);
    std::vector<std::vector<unsigned char>> images(4, std::vector<unsigned char>(784));
    for (auto& im : images)
        for (auto& p : im) p = static_cast<unsigned char>(rng.index(256));
    const std::vector<unsigned char> labels = {3, 1, 4, 1};
    const auto img_path = tmp_path("icsplit_test.idx3");
    const auto lab_path = tmp_path("icsplit_test.idx1");
    write_idx_pair(img_path, lab_path, images, labels, 28, 28);

    const ImageSet set = load_idx(img_path, lab_path);
    CHECK(set.count() == 4);
    CHECK(set.h == 28);
    CHECK(set.w == 28);
    CHECK(set.c == 1);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(set.labels[i] == int(labels[i]));
        for (std::size_t p = 0; p < 784; ++p) CHECK(set.image(i)[p] == double(images[i][p]));
    }
}

TEST_CASE("idx: truncated payload is an error") {
    std::vector<std::vector<unsigned char>> images(2, std::vector<unsigned char>(784, 7));
    const auto img_path = tmp_path("icsplit_trunc.idx3");
    const auto lab_path = tmp_path("icsplit_trunc.idx1");
    write_idx_pair(img_path, lab_path, images, {0, 1}, 28, 28, /*truncate=*/true);
    CHECK_THROWS(load_idx(img_path, lab_path));
}

TEST_CASE("idx: bad magic and count mismatch are errors") {
    const auto img_path = tmp_path("icsplit_magic.idx3");
    const auto lab_path = tmp_path("icsplit_magic.idx1");
    {
        std::ofstream img(img_path, std::ios::binary);
        put_u32_be(img, 0xDEADBEEFu);
        put_u32_be(img, 0);
        put_u32_be(img, 28);
        put_u32_be(img, 28);
        std::ofstream lab(lab_path, std::ios::binary);
        put_u32_be(lab, 0x00000801u);
        put_u32_be(lab, 0);
    }
    CHECK_THROWS(load_idx(img_path, lab_path));

    std::vector<std::vector<unsigned char>> images(2, std::vector<unsigned char>(4, 1));
    write_idx_pair(img_path, lab_path, images, {0, 1, 2}, 2, 2);  // 3 labels vs 2 images
    CHECK_THROWS(load_idx(img_path, lab_path));
}

TEST_CASE("real MNIST shape (skipped unless files are present)") {
    const char* img = "data/mnist/train-images-idx3-ubyte";
    const char* lab = "data/mnist/train-labels-idx1-ubyte";
    if (!std::filesystem::exists(img) || !std::filesystem::exists(lab)) return;
    const ImageSet set = load_idx(img, lab);
    CHECK(set.h == 28);
    CHECK(set.w == 28);
    CHECK(set.count() == 60000);
}

TEST_CASE("cifar10: single synthetic record") {
    const auto path = tmp_path("icsplit_cifar.bin");
    {
        std::ofstream out(path, std::ios::binary);
        std::vector<unsigned char> rec(3073, 128);
        rec[0] = 3;
        out.write(reinterpret_cast<char*>(rec.data()), 3073);
    }
    const ImageSet set = load_cifar10({path});
    CHECK(set.count() == 1);
    CHECK(set.h == 32);
    CHECK(set.w == 32);
    CHECK(set.c == 3);
    CHECK(set.labels[0] == 3);
    for (double p : set.image(0)) CHECK(p == 128.0);
}

TEST_CASE("cifar10: channel-planar bytes land interleaved") {
    const auto path = tmp_path("icsplit_cifar2.bin");
    {
        std::ofstream out(path, std::ios::binary);
        std::vector<unsigned char> rec(3073);
        rec[0] = 9;
        for (std::size_t p = 0; p < 1024; ++p) {
            rec[1 + p] = 10;         // R plane
            rec[1 + 1024 + p] = 20;  // G plane
            rec[1 + 2048 + p] = 30;  // B plane
        }
        out.write(reinterpret_cast<char*>(rec.data()), 3073);
    }
    const ImageSet set = load_cifar10({path});
    for (std::size_t p = 0; p < 1024; ++p) {
        CHECK(set.pixels[p * 3 + 0] == 10.0);
        CHECK(set.pixels[p * 3 + 1] == 20.0);
        CHECK(set.pixels[p * 3 + 2] == 30.0);
    }
}

TEST_CASE("cifar10: bad record length and bad label byte") {
    const auto path = tmp_path("icsplit_cifar_bad.bin");
    {
        std::ofstream out(path, std::ios::binary);
        std::vector<unsigned char> bytes(3072, 0);  // label byte missing
        out.write(reinterpret_cast<char*>(bytes.data()), 3072);
    }
    CHECK_THROWS(load_cifar10({path}));
    {
        std::ofstream out(path, std::ios::binary);
        std::vector<unsigned char> rec(3073, 0);
        rec[0] = 11;
        out.write(reinterpret_cast<char*>(rec.data()), 3073);
    }
    CHECK_THROWS(load_cifar10({path}));
}

TEST_CASE("image csv round-trip") {
    SyntheticConfig cfg;
    cfg.classes = 3;
    cfg.per_class = 5;
    cfg.size = 12;
    const ImageSet set = synthetic_imageset(cfg);
    const auto path = tmp_path("icsplit_images.csv");
    save_image_csv(path, set);
    const ImageSet back = load_image_csv(path);
    CHECK(back.h == set.h);
    CHECK(back.w == set.w);
    CHECK(back.c == set.c);
    REQUIRE(back.count() == set.count());
    CHECK(back.labels == set.labels);
    CHECK(back.pixels == set.pixels);
}

TEST_CASE("minmax_scale") {
    ImageSet set;
    set.h = 1;
    set.w = 3;
    set.c = 1;
    set.labels = {0};
    set.pixels = {0.0, 51.0, 255.0};
    const ImageSet scaled = minmax_scale(set);
    CHECK(scaled.pixels[0] == 0.0);
    CHECK(scaled.pixels[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(scaled.pixels[2] == 1.0);

    set.pixels = {7.0, 7.0, 7.0};
    const ImageSet flat = minmax_scale(set);
    for (double p : flat.pixels) CHECK(p == 0.0);
}

TEST_CASE("make_experiment: composition, determinism, validation size") {
    SyntheticConfig cfg;
    cfg.classes = 4;
    cfg.per_class = 60;
    cfg.size = 12;
    const ImageSet corpus = minmax_scale(synthetic_imageset(cfg));

    ExperimentOptions opt;
    opt.n_train = 40;
    opt.test_abnormal = 0;  // all
    const ExperimentSplit a = make_experiment(corpus, 2, 99, opt);
    const ExperimentSplit b = make_experiment(corpus, 2, 99, opt);

    CHECK(a.train.count() == 40);
    for (int l : a.train.labels) CHECK(l == 2);
    CHECK(a.test.count() == 20 + 3 * 60);
    for (std::size_t i = 0; i < a.test.count(); ++i)
        CHECK(a.test_binary[i] == (a.test.labels[i] == 2 ? 0 : 1));
    CHECK(a.validation_rows.size() ==
          std::size_t(std::llround(0.2 * double(a.test.count()))));
    CHECK(a.validation_rows.size() + a.evaluation_rows.size() == a.test.count());

    CHECK(a.train_src == b.train_src);
    CHECK(a.test_src == b.test_src);
    CHECK(a.validation_rows == b.validation_rows);

    const ExperimentSplit c = make_experiment(corpus, 2, 100, opt);
    CHECK(a.train_src != c.train_src);

    std::set<std::size_t> rows(a.validation_rows.begin(), a.validation_rows.end());
    for (auto r : a.evaluation_rows) CHECK(rows.insert(r).second);
    CHECK(rows.size() == a.test.count());
}

TEST_CASE("make_experiment: insufficient normal samples is an error") {
    SyntheticConfig cfg;
    cfg.classes = 2;
    cfg.per_class = 10;
    cfg.size = 12;
    const ImageSet corpus = synthetic_imageset(cfg);
    ExperimentOptions opt;
    opt.n_train = 11;
    CHECK_THROWS(make_experiment(corpus, 0, 1, opt));
}

TEST_CASE("make_experiment: configurable test counts support both protocol readings") {
    SyntheticConfig cfg;
    cfg.classes = 3;
    cfg.per_class = 50;
    cfg.size = 12;
    const ImageSet corpus = synthetic_imageset(cfg);
    ExperimentOptions opt;
    opt.n_train = 20;
    opt.test_normal = 10;
    opt.test_abnormal = 25;
    const ExperimentSplit s = make_experiment(corpus, 1, 5, opt);
    std::size_t normals = 0, abnormals = 0;
    for (int l : s.test_binary) (l ? abnormals : normals) += 1;
    CHECK(normals == 10);
    CHECK(abnormals == 25);
}

TEST_CASE("no abnormal image ever lands in train (property over seeds)") {
    SyntheticConfig cfg;
    cfg.classes = 5;
    cfg.per_class = 30;
    cfg.size = 10;
    const ImageSet corpus = synthetic_imageset(cfg);
    ExperimentOptions opt;
    opt.n_train = 15;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ExperimentSplit s = make_experiment(corpus, int(seed % 5), seed, opt);
        for (int l : s.train.labels) CHECK(l == int(seed % 5));
    }
}

TEST_CASE("synthetic generator is deterministic and byte-like") {
    SyntheticConfig cfg;
    cfg.classes = 3;
    cfg.per_class = 4;
    cfg.size = 16;
    const ImageSet a = synthetic_imageset(cfg);
    const ImageSet b = synthetic_imageset(cfg);
    CHECK(a.pixels == b.pixels);
    for (double p : a.pixels) {
        CHECK(p >= 0.0);
        CHECK(p <= 255.0);
        CHECK(p == std::floor(p));
    }
}
