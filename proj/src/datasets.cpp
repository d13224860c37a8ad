#include "icsplit/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace icsplit {

namespace {

std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error(path + ": truncated header");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::vector<unsigned char> read_payload(std::istream& in, std::size_t n, const std::string& path) {
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw std::runtime_error(path + ": truncated payload");
    return buf;
}

}  // namespace

ImageSet load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error(images_path + ": cannot open");
    const std::uint32_t img_magic = read_u32_be(img, images_path);
    if (img_magic != 0x00000803u)
        throw std::runtime_error(images_path + ": bad IDX image magic");
    const std::uint32_t n = read_u32_be(img, images_path);
    const std::uint32_t rows = read_u32_be(img, images_path);
    const std::uint32_t cols = read_u32_be(img, images_path);
    const std::size_t per_image = std::size_t(rows) * cols;
    const auto pixels = read_payload(img, std::size_t(n) * per_image, images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error(labels_path + ": cannot open");
    const std::uint32_t lab_magic = read_u32_be(lab, labels_path);
    if (lab_magic != 0x00000801u)
        throw std::runtime_error(labels_path + ": bad IDX label magic");
    const std::uint32_t n_lab = read_u32_be(lab, labels_path);
    if (n_lab != n)
        throw std::runtime_error(labels_path + ": label count does not match image count");
    const auto labels = read_payload(lab, n_lab, labels_path);

    ImageSet set;
    set.h = static_cast<int>(rows);
    set.w = static_cast<int>(cols);
    set.c = 1;
    set.pixels.resize(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) set.pixels[i] = double(pixels[i]);
    set.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) set.labels[i] = int(labels[i]);
    return set;
}

ImageSet load_cifar10(const std::vector<std::string>& batch_paths) {
    constexpr std::size_t kRecord = 3073;  // 1 label byte + 32*32*3 pixel bytes
    constexpr int kSide = 32;
    constexpr std::size_t kPlane = std::size_t(kSide) * kSide;

    ImageSet set;
    set.h = kSide;
    set.w = kSide;
    set.c = 3;
    for (const auto& path : batch_paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error(path + ": cannot open");
        in.seekg(0, std::ios::end);
        const std::size_t size = static_cast<std::size_t>(in.tellg());
        in.seekg(0);
        if (size == 0 || size % kRecord != 0)
            throw std::runtime_error(path + ": file length is not a multiple of 3073");
        const auto bytes = read_payload(in, size, path);
        const std::size_t records = size / kRecord;
        const std::size_t base = set.pixels.size();
        set.pixels.resize(base + records * 3 * kPlane);
        for (std::size_t r = 0; r < records; ++r) {
            const unsigned char* rec = bytes.data() + r * kRecord;
            if (rec[0] > 9) throw std::runtime_error(path + ": label byte outside 0..9");
            set.labels.push_back(int(rec[0]));
            // channel-planar (R plane, G plane, B plane) -> interleaved HxWxC
            double* out = set.pixels.data() + base + r * 3 * kPlane;
            for (std::size_t p = 0; p < kPlane; ++p)
                for (int ch = 0; ch < 3; ++ch)
                    out[p * 3 + ch] = double(rec[1 + ch * kPlane + p]);
        }
    }
    return set;
}

ImageSet load_image_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::string line;
    ImageSet set;
    bool have_shape = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!have_shape) {
            if (cells.size() != 4 || cells[0] != "shape")
                throw std::runtime_error(path + ": first row must be shape,H,W,C");
            set.h = std::stoi(cells[1]);
            set.w = std::stoi(cells[2]);
            set.c = std::stoi(cells[3]);
            if (set.h <= 0 || set.w <= 0 || set.c <= 0)
                throw std::runtime_error(path + ": invalid shape");
            have_shape = true;
            continue;
        }
        if (cells.size() != 1 + set.image_size())
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     " has wrong field count");
        set.labels.push_back(std::stoi(cells[0]));
        for (std::size_t i = 1; i < cells.size(); ++i)
            set.pixels.push_back(std::stod(cells[i]));
    }
    if (!have_shape) throw std::runtime_error(path + ": missing shape row");
    return set;
}

void save_image_csv(const std::string& path, const ImageSet& set) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "shape," << set.h << "," << set.w << "," << set.c << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < set.count(); ++i) {
        out << set.labels[i];
        for (double p : set.image(i)) out << "," << p;
        out << "\n";
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

ImageSet minmax_scale(const ImageSet& set) {
    ImageSet out = set;
    if (set.pixels.empty()) return out;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double p : set.pixels) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    if (hi == lo) {
        std::fill(out.pixels.begin(), out.pixels.end(), 0.0);
        return out;
    }
    const double inv = 1.0 / (hi - lo);
    for (double& p : out.pixels) p = (p - lo) * inv;
    return out;
}

ExperimentSplit make_experiment(const ImageSet& set, int normal_class, std::uint64_t seed,
                                const ExperimentOptions& opt) {
    std::vector<std::size_t> normal_idx, abnormal_idx;
    for (std::size_t i = 0; i < set.count(); ++i) {
        if (set.labels[i] == normal_class)
            normal_idx.push_back(i);
        else
            abnormal_idx.push_back(i);
    }
    if (normal_idx.size() < opt.n_train)
        throw std::runtime_error("make_experiment: only " + std::to_string(normal_idx.size()) +
                                 " images of class " + std::to_string(normal_class) +
                                 ", need " + std::to_string(opt.n_train));

    Rng rng(mix_seed(seed, 0xDA7Au));
    rng.shuffle(normal_idx);
    rng.shuffle(abnormal_idx);

    ExperimentSplit split;
    split.normal_class = normal_class;
    split.seed = seed;

    auto copy_into = [&](ImageSet& dst, std::vector<std::size_t>& src_log, std::size_t src) {
        dst.pixels.insert(dst.pixels.end(), set.image(src).begin(), set.image(src).end());
        dst.labels.push_back(set.labels[src]);
        src_log.push_back(src);
    };

    split.train.h = split.test.h = set.h;
    split.train.w = split.test.w = set.w;
    split.train.c = split.test.c = set.c;

    for (std::size_t i = 0; i < opt.n_train; ++i)
        copy_into(split.train, split.train_src, normal_idx[i]);

    std::size_t n_test_normal = normal_idx.size() - opt.n_train;
    if (opt.test_normal > 0) n_test_normal = std::min(n_test_normal, opt.test_normal);
    std::size_t n_test_abnormal = abnormal_idx.size();
    if (opt.test_abnormal > 0) n_test_abnormal = std::min(n_test_abnormal, opt.test_abnormal);

    for (std::size_t i = 0; i < n_test_normal; ++i) {
        copy_into(split.test, split.test_src, normal_idx[opt.n_train + i]);
        split.test_binary.push_back(0);
    }
    for (std::size_t i = 0; i < n_test_abnormal; ++i) {
        copy_into(split.test, split.test_src, abnormal_idx[i]);
        split.test_binary.push_back(1);
    }

    const std::size_t n_test = split.test.count();
    std::vector<std::size_t> order(n_test);
    for (std::size_t i = 0; i < n_test; ++i) order[i] = i;
    rng.shuffle(order);
    const std::size_t n_val = static_cast<std::size_t>(
        std::llround(opt.validation_fraction * static_cast<double>(n_test)));
    split.validation_rows.assign(order.begin(), order.begin() + n_val);
    split.evaluation_rows.assign(order.begin() + n_val, order.end());
    std::sort(split.validation_rows.begin(), split.validation_rows.end());
    std::sort(split.evaluation_rows.begin(), split.evaluation_rows.end());
    return split;
}

}  // namespace icsplit
