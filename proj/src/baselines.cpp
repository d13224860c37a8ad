#include "icsplit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

namespace icsplit {

Matrix original_features(const ImageSet& images) {
    Matrix m(images.count(), images.image_size());
    std::copy(images.pixels.begin(), images.pixels.end(), m.v.begin());
    return m;
}

namespace {
using EMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

PcaModel pca_fit(const Matrix& features, int k) {
    const std::size_t n = features.rows, d = features.cols;
    if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 samples");
    if (k < 1) throw std::invalid_argument("pca_fit: k must be >= 1");

    Eigen::Map<const EMatrix> x(features.v.data(), long(n), long(d));
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const EMatrix xc = x.rowwise() - mean;

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + d);
    model.axes = Matrix(std::size_t(k), d);
    model.variance.assign(std::size_t(k), 0.0);

    Eigen::MatrixXd vecs;  // columns = eigenvectors of the covariance
    Eigen::VectorXd vals;
    if (d <= n) {
        const Eigen::MatrixXd cov = (xc.transpose() * xc) / double(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        vecs = es.eigenvectors();
        vals = es.eigenvalues();  // ascending
    } else {
        // Gram trick: eigenvectors of (1/n) Xc Xc^T lift to covariance
        // eigenvectors Xc^T v / sqrt(n * lambda)
        const Eigen::MatrixXd gram = (xc * xc.transpose()) / double(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        const Eigen::MatrixXd gv = es.eigenvectors();
        vals = es.eigenvalues();
        vecs = Eigen::MatrixXd::Zero(long(d), vals.size());
        for (long i = 0; i < vals.size(); ++i) {
            if (vals(i) > 0.0) {
                const Eigen::VectorXd u = xc.transpose() * gv.col(i);
                const double norm = u.norm();
                if (norm > 0.0) vecs.col(i) = u / norm;
            }
        }
    }

    const double scale = std::max(1.0, vals.size() > 0 ? std::abs(vals(vals.size() - 1)) : 1.0);
    int out = 0;
    for (long i = vals.size() - 1; i >= 0 && out < k; --i) {
        if (vals(i) <= 1e-12 * scale) break;  // rank exhausted; rest stays zero
        for (std::size_t j = 0; j < d; ++j) model.axes.at(std::size_t(out), j) = vecs(long(j), i);
        model.variance[std::size_t(out)] = vals(i);
        ++out;
    }
    return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& features) {
    if (features.cols != model.mean.size())
        throw std::invalid_argument("pca_transform: feature width mismatch");
    const std::size_t k = model.axes.rows;
    Matrix out(features.rows, k);
    for (std::size_t r = 0; r < features.rows; ++r) {
        const double* row = features.row(r);
        for (std::size_t a = 0; a < k; ++a) {
            const double* axis = model.axes.row(a);
            double s = 0.0;
            for (std::size_t j = 0; j < features.cols; ++j)
                s += (row[j] - model.mean[j]) * axis[j];
            out.at(r, a) = s;
        }
    }
    return out;
}

HogConfig HogConfig::for_shape(int h, int w) {
    HogConfig cfg;
    if (h == 28 && w == 28) {
        cfg.cell = 7;
        cfg.block = 2;
        cfg.block_stride = 2;
    } else if (h == 32 && w == 32) {
        cfg.cell = 8;
        cfg.block = 2;
        cfg.block_stride = 1;
    } else {
        // generic fallback: quarter-image cells, non-overlapping 2x2 blocks
        cfg.cell = std::max(1, std::min(h, w) / 4);
        cfg.block = 2;
        cfg.block_stride = 2;
    }
    return cfg;
}

std::size_t HogConfig::feature_length(int h, int w) const {
    const int cells_y = h / cell, cells_x = w / cell;
    if (cells_y < block || cells_x < block) return 0;
    const int by = (cells_y - block) / block_stride + 1;
    const int bx = (cells_x - block) / block_stride + 1;
    return std::size_t(by) * bx * block * block * bins;
}

std::vector<double> hog_features(std::span<const double> img, int h, int w, int c,
                                 const HogConfig& cfg) {
    if (img.size() != std::size_t(h) * w * c)
        throw std::invalid_argument("hog_features: shape mismatch");
    const int cells_y = h / cfg.cell, cells_x = w / cfg.cell;
    if (cells_y < cfg.block || cells_x < cfg.block)
        throw std::invalid_argument("hog_features: image smaller than one block");

    auto px = [&](int y, int x, int ch) {
        return img[(std::size_t(y) * w + x) * c + ch];
    };

    // per-cell orientation histograms; dominant-channel gradient, unsigned
    // orientations, linear vote interpolation between adjacent bins
    std::vector<double> hist(std::size_t(cells_y) * cells_x * cfg.bins, 0.0);
    const double bin_width = 3.14159265358979323846 / cfg.bins;
    for (int y = 0; y < cells_y * cfg.cell; ++y) {
        for (int x = 0; x < cells_x * cfg.cell; ++x) {
            double gx = 0.0, gy = 0.0, mag2 = -1.0;
            for (int ch = 0; ch < c; ++ch) {
                const double dx = px(y, std::min(x + 1, w - 1), ch) - px(y, std::max(x - 1, 0), ch);
                const double dy = px(std::min(y + 1, h - 1), x, ch) - px(std::max(y - 1, 0), x, ch);
                const double m2 = dx * dx + dy * dy;
                if (m2 > mag2) {
                    mag2 = m2;
                    gx = dx;
                    gy = dy;
                }
            }
            const double mag = std::sqrt(std::max(mag2, 0.0));
            if (mag == 0.0) continue;
            double theta = std::atan2(gy, gx);
            if (theta < 0.0) theta += 3.14159265358979323846;
            if (theta >= 3.14159265358979323846) theta = 0.0;
            const double pos = theta / bin_width - 0.5;
            int b0 = int(std::floor(pos));
            const double frac = pos - b0;
            int b1 = b0 + 1;
            if (b0 < 0) b0 += cfg.bins;
            if (b1 >= cfg.bins) b1 -= cfg.bins;
            const std::size_t cell_idx =
                (std::size_t(y / cfg.cell) * cells_x + std::size_t(x / cfg.cell)) * cfg.bins;
            hist[cell_idx + std::size_t(b0)] += mag * (1.0 - frac);
            hist[cell_idx + std::size_t(b1)] += mag * frac;
        }
    }

    const int by = (cells_y - cfg.block) / cfg.block_stride + 1;
    const int bx = (cells_x - cfg.block) / cfg.block_stride + 1;
    std::vector<double> out;
    out.reserve(std::size_t(by) * bx * cfg.block * cfg.block * cfg.bins);
    for (int yb = 0; yb < by; ++yb) {
        for (int xb = 0; xb < bx; ++xb) {
            const std::size_t base = out.size();
            for (int cy = 0; cy < cfg.block; ++cy)
                for (int cx = 0; cx < cfg.block; ++cx) {
                    const std::size_t cell_idx =
                        (std::size_t(yb * cfg.block_stride + cy) * cells_x +
                         std::size_t(xb * cfg.block_stride + cx)) *
                        cfg.bins;
                    for (int b = 0; b < cfg.bins; ++b)
                        out.push_back(hist[cell_idx + std::size_t(b)]);
                }
            double norm2 = 0.0;
            for (std::size_t i = base; i < out.size(); ++i) norm2 += out[i] * out[i];
            if (norm2 > 0.0) {
                const double inv = 1.0 / std::sqrt(norm2 + 1e-12);
                for (std::size_t i = base; i < out.size(); ++i) out[i] *= inv;
            }
        }
    }
    return out;
}

Matrix hog_features(const ImageSet& images, const HogConfig& cfg) {
    const std::size_t len = cfg.feature_length(images.h, images.w);
    if (len == 0) throw std::invalid_argument("hog_features: image smaller than one block");
    Matrix out(images.count(), len);
    for (std::size_t i = 0; i < images.count(); ++i) {
        const auto f = hog_features(images.image(i), images.h, images.w, images.c, cfg);
        std::copy(f.begin(), f.end(), out.row(i));
    }
    return out;
}

FeatureTable load_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty features file");
    std::size_t width = 0;
    {
        std::stringstream hs(line);
        std::string cell;
        std::vector<std::string> header;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
        if (header.empty() || header[0] != "label")
            throw std::runtime_error(path + ": first header column must be 'label'");
        width = header.size() - 1;
        if (width == 0) throw std::runtime_error(path + ": no feature columns");
    }
    FeatureTable table;
    std::size_t lineno = 1;
    std::vector<double> row;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        row.clear();
        bool first = true;
        while (std::getline(ls, cell, ',')) {
            if (first) {
                table.labels.push_back(std::stoi(cell));
                first = false;
            } else {
                row.push_back(std::stod(cell));
            }
        }
        if (row.size() != width)
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     " has wrong field count");
        table.features.v.insert(table.features.v.end(), row.begin(), row.end());
    }
    table.features.rows = table.labels.size();
    table.features.cols = width;
    return table;
}

void save_features_csv(const std::string& path, const Matrix& features,
                       const std::vector<int>& labels) {
    if (features.rows != labels.size())
        throw std::invalid_argument("save_features_csv: label count mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "label";
    for (std::size_t j = 0; j < features.cols; ++j) out << ",f" << j;
    out << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < features.rows; ++i) {
        out << labels[i];
        const double* r = features.row(i);
        for (std::size_t j = 0; j < features.cols; ++j) out << "," << r[j];
        out << "\n";
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

TrainConfig cae_config(TrainConfig base) {
    base.weights = LossWeights{0.0, 0.0, 0.0};
    base.rho = 0.0;
    return base;
}

TrainConfig cls_config(TrainConfig base) {
    base.weights.beta1 = 0.0;
    base.weights.beta2 = 0.0;
    base.rho = 0.0;
    return base;
}

PipelineResult cae_train(const ImageSet& train, const TrainConfig& cfg) {
    return run_pipeline(train, cae_config(cfg));
}

PipelineResult cls_train(const ImageSet& train, const TrainConfig& cfg) {
    return run_pipeline(train, cls_config(cfg));
}

}  // namespace icsplit
