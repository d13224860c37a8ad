#include "icsplit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace icsplit {

void TrainConfig::validate() const {
    if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size must be >= 2");
    if (stage1_epochs < 1 || stage3_epochs < 1)
        throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (rho < 0.0 || rho > 100.0)
        throw std::invalid_argument("TrainConfig: rho must lie in [0, 100]");
    if (!(weights.alpha >= 0.0) || !(weights.beta1 >= 0.0) || !(weights.beta2 >= 0.0))
        throw std::invalid_argument("TrainConfig: loss weights must be finite and >= 0");
    if (latent_dim < 1 || base_channels < 1)
        throw std::invalid_argument("TrainConfig: bad latent_dim/base_channels");
}

std::size_t SplitAssignment::atypical_count() const {
    std::size_t n = 0;
    for (auto f : atypical) n += f;
    return n;
}

namespace {

Matrix gather_rows(const ImageSet& data, const std::vector<std::size_t>& typ,
                   const std::vector<std::size_t>& aty) {
    const std::size_t dim = data.image_size();
    Matrix m(typ.size() + aty.size(), dim);
    std::size_t r = 0;
    for (std::size_t i : typ) {
        auto img = data.image(i);
        std::copy(img.begin(), img.end(), m.row(r++));
    }
    for (std::size_t i : aty) {
        auto img = data.image(i);
        std::copy(img.begin(), img.end(), m.row(r++));
    }
    return m;
}

/// One training epoch of the unified objective. The RNG draw order is part
/// of the contract: typical shuffle, atypical shuffle (only when atypical
/// samples exist), then per step the closeness derangement, the disp1
/// derangement and the disp2 partners. Stage 1 runs through this same code
/// with zero weights and no atypical indices, so equal configurations give
/// bit-identical trajectories.
EpochStats run_epoch(TrainState& st, const ImageSet& data,
                     const std::vector<std::size_t>& typical_idx,
                     const std::vector<std::size_t>& atypical_idx, const LossWeights& weights,
                     const TrainConfig& cfg) {
    Rng rng(mix_seed(cfg.seed, 0xE90Cu, std::uint64_t(st.epoch)));

    std::vector<std::size_t> order = typical_idx;
    rng.shuffle(order);

    const std::size_t n_aty = atypical_idx.size();
    const std::size_t batch = std::size_t(cfg.batch_size);
    std::vector<std::size_t> aty_queue;
    std::size_t aty_cursor = 0;
    const bool aty_without_replacement = n_aty >= batch;
    if (aty_without_replacement) {
        aty_queue = atypical_idx;
        rng.shuffle(aty_queue);
    }

    EpochStats stats;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t bt = std::min(batch, order.size() - start);
        if (bt < 2) break;  // a 1-sample remainder cannot form pairs; drop it
        std::vector<std::size_t> typ(order.begin() + std::ptrdiff_t(start),
                                     order.begin() + std::ptrdiff_t(start + bt));

        std::vector<std::size_t> aty;
        if (n_aty > 0) {
            const std::size_t ba = std::min(batch, n_aty);
            aty.reserve(ba);
            if (aty_without_replacement) {
                if (aty_cursor + ba > aty_queue.size()) {
                    rng.shuffle(aty_queue);
                    aty_cursor = 0;
                }
                for (std::size_t i = 0; i < ba; ++i) aty.push_back(aty_queue[aty_cursor++]);
            } else {
                for (std::size_t i = 0; i < ba; ++i)
                    aty.push_back(atypical_idx[rng.index(n_aty)]);
            }
        }

        const Matrix batch_m = gather_rows(data, typ, aty);

        CompositeLossSpec spec;
        spec.weights = weights;
        spec.l2 = cfg.l2;
        spec.plan.typical_rows.resize(typ.size());
        std::iota(spec.plan.typical_rows.begin(), spec.plan.typical_rows.end(), 0);
        spec.plan.atypical_rows.resize(aty.size());
        std::iota(spec.plan.atypical_rows.begin(), spec.plan.atypical_rows.end(), int(typ.size()));

        if (typ.size() >= 2) {
            const auto perm = fixed_point_free_permutation(typ.size(), rng);
            spec.plan.closeness_partner.resize(typ.size());
            for (std::size_t j = 0; j < typ.size(); ++j)
                spec.plan.closeness_partner[j] = perm[j];
        }
        if (aty.size() >= 2) {
            const auto perm = fixed_point_free_permutation(aty.size(), rng);
            spec.plan.disp1_partner.resize(aty.size());
            for (std::size_t j = 0; j < aty.size(); ++j)
                spec.plan.disp1_partner[j] = int(typ.size()) + perm[j];
        }
        if (!aty.empty()) {
            spec.plan.disp2_partner.resize(aty.size());
            for (std::size_t j = 0; j < aty.size(); ++j)
                spec.plan.disp2_partner[j] = int(rng.index(typ.size()));
        }

        BackwardResult res;
        try {
            res = backward(st.params, batch_m, spec);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("training diverged at epoch " + std::to_string(st.epoch) +
                                     ", step " + std::to_string(steps) + ": " + e.what());
        }
        optimizer_step(st.params, res.grads, st.opt);
        stats.mean_total += res.loss;
        stats.mean_rec += res.rec;
        ++steps;
    }
    if (steps > 0) {
        stats.mean_total /= double(steps);
        stats.mean_rec /= double(steps);
    }
    st.epoch += 1;
    return stats;
}

void run_stage(TrainState& st, const ImageSet& data, const std::vector<std::size_t>& typical_idx,
               const std::vector<std::size_t>& atypical_idx, const LossWeights& weights,
               const TrainConfig& cfg, int epochs) {
    for (int e = 0; e < epochs; ++e)
        st.history.push_back(run_epoch(st, data, typical_idx, atypical_idx, weights, cfg));
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    return idx;
}

}  // namespace

TrainState stage1_train(const ImageSet& train, const TrainConfig& cfg) {
    cfg.validate();
    if (train.count() == 0) throw std::invalid_argument("stage1_train: empty training set");
    const ArchitectureSpec arch =
        default_architecture(train.h, train.w, train.c, cfg.latent_dim, cfg.base_channels);
    TrainState st;
    st.params = init_params(arch, cfg.seed);
    st.opt = make_adam(st.params, cfg.adam);
    run_stage(st, train, all_indices(train.count()), {}, LossWeights{0.0, 0.0, 0.0}, cfg,
              cfg.stage1_epochs);
    return st;
}

SplitAssignment split_by_scores(const std::vector<double>& scores, double rho) {
    if (rho < 0.0 || rho > 100.0)
        throw std::invalid_argument("split: rho must lie in [0, 100]");
    const std::size_t n = scores.size();
    const std::size_t n_aty =
        static_cast<std::size_t>(std::llround(rho / 100.0 * double(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    SplitAssignment a;
    a.rho = rho;
    a.score = scores;
    a.atypical.assign(n, 0);
    for (std::size_t i = 0; i < n_aty; ++i) a.atypical[idx[i]] = 1;
    return a;
}

SplitAssignment split(const AutoencoderParams& params, const ImageSet& train, double rho,
                      const SsimConfig& cfg) {
    return split_by_scores(score_dataset(params, train, cfg), rho);
}

TrainState stage3_train(TrainState from, const ImageSet& train, const SplitAssignment& assignment,
                        const TrainConfig& cfg) {
    cfg.validate();
    if (assignment.atypical.size() != train.count())
        throw std::invalid_argument("stage3_train: assignment does not cover the training set");
    std::vector<std::size_t> typical_idx, atypical_idx;
    for (std::size_t i = 0; i < train.count(); ++i)
        (assignment.atypical[i] ? atypical_idx : typical_idx).push_back(i);
    if (typical_idx.size() < 2)
        throw std::invalid_argument("stage3_train: need at least 2 typical samples");
    if (!atypical_idx.empty() && atypical_idx.size() < 2)
        throw std::invalid_argument("stage3_train: need at least 2 atypical samples when rho > 0");
    run_stage(from, train, typical_idx, atypical_idx, cfg.weights, cfg, cfg.stage3_epochs);
    return from;
}

PipelineResult run_pipeline(const ImageSet& train, const TrainConfig& cfg) {
    PipelineResult out;
    TrainState st = stage1_train(train, cfg);
    out.stage1_params = st.params;
    out.assignment = split(st.params, train, cfg.rho, cfg.ssim);
    out.final_state = stage3_train(std::move(st), train, out.assignment, cfg);
    return out;
}

Matrix extract_features(const AutoencoderParams& params, const Matrix& batch) {
    return encode(params, batch);
}

Matrix extract_features(const AutoencoderParams& params, const ImageSet& images) {
    const std::size_t dim = images.image_size();
    Matrix features(images.count(), std::size_t(params.arch.latent_dim));
    constexpr std::size_t kChunk = 128;
    for (std::size_t start = 0; start < images.count(); start += kChunk) {
        const std::size_t b = std::min(kChunk, images.count() - start);
        Matrix batch(b, dim);
        for (std::size_t r = 0; r < b; ++r) {
            auto img = images.image(start + r);
            std::copy(img.begin(), img.end(), batch.row(r));
        }
        const Matrix z = encode(params, batch);
        for (std::size_t r = 0; r < b; ++r)
            std::copy(z.row(r), z.row(r) + z.cols, features.row(start + r));
    }
    return features;
}

void save_split_csv(const std::string& path, const SplitAssignment& assignment,
                    const std::vector<std::size_t>& src_indices) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    const bool with_src = !src_indices.empty();
    if (with_src && src_indices.size() != assignment.score.size())
        throw std::invalid_argument("save_split_csv: src index size mismatch");
    out << (with_src ? "index,src_index,score,flag\n" : "index,score,flag\n");
    out.precision(17);
    for (std::size_t i = 0; i < assignment.score.size(); ++i) {
        out << i << ",";
        if (with_src) out << src_indices[i] << ",";
        out << assignment.score[i] << "," << (assignment.atypical[i] ? "atypical" : "typical")
            << "\n";
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace icsplit
