#include "icsplit/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <list>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace icsplit {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    if (a.size() != b.size()) throw std::invalid_argument("rbf_kernel: length mismatch");
    if (!(gamma > 0.0)) throw std::invalid_argument("rbf_kernel: gamma must be positive");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::exp(-gamma * sq);
}

namespace {

/// LRU cache of kernel matrix rows.
class KernelCache {
public:
    KernelCache(const Matrix& x, double gamma, std::size_t capacity)
        : x_(x), gamma_(gamma), capacity_(std::max<std::size_t>(capacity, 2)) {}

    const std::vector<double>& row(std::size_t i) {
        auto it = map_.find(i);
        if (it != map_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.second);
            return it->second.first;
        }
        if (map_.size() >= capacity_) {
            const std::size_t victim = lru_.back();
            lru_.pop_back();
            map_.erase(victim);
        }
        lru_.push_front(i);
        std::vector<double> r(x_.rows);
        const double* xi = x_.row(i);
        for (std::size_t j = 0; j < x_.rows; ++j)
            r[j] = rbf_kernel({xi, x_.cols}, {x_.row(j), x_.cols}, gamma_);
        auto pos = map_.emplace(i, std::make_pair(std::move(r), lru_.begin())).first;
        return pos->second.first;
    }

private:
    const Matrix& x_;
    double gamma_;
    std::size_t capacity_;
    std::list<std::size_t> lru_;
    std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>>
        map_;
};

}  // namespace

OcsvmModel fit_ocsvm(const Matrix& features, const OcsvmConfig& cfg) {
    const std::size_t n = features.rows;
    if (n == 0) throw std::invalid_argument("fit_ocsvm: empty feature matrix");
    if (!(cfg.nu > 0.0) || cfg.nu > 1.0)
        throw std::invalid_argument("fit_ocsvm: nu must lie in (0, 1]");
    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / double(features.cols);
    const double c_bound = 1.0 / (cfg.nu * double(n));

    // initial feasible point: first floor(nu*n) coordinates at the bound,
    // remainder mass on the next coordinate
    std::vector<double> alpha(n, 0.0);
    const double nn = cfg.nu * double(n);
    const std::size_t full = std::min<std::size_t>(n, std::size_t(std::floor(nn)));
    for (std::size_t i = 0; i < full; ++i) alpha[i] = c_bound;
    if (full < n) alpha[full] = (nn - double(full)) * c_bound;

    KernelCache cache(features, gamma, std::max<std::size_t>(cfg.cache_rows, 2));

    // gradient of the dual: G = K alpha
    std::vector<double> grad(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (alpha[j] <= 0.0) continue;
        const auto& kj = cache.row(j);
        for (std::size_t t = 0; t < n; ++t) grad[t] += alpha[j] * kj[t];
    }

    std::uint64_t steps = 0;
    while (true) {
        // maximal violating pair
        std::size_t i_up = n, j_low = n;
        double g_min = 0.0, g_max = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (alpha[t] < c_bound && (i_up == n || grad[t] < g_min)) {
                i_up = t;
                g_min = grad[t];
            }
            if (alpha[t] > 0.0 && (j_low == n || grad[t] > g_max)) {
                j_low = t;
                g_max = grad[t];
            }
        }
        if (i_up == n || j_low == n || g_max - g_min < cfg.tol) break;
        if (steps >= cfg.max_steps)
            throw std::runtime_error("fit_ocsvm: no convergence within step cap");
        ++steps;

        const auto& ki = cache.row(i_up);
        const auto& kj = cache.row(j_low);
        double eta = ki[i_up] + kj[j_low] - 2.0 * ki[j_low];
        if (eta <= 0.0) eta = 1e-12;
        double delta = (g_max - g_min) / eta;
        delta = std::min(delta, c_bound - alpha[i_up]);
        delta = std::min(delta, alpha[j_low]);
        alpha[i_up] += delta;
        alpha[j_low] -= delta;
        // keep bound comparisons exact
        if (c_bound - alpha[i_up] < 1e-15 * c_bound) alpha[i_up] = c_bound;
        if (alpha[j_low] < 1e-15 * c_bound) alpha[j_low] = 0.0;
        for (std::size_t t = 0; t < n; ++t) grad[t] += delta * (ki[t] - kj[t]);
    }

    // offset: average gradient over free support vectors, midpoint fallback
    double rho_acc = 0.0;
    std::size_t rho_cnt = 0;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > 1e-8 * c_bound && alpha[t] < c_bound * (1.0 - 1e-8)) {
            rho_acc += grad[t];
            ++rho_cnt;
        }
    double rho;
    if (rho_cnt > 0) {
        rho = rho_acc / double(rho_cnt);
    } else {
        double g_min = std::numeric_limits<double>::infinity();
        double g_max = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (alpha[t] < c_bound) g_min = std::min(g_min, grad[t]);
            if (alpha[t] > 0.0) g_max = std::max(g_max, grad[t]);
        }
        rho = 0.5 * (g_min + g_max);
    }

    OcsvmModel model;
    model.nu = cfg.nu;
    model.gamma = gamma;
    model.rho = rho;
    model.n_train = n;
    model.upper_bound = c_bound;
    model.steps = steps;
    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * grad[t];
    model.dual_objective = 0.5 * obj;

    std::size_t n_sv = 0;
    for (double a : alpha) n_sv += a > 0.0 ? 1 : 0;
    model.support_vectors = Matrix(n_sv, features.cols);
    model.alpha.reserve(n_sv);
    std::size_t r = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] <= 0.0) continue;
        std::copy(features.row(t), features.row(t) + features.cols,
                  model.support_vectors.row(r++));
        model.alpha.push_back(alpha[t]);
    }
    return model;
}

double decision_score(const OcsvmModel& model, std::span<const double> x) {
    if (x.size() != model.support_vectors.cols)
        throw std::invalid_argument("decision_score: feature length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < model.support_vectors.rows; ++i)
        s += model.alpha[i] *
             rbf_kernel({model.support_vectors.row(i), model.support_vectors.cols}, x,
                        model.gamma);
    return s - model.rho;
}

std::vector<double> decision_scores(const OcsvmModel& model, const Matrix& rows) {
    std::vector<double> out(rows.rows);
    for (std::size_t i = 0; i < rows.rows; ++i)
        out[i] = decision_score(model, {rows.row(i), rows.cols});
    return out;
}

double choose_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("choose_threshold: size mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels) (l ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("choose_threshold: validation set must contain both classes");

    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // walking the sorted scores: below the candidate -> predicted positive
    std::size_t tp = 0, fp = 0;  // counts with score < t
    double best_t = scores[idx[0]];
    double best_bacc = -1.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        // advance over one block of equal scores
        const double s = scores[idx[i]];
        while (i < idx.size() && scores[idx[i]] == s) {
            (labels[idx[i]] ? tp : fp) += 1;
            ++i;
        }
        if (i == idx.size()) break;
        const double t = 0.5 * (s + scores[idx[i]]);
        const double bacc =
            0.5 * (double(tp) / double(n_pos) + double(n_neg - fp) / double(n_neg));
        if (bacc > best_bacc ||
            (bacc == best_bacc && std::abs(t) < std::abs(best_t))) {
            best_bacc = bacc;
            best_t = t;
        }
    }
    return best_t;
}

int predict(const OcsvmModel& model, std::span<const double> x) {
    return decision_score(model, x) < model.threshold ? 1 : 0;
}

using nlohmann::json;

void save_ocsvm(const std::string& path, const OcsvmModel& model) {
    json j;
    j["format"] = "icsplit-ocsvm";
    j["version"] = 1;
    j["nu"] = model.nu;
    j["gamma"] = model.gamma;
    j["rho"] = model.rho;
    j["threshold"] = model.threshold;
    j["n_train"] = model.n_train;
    j["upper_bound"] = model.upper_bound;
    j["alpha"] = model.alpha;
    j["sv"] = {{"rows", model.support_vectors.rows},
               {"cols", model.support_vectors.cols},
               {"v", model.support_vectors.v}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << j.dump();
    if (!out) throw std::runtime_error(path + ": write failed");
}

OcsvmModel load_ocsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    const json j = json::parse(ss.str());
    if (j.at("format") != "icsplit-ocsvm")
        throw std::runtime_error(path + ": unrecognized format field");
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error(path + ": unsupported version");
    OcsvmModel m;
    m.nu = j.at("nu");
    m.gamma = j.at("gamma");
    m.rho = j.at("rho");
    m.threshold = j.at("threshold");
    m.n_train = j.at("n_train");
    m.upper_bound = j.at("upper_bound");
    m.alpha = j.at("alpha").get<std::vector<double>>();
    m.support_vectors.rows = j.at("sv").at("rows");
    m.support_vectors.cols = j.at("sv").at("cols");
    m.support_vectors.v = j.at("sv").at("v").get<std::vector<double>>();
    if (m.support_vectors.v.size() != m.support_vectors.rows * m.support_vectors.cols ||
        m.alpha.size() != m.support_vectors.rows)
        throw std::runtime_error(path + ": inconsistent tensor sizes");
    return m;
}

}  // namespace icsplit
