#include "icsplit/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "icsplit/baselines.hpp"

namespace icsplit {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    return s;
}

Matrix gather(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), m.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(m.row(rows[i]), m.row(rows[i]) + m.cols, out.row(i));
    return out;
}

struct CellFeatures {
    Matrix train;
    Matrix test;
};

CellFeatures method_features(const std::string& method, const ExperimentSplit& split,
                             const ManifestConfig& m, std::uint64_t seed) {
    CellFeatures f;
    if (method == "ours" || method == "cae" || method == "cls") {
        TrainConfig tc = m.train;
        tc.seed = seed;
        if (method == "cae") tc = cae_config(tc);
        if (method == "cls") tc = cls_config(tc);
        const PipelineResult r = run_pipeline(split.train, tc);
        f.train = extract_features(r.params(), split.train);
        f.test = extract_features(r.params(), split.test);
    } else if (method == "original") {
        f.train = original_features(split.train);
        f.test = original_features(split.test);
    } else if (method == "pca") {
        const Matrix train_px = original_features(split.train);
        const PcaModel pca = pca_fit(train_px, m.train.latent_dim);
        f.train = pca_transform(pca, train_px);
        f.test = pca_transform(pca, original_features(split.test));
    } else if (method == "hog") {
        const HogConfig cfg = HogConfig::for_shape(split.train.h, split.train.w);
        f.train = hog_features(split.train, cfg);
        f.test = hog_features(split.test, cfg);
    } else if (method == "external") {
        const FeatureTable table = load_features_csv(m.run.external_features);
        auto pick = [&](const std::vector<std::size_t>& src) {
            Matrix out(src.size(), table.features.cols);
            for (std::size_t i = 0; i < src.size(); ++i) {
                if (src[i] >= table.features.rows)
                    throw std::runtime_error("external features: row index out of range");
                std::copy(table.features.row(src[i]),
                          table.features.row(src[i]) + table.features.cols, out.row(i));
            }
            return out;
        };
        f.train = pick(split.train_src);
        f.test = pick(split.test_src);
    } else {
        throw std::runtime_error("unknown method '" + method + "'");
    }
    return f;
}

std::vector<CellSpec> grid(const ManifestConfig& m) {
    std::vector<CellSpec> cells;
    for (int cls : m.experiment.normal_classes)
        for (const auto& method : m.experiment.methods)
            for (std::uint64_t seed : m.experiment.seeds)
                cells.push_back({cls, method, seed});
    return cells;
}

void run_pool(const ImageSet& corpus, const ManifestConfig& m, const std::vector<CellSpec>& cells,
              std::vector<CellResult>& results, int threads_cfg) {
    results.resize(cells.size());
    unsigned threads = threads_cfg > 0 ? unsigned(threads_cfg)
                                       : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, unsigned(cells.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            results[i] = run_cell(corpus, m, cells[i]);
        }
    };
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace

std::size_t RunReport::failures() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.ok ? 0 : 1;
    return n;
}

ExperimentSplit cell_experiment(const ImageSet& corpus, const ManifestConfig& m,
                                int normal_class) {
    ExperimentOptions opt;
    opt.n_train = m.experiment.n_train;
    opt.test_normal = m.experiment.test_normal;
    opt.test_abnormal = m.experiment.test_abnormal;
    opt.validation_fraction = m.experiment.validation_fraction;
    return make_experiment(corpus, normal_class, mix_seed(0xC1A55u, std::uint64_t(normal_class)),
                           opt);
}

CellResult run_cell(const ImageSet& corpus, const ManifestConfig& m, const CellSpec& cell) {
    CellResult res;
    res.spec = cell;
    try {
        const ExperimentSplit split = cell_experiment(corpus, m, cell.normal_class);
        const CellFeatures f = method_features(cell.method, split, m, cell.seed);

        OcsvmConfig oc;
        oc.nu = m.ocsvm.nu;
        oc.gamma = m.ocsvm.gamma;
        oc.tol = m.ocsvm.tol;
        OcsvmModel model = fit_ocsvm(f.train, oc);

        auto labels_of = [&](const std::vector<std::size_t>& rows) {
            std::vector<int> out(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) out[i] = split.test_binary[rows[i]];
            return out;
        };
        const std::vector<double> val_scores =
            decision_scores(model, gather(f.test, split.validation_rows));
        model.threshold = choose_threshold(val_scores, labels_of(split.validation_rows));

        const std::vector<double> eval_scores =
            decision_scores(model, gather(f.test, split.evaluation_rows));
        const std::vector<int> eval_labels = labels_of(split.evaluation_rows);
        std::vector<int> preds(eval_scores.size());
        for (std::size_t i = 0; i < eval_scores.size(); ++i)
            preds[i] = eval_scores[i] < model.threshold ? 1 : 0;

        res.bacc = balanced_accuracy(confusion(eval_labels, preds));
        res.threshold = model.threshold;
        res.ok = true;
    } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
    }
    return res;
}

namespace {

void write_results_csv(const std::string& path, const std::string& dataset,
                       const std::vector<CellResult>& cells) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "dataset,normal_class,method,seed,bacc,status\n";
    for (const auto& c : cells) {
        out << dataset << "," << c.spec.normal_class << "," << c.spec.method << "," << c.spec.seed
            << ",";
        if (c.ok)
            out << fmt(c.bacc) << ",ok\n";
        else
            out << ",error: " << sanitize(c.error) << "\n";
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

void write_aggregate_csv(const std::string& path, const ManifestConfig& m,
                         const std::vector<CellResult>& cells) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "dataset,normal_class";
    for (const auto& method : m.experiment.methods) out << "," << method << "_mean,"
                                                        << method << "_std";
    out << ",failures\n";

    std::map<std::pair<int, std::string>, std::vector<double>> values;
    std::map<int, std::size_t> fail_count;
    for (const auto& c : cells) {
        if (c.ok)
            values[{c.spec.normal_class, c.spec.method}].push_back(c.bacc);
        else
            fail_count[c.spec.normal_class] += 1;
    }

    std::map<std::string, std::vector<double>> class_means, class_stds;
    std::size_t total_failures = 0;
    for (int cls : m.experiment.normal_classes) {
        out << m.dataset.name << "," << cls;
        for (const auto& method : m.experiment.methods) {
            const auto it = values.find({cls, method});
            if (it == values.end() || it->second.empty()) {
                out << ",,";
                continue;
            }
            const Aggregate a = aggregate(it->second);
            out << "," << fmt(a.mean) << "," << fmt(a.stddev);
            class_means[method].push_back(a.mean);
            class_stds[method].push_back(a.stddev);
        }
        const std::size_t f = fail_count.count(cls) ? fail_count[cls] : 0;
        total_failures += f;
        out << "," << f << "\n";
    }

    out << m.dataset.name << ",all";
    for (const auto& method : m.experiment.methods) {
        const auto it = class_means.find(method);
        if (it == class_means.end() || it->second.empty()) {
            out << ",,";
            continue;
        }
        out << "," << fmt(aggregate(it->second).mean) << ","
            << fmt(aggregate(class_stds[method]).mean);
    }
    out << "," << total_failures << "\n";
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace

RunReport run_experiments(const ManifestConfig& m, const std::string& out_dir) {
    const std::string dir = out_dir.empty() ? m.run.output_dir : out_dir;
    std::filesystem::create_directories(dir);

    const ImageSet corpus = load_manifest_corpus(m);
    const std::vector<CellSpec> cells = grid(m);

    RunReport report;
    run_pool(corpus, m, cells, report.cells, m.run.threads);

    report.results_csv_path = dir + "/results.csv";
    report.aggregate_csv_path = dir + "/aggregate.csv";
    write_results_csv(report.results_csv_path, m.dataset.name, report.cells);
    write_aggregate_csv(report.aggregate_csv_path, m, report.cells);

    std::ofstream manifest_out(dir + "/manifest.txt");
    manifest_out << manifest_to_text(m);
    return report;
}

namespace {

std::vector<CurvePoint> sweep(const ManifestConfig& base, const std::vector<double>& xs,
                              void (*apply)(ManifestConfig&, double)) {
    const ImageSet corpus = load_manifest_corpus(base);

    // flatten (point x class x seed) into one pool so both cores stay busy
    struct Job {
        std::size_t point;
        CellSpec cell;
        ManifestConfig const* cfg;
    };
    std::vector<ManifestConfig> configs;
    configs.reserve(xs.size());
    for (double x : xs) {
        ManifestConfig m = base;
        m.experiment.methods = {"ours"};
        apply(m, x);
        m.validate();
        configs.push_back(std::move(m));
    }
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < xs.size(); ++p)
        for (const CellSpec& c : grid(configs[p])) jobs.push_back({p, c, &configs[p]});

    std::vector<CellResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            results[i] = run_cell(corpus, *jobs[i].cfg, jobs[i].cell);
        }
    };
    unsigned threads = base.run.threads > 0 ? unsigned(base.run.threads)
                                            : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, unsigned(std::max<std::size_t>(jobs.size(), 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<CurvePoint> points(xs.size());
    for (std::size_t p = 0; p < xs.size(); ++p) {
        points[p].x = xs[p];
        std::vector<double> vals;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].point != p) continue;
            if (results[i].ok)
                vals.push_back(results[i].bacc);
            else
                points[p].failures += 1;
        }
        if (!vals.empty()) {
            const Aggregate a = aggregate(vals);
            points[p].mean = a.mean;
            points[p].stddev = a.stddev;
        }
    }
    return points;
}

}  // namespace

std::vector<CurvePoint> sweep_rho(const ManifestConfig& m, const std::vector<double>& rhos) {
    for (double r : rhos)
        if (r < 0.0 || r > 100.0)
            throw std::invalid_argument("sweep_rho: rho values must lie in [0, 100]");
    if (rhos.empty()) throw std::invalid_argument("sweep_rho: empty rho list");
    return sweep(m, rhos, [](ManifestConfig& cfg, double x) { cfg.train.rho = x; });
}

std::vector<CurvePoint> sweep_beta(const ManifestConfig& m, const std::vector<double>& betas) {
    for (double b : betas)
        if (!(b > 0.0)) throw std::invalid_argument("sweep_beta: beta values must be positive");
    if (betas.empty()) throw std::invalid_argument("sweep_beta: empty beta list");
    return sweep(m, betas, [](ManifestConfig& cfg, double x) {
        cfg.train.weights.beta1 = x;
        cfg.train.weights.beta2 = x;
    });
}

void write_curve_csv(const std::string& path, const std::string& x_name,
                     const std::vector<CurvePoint>& points) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << x_name << ",mean_bacc,std_bacc,failures\n";
    for (const auto& p : points) {
        char xbuf[40];
        std::snprintf(xbuf, sizeof(xbuf), "%.9g", p.x);
        out << xbuf << "," << fmt(p.mean) << "," << fmt(p.stddev) << "," << p.failures << "\n";
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<CurvePoint> read_curve_csv(const std::string& path, std::string* x_name) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty curve file");
    std::stringstream hs(line);
    std::vector<std::string> header;
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
    if (header.size() < 3) throw std::runtime_error(path + ": malformed curve header");
    if (x_name) *x_name = header[0];
    std::vector<CurvePoint> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() < 3) throw std::runtime_error(path + ": malformed curve row");
        CurvePoint p;
        p.x = std::stod(cells[0]);
        p.mean = std::stod(cells[1]);
        p.stddev = std::stod(cells[2]);
        if (cells.size() > 3) p.failures = std::size_t(std::stoull(cells[3]));
        points.push_back(p);
    }
    return points;
}

void write_split_report(const ManifestConfig& m, int normal_class, std::uint64_t seed,
                        const std::string& out_path, std::ostream& log) {
    const ImageSet corpus = load_manifest_corpus(m);
    const ExperimentSplit exp = cell_experiment(corpus, m, normal_class);
    TrainConfig tc = m.train;
    tc.seed = seed;
    const TrainState st = stage1_train(exp.train, tc);
    const SplitAssignment assignment = split(st.params, exp.train, tc.rho, tc.ssim);
    save_split_csv(out_path, assignment, exp.train_src);

    std::vector<std::size_t> order(assignment.score.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return assignment.score[a] < assignment.score[b];
    });
    const std::size_t k = std::min<std::size_t>(5, order.size());
    log << "lowest-similarity sample indices (train row / corpus row):\n";
    for (std::size_t i = 0; i < k; ++i)
        log << "  " << order[i] << " / " << exp.train_src[order[i]] << "  score "
            << fmt(assignment.score[order[i]]) << "\n";
    log << "highest-similarity sample indices (train row / corpus row):\n";
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = order[order.size() - 1 - i];
        log << "  " << j << " / " << exp.train_src[j] << "  score "
            << fmt(assignment.score[j]) << "\n";
    }
}

}  // namespace icsplit
