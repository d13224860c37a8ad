#include "icsplit/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "icsplit/synthetic.hpp"

namespace icsplit {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& v, const std::string& key) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("manifest: bad number for " + key + ": '" + v + "'");
    }
    if (used != v.size())
        throw std::runtime_error("manifest: bad number for " + key + ": '" + v + "'");
    return x;
}

long long parse_int(const std::string& v, const std::string& key) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("manifest: bad integer for " + key + ": '" + v + "'");
    }
    if (used != v.size())
        throw std::runtime_error("manifest: bad integer for " + key + ": '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("manifest: bad boolean for " + key + ": '" + v + "'");
}

void require_exists(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw std::runtime_error("manifest: referenced path does not exist: " + path);
}

}  // namespace

void ManifestConfig::validate() const {
    static const std::set<std::string> known_kinds = {"idx", "cifar10", "csv", "synthetic"};
    if (!known_kinds.count(dataset.kind))
        throw std::runtime_error("manifest: unknown dataset kind '" + dataset.kind + "'");
    static const std::set<std::string> known_methods = {"ours", "cae",  "cls",     "original",
                                                        "pca",  "hog", "external"};
    if (experiment.methods.empty()) throw std::runtime_error("manifest: no methods configured");
    for (const auto& m : experiment.methods)
        if (!known_methods.count(m))
            throw std::runtime_error("manifest: unknown method '" + m + "'");
    if (experiment.normal_classes.empty() || experiment.seeds.empty())
        throw std::runtime_error("manifest: normal_classes and seeds must be nonempty");
    if (experiment.n_train < 2) throw std::runtime_error("manifest: n_train must be >= 2");
    if (experiment.validation_fraction <= 0.0 || experiment.validation_fraction >= 1.0)
        throw std::runtime_error("manifest: validation_fraction must lie in (0, 1)");
    train.validate();
    if (!(ocsvm.nu > 0.0) || ocsvm.nu > 1.0)
        throw std::runtime_error("manifest: nu must lie in (0, 1]");
    if (ocsvm.gamma < 0.0) throw std::runtime_error("manifest: gamma must be >= 0");
    if (!(ocsvm.tol > 0.0)) throw std::runtime_error("manifest: tol must be positive");
    const bool wants_external =
        std::count(experiment.methods.begin(), experiment.methods.end(), "external") > 0;
    if (wants_external && run.external_features.empty())
        throw std::runtime_error("manifest: method 'external' needs run.external_features");

    if (dataset.kind == "idx") {
        if (dataset.images.empty() || dataset.images.size() != dataset.labels.size())
            throw std::runtime_error("manifest: idx needs matching images/labels lists");
        for (const auto& p : dataset.images) require_exists(p);
        for (const auto& p : dataset.labels) require_exists(p);
    } else if (dataset.kind == "cifar10") {
        if (dataset.files.empty()) throw std::runtime_error("manifest: cifar10 needs files");
        for (const auto& p : dataset.files) require_exists(p);
    } else if (dataset.kind == "csv") {
        if (dataset.file.empty()) throw std::runtime_error("manifest: csv needs file");
        require_exists(dataset.file);
    } else {
        if (dataset.classes < 1 || dataset.classes > 10 || dataset.per_class < 1)
            throw std::runtime_error("manifest: bad synthetic classes/per_class");
    }
    if (wants_external) require_exists(run.external_features);
}

ManifestConfig parse_manifest_text(const std::string& text, const std::string& origin) {
    ManifestConfig m;
    std::stringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            if (section != "dataset" && section != "experiment" && section != "train" &&
                section != "ocsvm" && section != "run")
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto unknown = [&]() {
            return std::runtime_error(origin + ":" + std::to_string(lineno) + ": unknown key '" +
                                      key + "' in section [" + section + "]");
        };

        if (section == "dataset") {
            if (key == "kind") m.dataset.kind = value;
            else if (key == "name") m.dataset.name = value;
            else if (key == "images") m.dataset.images = split_list(value, ';');
            else if (key == "labels") m.dataset.labels = split_list(value, ';');
            else if (key == "files") m.dataset.files = split_list(value, ';');
            else if (key == "file") m.dataset.file = value;
            else if (key == "classes") m.dataset.classes = int(parse_int(value, key));
            else if (key == "per_class") m.dataset.per_class = int(parse_int(value, key));
            else if (key == "image_size") m.dataset.image_size = int(parse_int(value, key));
            else if (key == "data_seed") m.dataset.data_seed = std::uint64_t(parse_int(value, key));
            else if (key == "noise") m.dataset.noise = parse_double(value, key);
            else if (key == "atypical_fraction")
                m.dataset.atypical_fraction = parse_double(value, key);
            else throw unknown();
        } else if (section == "experiment") {
            if (key == "normal_classes") {
                m.experiment.normal_classes.clear();
                for (const auto& c : split_list(value, ','))
                    m.experiment.normal_classes.push_back(int(parse_int(c, key)));
            } else if (key == "seeds") {
                m.experiment.seeds.clear();
                for (const auto& s : split_list(value, ','))
                    m.experiment.seeds.push_back(std::uint64_t(parse_int(s, key)));
            } else if (key == "methods") {
                m.experiment.methods = split_list(value, ',');
            } else if (key == "n_train") {
                m.experiment.n_train = std::size_t(parse_int(value, key));
            } else if (key == "test_normal") {
                m.experiment.test_normal = std::size_t(parse_int(value, key));
            } else if (key == "test_abnormal") {
                m.experiment.test_abnormal = std::size_t(parse_int(value, key));
            } else if (key == "validation_fraction") {
                m.experiment.validation_fraction = parse_double(value, key);
            } else {
                throw unknown();
            }
        } else if (section == "train") {
            if (key == "batch_size") m.train.batch_size = int(parse_int(value, key));
            else if (key == "stage1_epochs") m.train.stage1_epochs = int(parse_int(value, key));
            else if (key == "stage3_epochs") m.train.stage3_epochs = int(parse_int(value, key));
            else if (key == "alpha") m.train.weights.alpha = parse_double(value, key);
            else if (key == "beta1") m.train.weights.beta1 = parse_double(value, key);
            else if (key == "beta2") m.train.weights.beta2 = parse_double(value, key);
            else if (key == "rho") m.train.rho = parse_double(value, key);
            else if (key == "learning_rate") m.train.adam.lr = parse_double(value, key);
            else if (key == "l2") m.train.l2 = parse_double(value, key);
            else if (key == "latent_dim") m.train.latent_dim = int(parse_int(value, key));
            else if (key == "base_channels") m.train.base_channels = int(parse_int(value, key));
            else if (key == "ssim_window") m.train.ssim.window = int(parse_int(value, key));
            else if (key == "ssim_sigma") m.train.ssim.sigma = parse_double(value, key);
            else if (key == "ssim_uniform") m.train.ssim.gaussian = !parse_bool(value, key);
            else throw unknown();
        } else if (section == "ocsvm") {
            if (key == "nu") m.ocsvm.nu = parse_double(value, key);
            else if (key == "gamma") m.ocsvm.gamma = parse_double(value, key);
            else if (key == "tol") m.ocsvm.tol = parse_double(value, key);
            else throw unknown();
        } else if (section == "run") {
            if (key == "output_dir") m.run.output_dir = value;
            else if (key == "threads") m.run.threads = int(parse_int(value, key));
            else if (key == "external_features") m.run.external_features = value;
            else throw unknown();
        } else {
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": key outside any section");
        }
    }
    m.validate();
    return m;
}

ManifestConfig parse_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open manifest");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest_text(ss.str(), path);
}

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

}  // namespace

std::string manifest_to_text(const ManifestConfig& m) {
    std::ostringstream o;
    o.precision(17);
    o << "[dataset]\n";
    o << "kind = " << m.dataset.kind << "\n";
    o << "name = " << m.dataset.name << "\n";
    if (!m.dataset.images.empty()) o << "images = " << join(m.dataset.images, ";") << "\n";
    if (!m.dataset.labels.empty()) o << "labels = " << join(m.dataset.labels, ";") << "\n";
    if (!m.dataset.files.empty()) o << "files = " << join(m.dataset.files, ";") << "\n";
    if (!m.dataset.file.empty()) o << "file = " << m.dataset.file << "\n";
    if (m.dataset.kind == "synthetic") {
        o << "classes = " << m.dataset.classes << "\n";
        o << "per_class = " << m.dataset.per_class << "\n";
        o << "image_size = " << m.dataset.image_size << "\n";
        o << "data_seed = " << m.dataset.data_seed << "\n";
        o << "noise = " << m.dataset.noise << "\n";
        o << "atypical_fraction = " << m.dataset.atypical_fraction << "\n";
    }
    o << "\n[experiment]\n";
    o << "normal_classes = ";
    for (std::size_t i = 0; i < m.experiment.normal_classes.size(); ++i)
        o << (i ? "," : "") << m.experiment.normal_classes[i];
    o << "\nseeds = ";
    for (std::size_t i = 0; i < m.experiment.seeds.size(); ++i)
        o << (i ? "," : "") << m.experiment.seeds[i];
    o << "\nmethods = " << join(m.experiment.methods, ",") << "\n";
    o << "n_train = " << m.experiment.n_train << "\n";
    o << "test_normal = " << m.experiment.test_normal << "\n";
    o << "test_abnormal = " << m.experiment.test_abnormal << "\n";
    o << "validation_fraction = " << m.experiment.validation_fraction << "\n";
    o << "\n[train]\n";
    o << "batch_size = " << m.train.batch_size << "\n";
    o << "stage1_epochs = " << m.train.stage1_epochs << "\n";
    o << "stage3_epochs = " << m.train.stage3_epochs << "\n";
    o << "alpha = " << m.train.weights.alpha << "\n";
    o << "beta1 = " << m.train.weights.beta1 << "\n";
    o << "beta2 = " << m.train.weights.beta2 << "\n";
    o << "rho = " << m.train.rho << "\n";
    o << "learning_rate = " << m.train.adam.lr << "\n";
    o << "l2 = " << m.train.l2 << "\n";
    o << "latent_dim = " << m.train.latent_dim << "\n";
    o << "base_channels = " << m.train.base_channels << "\n";
    o << "ssim_window = " << m.train.ssim.window << "\n";
    o << "ssim_sigma = " << m.train.ssim.sigma << "\n";
    o << "ssim_uniform = " << (m.train.ssim.gaussian ? "false" : "true") << "\n";
    o << "\n[ocsvm]\n";
    o << "nu = " << m.ocsvm.nu << "\n";
    o << "gamma = " << m.ocsvm.gamma << "\n";
    o << "tol = " << m.ocsvm.tol << "\n";
    o << "\n[run]\n";
    o << "output_dir = " << m.run.output_dir << "\n";
    o << "threads = " << m.run.threads << "\n";
    if (!m.run.external_features.empty())
        o << "external_features = " << m.run.external_features << "\n";
    return o.str();
}

ImageSet load_manifest_corpus(const ManifestConfig& m) {
    ImageSet pooled;
    if (m.dataset.kind == "idx") {
        for (std::size_t i = 0; i < m.dataset.images.size(); ++i) {
            ImageSet part = load_idx(m.dataset.images[i], m.dataset.labels[i]);
            if (pooled.count() == 0) {
                pooled = std::move(part);
            } else {
                if (part.h != pooled.h || part.w != pooled.w || part.c != pooled.c)
                    throw std::runtime_error("manifest: idx files have mixed shapes");
                pooled.pixels.insert(pooled.pixels.end(), part.pixels.begin(), part.pixels.end());
                pooled.labels.insert(pooled.labels.end(), part.labels.begin(), part.labels.end());
            }
        }
    } else if (m.dataset.kind == "cifar10") {
        pooled = load_cifar10(m.dataset.files);
    } else if (m.dataset.kind == "csv") {
        pooled = load_image_csv(m.dataset.file);
    } else {
        SyntheticConfig cfg;
        cfg.classes = m.dataset.classes;
        cfg.per_class = m.dataset.per_class;
        cfg.size = m.dataset.image_size;
        cfg.seed = m.dataset.data_seed;
        cfg.noise = m.dataset.noise;
        cfg.atypical_fraction = m.dataset.atypical_fraction;
        pooled = synthetic_imageset(cfg);
    }
    return minmax_scale(pooled);
}

}  // namespace icsplit
