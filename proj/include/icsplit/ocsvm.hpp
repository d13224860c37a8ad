#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icsplit/common.hpp"

namespace icsplit {

struct OcsvmConfig {
    double nu = 0.1;
    double gamma = 0.0;  // <= 0 selects 1/#features at fit time
    double tol = 1e-4;   // maximal KKT violation at convergence
    std::uint64_t max_steps = 10'000'000;  // coordinate pair updates
    std::size_t cache_rows = 4096;         // kernel row cache capacity
};

/// Schoelkopf-style one-class SVM: minimize (1/2) a^T K a subject to
/// 0 <= a_i <= 1/(nu N) and sum a_i = 1, decision score
/// f(x) = sum_i a_i k(x_i, x) - rho.
struct OcsvmModel {
    Matrix support_vectors;
    std::vector<double> alpha;  // aligned with support_vectors rows
    double rho = 0.0;
    double gamma = 0.0;
    double nu = 0.1;
    double threshold = 0.0;  // classification cutoff on decision scores

    // fit diagnostics
    double dual_objective = 0.0;
    std::size_t n_train = 0;
    double upper_bound = 0.0;  // box bound 1/(nu N)
    std::uint64_t steps = 0;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// SMO with maximal-violating-pair selection. Throws on non-convergence
/// within the step cap.
OcsvmModel fit_ocsvm(const Matrix& features, const OcsvmConfig& cfg = {});

double decision_score(const OcsvmModel& model, std::span<const double> x);
std::vector<double> decision_scores(const OcsvmModel& model, const Matrix& rows);

/// Threshold on decision scores maximizing balanced accuracy over the
/// midpoints of consecutive distinct sorted scores; ties resolve to the
/// candidate closest to 0. labels: 0 negative/normal, 1 positive/abnormal;
/// both classes must be present.
double choose_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

/// 1 (positive/abnormal) iff decision_score(x) < threshold; a score exactly
/// at the threshold is negative.
int predict(const OcsvmModel& model, std::span<const double> x);

void save_ocsvm(const std::string& path, const OcsvmModel& model);
OcsvmModel load_ocsvm(const std::string& path);

}  // namespace icsplit
