#pragma once

#include <cstdint>
#include <vector>

#include "icsplit/common.hpp"

namespace icsplit {

/// Weights of the unified training objective
///   total = rec + alpha * closeness + beta1 * disp1 + beta2 * disp2.
struct LossWeights {
    double alpha = 1.0;
    double beta1 = 1e-5;
    double beta2 = 1e-5;
};

enum class Role : std::uint8_t { Typical = 0, Atypical = 1 };

/// A batch of latent rows with a fixed-point-free partner permutation and
/// per-row role tags. partner[j] != j for all j; B >= 2.
struct PairedLatentBatch {
    Matrix z;                    // B x L
    std::vector<int> partner;    // fixed-point-free permutation of 0..B-1
    std::vector<Role> role;      // per row

    void validate() const;
};

/// Guard added inside the sqrt of the distance terms so the gradient stays
/// defined at zero distance. Value shift is < 1e-6 on unit-scale latents.
inline constexpr double kSqrtEps = 1e-12;

/// Mean squared reconstruction error: (1/B) * sum_j ||x_j - xhat_j||^2 over
/// vectorized images.
double rec_loss(const Matrix& x, const Matrix& xhat);

/// Gradient of rec_loss w.r.t. xhat: (2/B) (xhat - x).
Matrix rec_loss_grad(const Matrix& x, const Matrix& xhat);

/// Closeness between each latent row and its random partner:
/// (1/B) * sum_j sqrt(||z_j - z_{partner(j)}||^2 / L).
double closeness_loss(const PairedLatentBatch& batch);

/// disp1 = -(1/B) * sum_j sqrt(||z_j,aty - z_{partner(j)},aty||^2 / L) over the
/// atypical batch; disp2 = -(1/B) * sum_j sqrt(||z_j,aty - z_j,typ||^2 / L)
/// against the row-aligned typical partners. Both are <= 0.
struct DispersionLoss {
    double disp1 = 0.0;
    double disp2 = 0.0;
};
DispersionLoss dispersion_loss(const PairedLatentBatch& atypical, const Matrix& typical_partners);

double total_loss(double rec, double cls, double disp1, double disp2, const LossWeights& w);

/// Low-level value+gradient form shared by Eq.-style distance terms:
///   loss = sign * (1/B) * sum_j sqrt(||z[rows_j] - z[partner_j]||^2 / L + eps).
/// Returns the (signed) loss and accumulates weight * dLoss/dz into dz for
/// both endpoints of every pair.
double distance_loss_grad(const Matrix& z, const std::vector<int>& rows,
                          const std::vector<int>& partner_rows, double sign, double weight,
                          Matrix& dz);

/// Seeded fixed-point-free permutation of 0..n-1 (a random cycle). n >= 2.
std::vector<int> fixed_point_free_permutation(std::size_t n, Rng& rng);

}  // namespace icsplit
