#include "icsplit/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace icsplit {

void PairedLatentBatch::validate() const {
    if (z.rows < 2) throw std::invalid_argument("PairedLatentBatch: need B >= 2");
    if (partner.size() != z.rows || role.size() != z.rows)
        throw std::invalid_argument("PairedLatentBatch: partner/role size mismatch");
    std::vector<char> seen(z.rows, 0);
    for (std::size_t j = 0; j < z.rows; ++j) {
        const int p = partner[j];
        if (p < 0 || std::size_t(p) >= z.rows)
            throw std::invalid_argument("PairedLatentBatch: partner out of range");
        if (std::size_t(p) == j)
            throw std::invalid_argument("PairedLatentBatch: pairing has a fixed point");
        seen[p] = 1;
    }
    for (char s : seen)
        if (!s) throw std::invalid_argument("PairedLatentBatch: pairing is not a permutation");
}

double rec_loss(const Matrix& x, const Matrix& xhat) {
    if (x.rows != xhat.rows || x.cols != xhat.cols)
        throw std::invalid_argument("rec_loss: shape mismatch");
    if (x.rows == 0) throw std::invalid_argument("rec_loss: empty batch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.v.size(); ++i) {
        const double d = x.v[i] - xhat.v[i];
        acc += d * d;
    }
    return acc / double(x.rows);
}

Matrix rec_loss_grad(const Matrix& x, const Matrix& xhat) {
    if (x.rows != xhat.rows || x.cols != xhat.cols)
        throw std::invalid_argument("rec_loss_grad: shape mismatch");
    Matrix g(xhat.rows, xhat.cols);
    const double s = 2.0 / double(x.rows);
    for (std::size_t i = 0; i < x.v.size(); ++i) g.v[i] = s * (xhat.v[i] - x.v[i]);
    return g;
}

double distance_loss_grad(const Matrix& z, const std::vector<int>& rows,
                          const std::vector<int>& partner_rows, double sign, double weight,
                          Matrix& dz) {
    if (rows.size() != partner_rows.size())
        throw std::invalid_argument("distance_loss_grad: row/partner size mismatch");
    const std::size_t b = rows.size();
    if (b == 0) return 0.0;
    const std::size_t L = z.cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
        const double* zj = z.row(std::size_t(rows[j]));
        const double* zp = z.row(std::size_t(partner_rows[j]));
        double sq = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const double d = zj[l] - zp[l];
            sq += d * d;
        }
        const double r = std::sqrt(sq / double(L) + kSqrtEps);
        acc += r;
        if (weight != 0.0 && dz.v.size() == z.v.size()) {
            // d r / d zj = (zj - zp) / (L * r); term weight: sign / B
            const double s = weight * sign / (double(b) * double(L) * r);
            double* gj = dz.row(std::size_t(rows[j]));
            double* gp = dz.row(std::size_t(partner_rows[j]));
            for (std::size_t l = 0; l < L; ++l) {
                const double d = s * (zj[l] - zp[l]);
                gj[l] += d;
                gp[l] -= d;
            }
        }
    }
    return sign * acc / double(b);
}

double closeness_loss(const PairedLatentBatch& batch) {
    batch.validate();
    std::vector<int> rows(batch.z.rows);
    for (std::size_t j = 0; j < batch.z.rows; ++j) rows[j] = int(j);
    Matrix unused;
    return distance_loss_grad(batch.z, rows, batch.partner, +1.0, 0.0, unused);
}

DispersionLoss dispersion_loss(const PairedLatentBatch& atypical, const Matrix& typical_partners) {
    atypical.validate();
    if (typical_partners.rows != atypical.z.rows || typical_partners.cols != atypical.z.cols)
        throw std::invalid_argument("dispersion_loss: typical partner shape mismatch");
    std::vector<int> rows(atypical.z.rows);
    for (std::size_t j = 0; j < atypical.z.rows; ++j) rows[j] = int(j);

    Matrix unused;
    DispersionLoss out;
    out.disp1 = distance_loss_grad(atypical.z, rows, atypical.partner, -1.0, 0.0, unused);

    // stack [z_aty; z_typ] so the shared pair kernel applies to the cross term
    Matrix stacked(2 * atypical.z.rows, atypical.z.cols);
    std::copy(atypical.z.v.begin(), atypical.z.v.end(), stacked.v.begin());
    std::copy(typical_partners.v.begin(), typical_partners.v.end(),
              stacked.v.begin() + std::ptrdiff_t(atypical.z.v.size()));
    std::vector<int> cross(atypical.z.rows);
    for (std::size_t j = 0; j < atypical.z.rows; ++j) cross[j] = int(atypical.z.rows + j);
    out.disp2 = distance_loss_grad(stacked, rows, cross, -1.0, 0.0, unused);
    return out;
}

double total_loss(double rec, double cls, double disp1, double disp2, const LossWeights& w) {
    if (!std::isfinite(rec) || !std::isfinite(cls) || !std::isfinite(disp1) ||
        !std::isfinite(disp2))
        throw std::runtime_error("total_loss: non-finite input");
    return rec + w.alpha * cls + w.beta1 * disp1 + w.beta2 * disp2;
}

std::vector<int> fixed_point_free_permutation(std::size_t n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("fixed_point_free_permutation: need n >= 2");
    std::vector<int> cycle(n);
    for (std::size_t i = 0; i < n; ++i) cycle[i] = int(i);
    rng.shuffle(cycle);
    std::vector<int> partner(n);
    for (std::size_t i = 0; i < n; ++i)
        partner[std::size_t(cycle[i])] = cycle[(i + 1) % n];
    return partner;
}

}  // namespace icsplit
