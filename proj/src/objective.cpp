#include "amgae/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amgae {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kNormFloor = 1e-150;  // below this a row counts as zero-norm

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

void check_prob_column(const Tensor& p, const char* what) {
    if (p.cols() != 1 || p.rows() < 1)
        throw std::invalid_argument(std::string(what) + ": expected a Bx1 probability column, got " +
                                    p.shape_str());
}

}  // namespace

void LossConfig::validate() const {
    if (gamma < 1.0) throw std::invalid_argument("loss: gamma must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("loss: alpha must be >= 0");
}

SceResult sce_loss(const Tensor& x, const Tensor& xbar, const std::vector<index_t>& scope,
                   double gamma) {
    if (!x.same_shape(xbar))
        throw std::invalid_argument("sce_loss: shape mismatch " + x.shape_str() + " vs " +
                                    xbar.shape_str());
    if (gamma < 1.0) throw std::invalid_argument("sce_loss: gamma must be >= 1");

    SceResult result;
    result.grad_xbar = Tensor(xbar.rows(), xbar.cols());
    if (scope.empty()) return result;

    const index_t d = x.cols();
    const double inv_count = 1.0 / static_cast<double>(scope.size());
    for (index_t row : scope) {
        if (row < 0 || row >= x.rows())
            throw std::invalid_argument("sce_loss: scope row out of range");
        const double* xr = x.row(row);
        const double* br = xbar.row(row);
        double dot = 0.0, nx2 = 0.0, nb2 = 0.0;
        for (index_t j = 0; j < d; ++j) {
            dot += xr[j] * br[j];
            nx2 += xr[j] * xr[j];
            nb2 += br[j] * br[j];
        }
        const double nx = std::sqrt(nx2), nb = std::sqrt(nb2);
        if (nx < kNormFloor || nb < kNormFloor) {
            ++result.zero_norm_rows;  // cos := 0, flat term, no gradient
            result.loss += inv_count;
            continue;
        }
        const double cosine = dot / (nx * nb);
        const double t = 1.0 - cosine;
        result.loss += inv_count * std::pow(t, gamma);

        // d term / d xbar = -gamma t^(gamma-1) * (x/(nx*nb) - cos * xbar/nb^2)
        const double coeff = -inv_count * gamma * std::pow(std::max(t, 0.0), gamma - 1.0);
        double* gr = result.grad_xbar.row(row);
        const double inv_nxnb = 1.0 / (nx * nb);
        const double cos_over_nb2 = cosine / nb2;
        for (index_t j = 0; j < d; ++j)
            gr[j] += coeff * (xr[j] * inv_nxnb - cos_over_nb2 * br[j]);
    }
    return result;
}

DiscLossResult disc_loss(const Tensor& p_real, const Tensor& p_fake) {
    check_prob_column(p_real, "disc_loss p_real");
    check_prob_column(p_fake, "disc_loss p_fake");
    if (p_real.rows() != p_fake.rows())
        throw std::invalid_argument("disc_loss: batch size mismatch");

    const index_t B = p_real.rows();
    const double inv_b = 1.0 / static_cast<double>(B);
    DiscLossResult result;
    result.grad_real = Tensor(B, 1);
    result.grad_fake = Tensor(B, 1);
    for (index_t i = 0; i < B; ++i) {
        const double pr = clamp_prob(p_real.at(i, 0));
        const double pf = clamp_prob(p_fake.at(i, 0));
        result.loss += inv_b * (-std::log(pr) - std::log(1.0 - pf));
        result.grad_real.at(i, 0) = -inv_b / pr;
        result.grad_fake.at(i, 0) = inv_b / (1.0 - pf);
    }
    return result;
}

AdvLossResult gen_adv_loss(const Tensor& p_fake) {
    check_prob_column(p_fake, "gen_adv_loss p_fake");
    const index_t B = p_fake.rows();
    const double inv_b = 1.0 / static_cast<double>(B);
    AdvLossResult result;
    result.grad_fake = Tensor(B, 1);
    for (index_t i = 0; i < B; ++i) {
        const double pf = clamp_prob(p_fake.at(i, 0));
        result.loss += inv_b * -std::log(pf);
        result.grad_fake.at(i, 0) = -inv_b / pf;
    }
    return result;
}

double gen_total_loss(double rec, double adv, double alpha) {
    if (!std::isfinite(rec) || !std::isfinite(adv))
        throw std::invalid_argument("gen_total_loss: non-finite input");
    return rec + alpha * adv;
}

}  // namespace amgae
