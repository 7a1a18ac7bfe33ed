#pragma once

#include "amgae/tensor.hpp"

#include <vector>

namespace amgae {

struct LossConfig {
    double gamma = 2.0;       // SCE exponent, >= 1
    double alpha = 0.1;       // adversarial coefficient, >= 0
    bool sce_all_nodes = false;  // false -> masked rows only
    bool use_rec = true;      // ablation hook: drop the reconstruction term
    void validate() const;
};

struct SceResult {
    double loss = 0.0;
    Tensor grad_xbar;           // zero outside scope
    index_t zero_norm_rows = 0;  // rows whose term was pinned to 1 (cos := 0)
};

// Mean over scope rows of (1 - cos(x_i, xbar_i))^gamma, with gradient wrt
// xbar. Zero-norm rows contribute 1 with zero gradient. Empty scope -> 0.
SceResult sce_loss(const Tensor& x, const Tensor& xbar, const std::vector<index_t>& scope,
                   double gamma);

struct DiscLossResult {
    double loss = 0.0;
    Tensor grad_real;  // d loss / d p_real
    Tensor grad_fake;  // d loss / d p_fake
};

// Batch-mean binary cross-entropy: (sum -log p_real - log(1 - p_fake)) / B.
// Probabilities are clamped to [1e-12, 1 - 1e-12] before the logs.
DiscLossResult disc_loss(const Tensor& p_real, const Tensor& p_fake);

struct AdvLossResult {
    double loss = 0.0;
    Tensor grad_fake;
};

// Non-saturating generator objective: (sum -log p_fake) / B, same clamp.
AdvLossResult gen_adv_loss(const Tensor& p_fake);

// rec + alpha * adv
double gen_total_loss(double rec, double adv, double alpha);

}  // namespace amgae
