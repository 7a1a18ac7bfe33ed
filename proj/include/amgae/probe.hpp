#pragma once

#include "amgae/rng.hpp"
#include "amgae/tensor.hpp"

#include <cstdint>
#include <vector>

namespace amgae {

struct ProbeConfig {
    index_t epochs = 100;
    double lr = 1e-2;
    double weight_decay = 0.0;
    void validate() const;
};

// Multinomial logistic-regression head trained with Adam on frozen
// embeddings. Inputs are standardized with statistics of the fit split.
class Probe {
public:
    // Trains on (x, y); when a validation split is supplied the parameters
    // with the best validation accuracy are kept, otherwise the final ones.
    // epochs == 0 keeps the random initialization (null-baseline mode).
    void fit(const Tensor& x, const std::vector<std::int32_t>& y, index_t num_classes,
             const ProbeConfig& cfg, RngStream& rng, const Tensor* x_val = nullptr,
             const std::vector<std::int32_t>* y_val = nullptr);

    std::vector<std::int32_t> predict(const Tensor& x) const;
    // Row-softmax class probabilities, one row per input row.
    Tensor predict_proba(const Tensor& x) const;

    index_t num_classes() const { return w_.cols(); }

private:
    Tensor apply_norm(const Tensor& x) const;

    Tensor w_;  // d x C
    Tensor b_;  // 1 x C
    std::vector<double> mean_, inv_std_;
};

}  // namespace amgae
