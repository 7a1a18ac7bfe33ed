#include "amgae/probe.hpp"

#include "amgae/kernels.hpp"
#include "amgae/metrics.hpp"
#include "amgae/ops.hpp"
#include "amgae/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace amgae {

void ProbeConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("probe: epochs must be >= 0");
    if (lr <= 0.0) throw std::invalid_argument("probe: lr must be > 0");
    if (weight_decay < 0.0) throw std::invalid_argument("probe: weight_decay must be >= 0");
}

Tensor Probe::apply_norm(const Tensor& x) const {
    if (static_cast<std::size_t>(x.cols()) != mean_.size())
        throw std::invalid_argument("probe: input width differs from the fitted width");
    Tensor out(x.rows(), x.cols());
    for (index_t r = 0; r < x.rows(); ++r)
        for (index_t c = 0; c < x.cols(); ++c)
            out.at(r, c) = (x.at(r, c) - mean_[static_cast<std::size_t>(c)]) *
                           inv_std_[static_cast<std::size_t>(c)];
    return out;
}

void Probe::fit(const Tensor& x, const std::vector<std::int32_t>& y, index_t num_classes,
                const ProbeConfig& cfg, RngStream& rng, const Tensor* x_val,
                const std::vector<std::int32_t>* y_val) {
    cfg.validate();
    if (x.rows() == 0) throw std::invalid_argument("probe: empty training set");
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw std::invalid_argument("probe: feature/label count mismatch");
    if (num_classes < 2) throw std::invalid_argument("probe: need at least two classes");
    for (std::int32_t lab : y)
        if (lab < 0 || lab >= num_classes)
            throw std::invalid_argument("probe: label outside [0, num_classes)");
    if ((x_val == nullptr) != (y_val == nullptr))
        throw std::invalid_argument("probe: validation features and labels go together");

    const index_t d = x.cols();
    mean_.assign(static_cast<std::size_t>(d), 0.0);
    inv_std_.assign(static_cast<std::size_t>(d), 1.0);
    for (index_t r = 0; r < x.rows(); ++r)
        for (index_t c = 0; c < d; ++c) mean_[static_cast<std::size_t>(c)] += x.at(r, c);
    for (auto& m : mean_) m /= static_cast<double>(x.rows());
    for (index_t c = 0; c < d; ++c) {
        double var = 0.0;
        for (index_t r = 0; r < x.rows(); ++r) {
            const double dv = x.at(r, c) - mean_[static_cast<std::size_t>(c)];
            var += dv * dv;
        }
        var /= static_cast<double>(x.rows());
        inv_std_[static_cast<std::size_t>(c)] = var > 1e-12 ? 1.0 / std::sqrt(var) : 1.0;
    }

    ParamStore params;
    {
        const double bound = std::sqrt(6.0 / static_cast<double>(d + num_classes));
        Tensor w(d, num_classes);
        for (index_t i = 0; i < w.size(); ++i)
            w.data()[i] = (rng.next_double() * 2.0 - 1.0) * bound;
        params.add("w", std::move(w));
        params.add("b", Tensor(1, num_classes));
    }

    const Tensor xn = apply_norm(x);
    AdamConfig adam;
    adam.lr = cfg.lr;

    w_ = params.value("w");
    b_ = params.value("b");
    Tensor best_w = w_, best_b = b_;
    double best_val = -1.0;
    for (index_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // full-batch softmax cross-entropy step
        Tensor logits;
        kernels::matmul(xn, params.value("w"), logits);
        kernels::add_bias_rows(logits, params.value("b"));
        Tensor probs = ops::row_softmax(logits);

        Tensor grad_logits = probs;  // softmax CE: p - onehot, averaged over rows
        const double inv_n = 1.0 / static_cast<double>(xn.rows());
        for (index_t r = 0; r < grad_logits.rows(); ++r) {
            grad_logits.at(r, y[static_cast<std::size_t>(r)]) -= 1.0;
            for (index_t c = 0; c < grad_logits.cols(); ++c) grad_logits.at(r, c) *= inv_n;
        }
        kernels::matmul_at_b(xn, grad_logits, params.grad("w"), /*accumulate=*/true);
        kernels::colsum(grad_logits, params.grad("b"), /*accumulate=*/true);
        if (cfg.weight_decay > 0.0) {
            Tensor& gw = params.grad("w");
            const Tensor& w = params.value("w");
            for (index_t i = 0; i < gw.size(); ++i)
                gw.data()[i] += cfg.weight_decay * w.data()[i];
        }
        adam_step(params, adam);

        w_ = params.value("w");
        b_ = params.value("b");
        if (x_val) {
            const double acc = accuracy(predict(*x_val), *y_val);
            if (acc > best_val) {
                best_val = acc;
                best_w = w_;
                best_b = b_;
            }
        }
    }
    if (x_val && cfg.epochs > 0) {
        w_ = best_w;
        b_ = best_b;
    }
}

std::vector<std::int32_t> Probe::predict(const Tensor& x) const {
    Tensor probs = predict_proba(x);
    std::vector<std::int32_t> out(static_cast<std::size_t>(probs.rows()));
    for (index_t r = 0; r < probs.rows(); ++r) {
        index_t best = 0;
        for (index_t c = 1; c < probs.cols(); ++c)
            if (probs.at(r, c) > probs.at(r, best)) best = c;
        out[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(best);
    }
    return out;
}

Tensor Probe::predict_proba(const Tensor& x) const {
    if (w_.rows() == 0) throw std::logic_error("probe: fit() has not been called");
    Tensor logits;
    kernels::matmul(apply_norm(x), w_, logits);
    kernels::add_bias_rows(logits, b_);
    return ops::row_softmax(logits);
}

}  // namespace amgae
