#include "amgae/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace amgae {

Tensor& ParamStore::add(std::string name, Tensor init) {
    if (has(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
    GradSlot slot;
    slot.name = name;
    slot.grad = Tensor(init.rows(), init.cols());
    slot.adam_m = Tensor(init.rows(), init.cols());
    slot.adam_v = Tensor(init.rows(), init.cols());
    slot.value = std::move(init);
    index_.emplace(std::move(name), slots_.size());
    slots_.push_back(std::move(slot));
    return slots_.back().value;
}

GradSlot& ParamStore::slot(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
        throw std::invalid_argument("ParamStore: unknown parameter " + std::string(name));
    return slots_[it->second];
}

const GradSlot& ParamStore::slot(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
        throw std::invalid_argument("ParamStore: unknown parameter " + std::string(name));
    return slots_[it->second];
}

void ParamStore::zero_grads() {
    for (GradSlot& s : slots_) s.grad.fill(0.0);
}

index_t ParamStore::total_params() const {
    index_t total = 0;
    for (const GradSlot& s : slots_) total += s.value.size();
    return total;
}

bool ParamStore::all_finite() const {
    for (const GradSlot& s : slots_)
        if (!s.value.all_finite() || !s.adam_m.all_finite() || !s.adam_v.all_finite())
            return false;
    return true;
}

void adam_step(ParamStore& params, const AdamConfig& cfg) {
    const std::int64_t t = ++params.step_count_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (GradSlot& s : params.slots_) {
        double* value = s.value.data();
        double* grad = s.grad.data();
        double* m = s.adam_m.data();
        double* v = s.adam_v.data();
        const index_t n = s.value.size();
        for (index_t i = 0; i < n; ++i) {
            const double g = grad[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
        s.grad.fill(0.0);
    }
}

}  // namespace amgae
