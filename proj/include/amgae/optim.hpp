#pragma once

#include "amgae/tensor.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace amgae {

struct GradSlot {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor adam_m;
    Tensor adam_v;
};

// Ordered collection of named parameters with their gradient and Adam moment
// buffers. All slots step together, so the bias-correction counter is shared.
class ParamStore {
public:
    Tensor& add(std::string name, Tensor init);

    bool has(std::string_view name) const { return index_.count(std::string(name)) > 0; }
    GradSlot& slot(std::string_view name);
    const GradSlot& slot(std::string_view name) const;
    Tensor& value(std::string_view name) { return slot(name).value; }
    const Tensor& value(std::string_view name) const { return slot(name).value; }
    Tensor& grad(std::string_view name) { return slot(name).grad; }

    std::vector<GradSlot>& slots() { return slots_; }
    const std::vector<GradSlot>& slots() const { return slots_; }

    void zero_grads();
    index_t total_params() const;

    std::int64_t step_count() const { return step_count_; }
    void set_step_count(std::int64_t c) { step_count_ = c; }

    // True when every value/moment tensor is finite.
    bool all_finite() const;

private:
    std::vector<GradSlot> slots_;
    std::unordered_map<std::string, std::size_t> index_;
    std::int64_t step_count_ = 0;

    friend void adam_step(ParamStore&, const struct AdamConfig&);
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected adaptive-moment update over every slot; increments the step
// counter and zeroes gradients afterwards.
void adam_step(ParamStore& params, const AdamConfig& cfg);

}  // namespace amgae
