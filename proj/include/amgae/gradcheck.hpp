#pragma once

#include "amgae/optim.hpp"
#include "amgae/rng.hpp"

#include <functional>

namespace amgae {

// Central finite-difference verification of analytic gradients.
//
// relative error = |analytic - fd| / max(floor, |analytic|, |fd|)
struct GradCheckConfig {
    double step = 1e-5;
    index_t max_coords = 200;  // random subsample across all checked tensors
    double floor = 1e-6;       // denominator floor
};

// Checks a single tensor's gradient. `loss_fn` evaluates the scalar loss from
// the CURRENT contents of x (which is perturbed in place and restored).
double grad_check_tensor(const std::function<double()>& loss_fn, Tensor& x,
                         const Tensor& analytic_grad, RngStream& rng,
                         const GradCheckConfig& cfg = {});

// Checks every slot of a ParamStore. `compute_grads` must populate slot grads
// for the current values (zeroing first is its responsibility); `loss_fn` is a
// pure forward evaluation. Returns the worst relative error seen.
double grad_check(const std::function<double()>& loss_fn,
                  const std::function<void()>& compute_grads, ParamStore& params,
                  RngStream& rng, const GradCheckConfig& cfg = {});

}  // namespace amgae
