#pragma once

#include "amgae/sparse.hpp"
#include "amgae/tensor.hpp"

#include <vector>

namespace amgae::ops {

// Differentiable operations as forward/backward pairs. Backward functions
// ACCUMULATE into their grad outputs; an empty (0x0) grad tensor is allocated
// and zeroed first. Passing nullptr skips that input's gradient.

// forward: kernels::matmul(a, b). grad_a += upstream x b^T, grad_b += a^T x upstream
void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& upstream, Tensor* grad_a,
                     Tensor* grad_b);

// forward: y = s x x (kernels::spmm_csr). s symmetric, so grad_x += s x upstream.
Tensor spmm(const SparseOp& s, const Tensor& x);
void spmm_backward(const SparseOp& s, const Tensor& upstream, Tensor& grad_x);

enum class Act { prelu, sigmoid, identity };

Tensor activation(const Tensor& x, Act kind, double slope = 0.25);
void activation_backward(const Tensor& x, const Tensor& upstream, Act kind, double slope,
                         Tensor& grad_x);

enum class Readout { mean, max, sum };

// Pools h rows per boundary segment into one row per segment (B x d).
Tensor readout_pool(const Tensor& h, const std::vector<index_t>& boundaries, Readout mode);
void readout_pool_backward(const Tensor& h, const std::vector<index_t>& boundaries,
                           Readout mode, const Tensor& upstream, Tensor& grad_h);

// Max-subtracted row softmax. Backward takes the forward OUTPUT y.
Tensor row_softmax(const Tensor& x);
void row_softmax_backward(const Tensor& y, const Tensor& upstream, Tensor& grad_x);

}  // namespace amgae::ops
