#pragma once

#include "amgae/tensor.hpp"

namespace amgae::kernels {

// Dense and sparse matrix kernels. The OpenMP versions parallelize over output
// rows only; every output element is accumulated by exactly one thread in a
// fixed k-ascending order, so results are bit-identical to kernels::ref at any
// thread count.

// c = a x b, or c += a x b when accumulate is set.
void matmul(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);

// c = a^T x b  (a: m x k used transposed, result k x n)
void matmul_at_b(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);

// c = a x b^T  (b: n x k used transposed, result m x n)
void matmul_a_bt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);

// y = S x x for a CSR matrix S (offsets/targets/values), x dense.
void spmm_csr(const std::vector<index_t>& offsets, const std::vector<index_t>& targets,
              const std::vector<double>& values, const Tensor& x, Tensor& y,
              bool accumulate = false);

// rows of c += bias (bias is 1 x cols)
void add_bias_rows(Tensor& c, const Tensor& bias);

// out = column sums of t (1 x cols), accumulating when asked.
void colsum(const Tensor& t, Tensor& out, bool accumulate = false);

namespace ref {
// Plain serial textbook loops, kept as the comparison baseline for tests and
// the kernel benchmark. Accumulation order per element matches the OpenMP
// kernels exactly.
void matmul(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
void matmul_at_b(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
void matmul_a_bt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
void spmm_csr(const std::vector<index_t>& offsets, const std::vector<index_t>& targets,
              const std::vector<double>& values, const Tensor& x, Tensor& y,
              bool accumulate = false);
}  // namespace ref

}  // namespace amgae::kernels
