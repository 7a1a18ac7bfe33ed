#pragma once

#include "amgae/tensor.hpp"

#include <vector>

namespace amgae {

// Symmetric N x N sparse operator in CSR form (adjacency structure plus a
// self-loop diagonal, weighted).
struct SparseOp {
    index_t n = 0;
    std::vector<index_t> offsets;  // length n+1
    std::vector<index_t> targets;
    std::vector<double> values;

    index_t nnz() const { return static_cast<index_t>(targets.size()); }

    // Dense equivalent, for small oracles.
    Tensor to_dense() const {
        Tensor d(n, n);
        for (index_t i = 0; i < n; ++i)
            for (index_t e = offsets[i]; e < offsets[i + 1]; ++e) d.at(i, targets[e]) += values[e];
        return d;
    }
};

}  // namespace amgae
