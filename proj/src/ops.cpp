#include "amgae/ops.hpp"

#include "amgae/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace amgae::ops {

namespace {

// Grad targets start out empty; materialize them zeroed on first touch.
void ensure(Tensor& grad, index_t rows, index_t cols) {
    if (grad.rows() == 0 && grad.cols() == 0) grad = Tensor(rows, cols);
    else require_shape(grad, rows, cols, "gradient accumulator");
}

void check_boundaries(const std::vector<index_t>& boundaries, index_t rows) {
    if (boundaries.size() < 2 || boundaries.front() != 0 || boundaries.back() != rows)
        throw std::invalid_argument("readout_pool: bad boundaries");
    for (std::size_t b = 1; b < boundaries.size(); ++b)
        if (boundaries[b] <= boundaries[b - 1])
            throw std::invalid_argument("readout_pool: empty segment");
}

}  // namespace

void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& upstream, Tensor* grad_a,
                     Tensor* grad_b) {
    require_shape(upstream, a.rows(), b.cols(), "matmul_backward upstream");
    if (grad_a) {
        ensure(*grad_a, a.rows(), a.cols());
        kernels::matmul_a_bt(upstream, b, *grad_a, /*accumulate=*/true);
    }
    if (grad_b) {
        ensure(*grad_b, b.rows(), b.cols());
        kernels::matmul_at_b(a, upstream, *grad_b, /*accumulate=*/true);
    }
}

Tensor spmm(const SparseOp& s, const Tensor& x) {
    if (x.rows() != s.n) throw std::invalid_argument("spmm: operator is " +
                                                     std::to_string(s.n) + " rows, input is " +
                                                     x.shape_str());
    Tensor y;
    kernels::spmm_csr(s.offsets, s.targets, s.values, x, y);
    return y;
}

void spmm_backward(const SparseOp& s, const Tensor& upstream, Tensor& grad_x) {
    require_shape(upstream, s.n, upstream.cols(), "spmm_backward upstream");
    ensure(grad_x, s.n, upstream.cols());
    kernels::spmm_csr(s.offsets, s.targets, s.values, upstream, grad_x, /*accumulate=*/true);
}

Tensor activation(const Tensor& x, Act kind, double slope) {
    Tensor y(x.rows(), x.cols());
    const double* px = x.data();
    double* py = y.data();
    const index_t n = x.size();
    switch (kind) {
        case Act::prelu:
            for (index_t i = 0; i < n; ++i) py[i] = px[i] >= 0.0 ? px[i] : slope * px[i];
            break;
        case Act::sigmoid:
            for (index_t i = 0; i < n; ++i) py[i] = 1.0 / (1.0 + std::exp(-px[i]));
            break;
        case Act::identity:
            for (index_t i = 0; i < n; ++i) py[i] = px[i];
            break;
    }
    return y;
}

void activation_backward(const Tensor& x, const Tensor& upstream, Act kind, double slope,
                         Tensor& grad_x) {
    require_shape(upstream, x.rows(), x.cols(), "activation_backward upstream");
    ensure(grad_x, x.rows(), x.cols());
    const double* px = x.data();
    const double* pu = upstream.data();
    double* pg = grad_x.data();
    const index_t n = x.size();
    switch (kind) {
        case Act::prelu:
            for (index_t i = 0; i < n; ++i) pg[i] += pu[i] * (px[i] >= 0.0 ? 1.0 : slope);
            break;
        case Act::sigmoid:
            for (index_t i = 0; i < n; ++i) {
                const double s = 1.0 / (1.0 + std::exp(-px[i]));
                pg[i] += pu[i] * s * (1.0 - s);
            }
            break;
        case Act::identity:
            for (index_t i = 0; i < n; ++i) pg[i] += pu[i];
            break;
    }
}

Tensor readout_pool(const Tensor& h, const std::vector<index_t>& boundaries, Readout mode) {
    check_boundaries(boundaries, h.rows());
    const index_t B = static_cast<index_t>(boundaries.size()) - 1;
    const index_t d = h.cols();
    Tensor out(B, d);
    for (index_t b = 0; b < B; ++b) {
        const index_t lo = boundaries[static_cast<std::size_t>(b)];
        const index_t hi = boundaries[static_cast<std::size_t>(b) + 1];
        double* orow = out.row(b);
        if (mode == Readout::max) {
            for (index_t j = 0; j < d; ++j) orow[j] = h.at(lo, j);
            for (index_t r = lo + 1; r < hi; ++r)
                for (index_t j = 0; j < d; ++j) orow[j] = std::max(orow[j], h.at(r, j));
        } else {
            for (index_t r = lo; r < hi; ++r)
                for (index_t j = 0; j < d; ++j) orow[j] += h.at(r, j);
            if (mode == Readout::mean) {
                const double inv = 1.0 / static_cast<double>(hi - lo);
                for (index_t j = 0; j < d; ++j) orow[j] *= inv;
            }
        }
    }
    return out;
}

void readout_pool_backward(const Tensor& h, const std::vector<index_t>& boundaries,
                           Readout mode, const Tensor& upstream, Tensor& grad_h) {
    check_boundaries(boundaries, h.rows());
    const index_t B = static_cast<index_t>(boundaries.size()) - 1;
    const index_t d = h.cols();
    require_shape(upstream, B, d, "readout_pool_backward upstream");
    ensure(grad_h, h.rows(), h.cols());
    for (index_t b = 0; b < B; ++b) {
        const index_t lo = boundaries[static_cast<std::size_t>(b)];
        const index_t hi = boundaries[static_cast<std::size_t>(b) + 1];
        const double* urow = upstream.row(b);
        switch (mode) {
            case Readout::sum:
                for (index_t r = lo; r < hi; ++r)
                    for (index_t j = 0; j < d; ++j) grad_h.at(r, j) += urow[j];
                break;
            case Readout::mean: {
                const double inv = 1.0 / static_cast<double>(hi - lo);
                for (index_t r = lo; r < hi; ++r)
                    for (index_t j = 0; j < d; ++j) grad_h.at(r, j) += urow[j] * inv;
                break;
            }
            case Readout::max:
                // route to the first argmax row per column
                for (index_t j = 0; j < d; ++j) {
                    index_t arg = lo;
                    for (index_t r = lo + 1; r < hi; ++r)
                        if (h.at(r, j) > h.at(arg, j)) arg = r;
                    grad_h.at(arg, j) += urow[j];
                }
                break;
        }
    }
}

Tensor row_softmax(const Tensor& x) {
    Tensor y(x.rows(), x.cols());
    for (index_t i = 0; i < x.rows(); ++i) {
        const double* xr = x.row(i);
        double* yr = y.row(i);
        double mx = xr[0];
        for (index_t j = 1; j < x.cols(); ++j) mx = std::max(mx, xr[j]);
        double total = 0.0;
        for (index_t j = 0; j < x.cols(); ++j) {
            yr[j] = std::exp(xr[j] - mx);
            total += yr[j];
        }
        const double inv = 1.0 / total;
        for (index_t j = 0; j < x.cols(); ++j) yr[j] *= inv;
    }
    return y;
}

void row_softmax_backward(const Tensor& y, const Tensor& upstream, Tensor& grad_x) {
    require_shape(upstream, y.rows(), y.cols(), "row_softmax_backward upstream");
    ensure(grad_x, y.rows(), y.cols());
    for (index_t i = 0; i < y.rows(); ++i) {
        const double* yr = y.row(i);
        const double* ur = upstream.row(i);
        double dot = 0.0;
        for (index_t j = 0; j < y.cols(); ++j) dot += ur[j] * yr[j];
        for (index_t j = 0; j < y.cols(); ++j) grad_x.at(i, j) += yr[j] * (ur[j] - dot);
    }
}

}  // namespace amgae::ops
