#include "amgae/kernels.hpp"

#include <stdexcept>

namespace amgae::kernels {

static void prepare_out(Tensor& c, index_t rows, index_t cols, bool accumulate, const char* what) {
    if (accumulate) {
        if (c.rows() != rows || c.cols() != cols)
            throw std::invalid_argument(std::string(what) + ": accumulate target has shape " +
                                        c.shape_str() + ", want " + std::to_string(rows) + "x" +
                                        std::to_string(cols));
        return;
    }
    if (c.rows() != rows || c.cols() != cols) c = Tensor(rows, cols);
    else c.fill(0.0);
}

void matmul(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dims " + a.shape_str() + " vs " + b.shape_str());
    const index_t m = a.rows(), k = a.cols(), n = b.cols();
    prepare_out(c, m, n, accumulate, "matmul");
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < m; ++i) {
        double* crow = pc + i * n;
        const double* arow = pa + i * k;
        for (index_t kk = 0; kk < k; ++kk) {
            const double aik = arow[kk];
            if (aik == 0.0) continue;  // exact no-op for finite inputs; big win on sparse features
            const double* brow = pb + kk * n;
            for (index_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

void matmul_at_b(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    if (a.rows() != b.rows())
        throw std::invalid_argument("matmul_at_b: row dims " + a.shape_str() + " vs " +
                                    b.shape_str());
    const index_t m = a.rows(), k = a.cols(), n = b.cols();
    prepare_out(c, k, n, accumulate, "matmul_at_b");
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    // output row r is column r of a; accumulation ascends over i per element
#pragma omp parallel for schedule(static)
    for (index_t r = 0; r < k; ++r) {
        double* crow = pc + r * n;
        for (index_t i = 0; i < m; ++i) {
            const double ari = pa[i * k + r];
            if (ari == 0.0) continue;
            const double* brow = pb + i * n;
            for (index_t j = 0; j < n; ++j) crow[j] += ari * brow[j];
        }
    }
}

void matmul_a_bt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    if (a.cols() != b.cols())
        throw std::invalid_argument("matmul_a_bt: col dims " + a.shape_str() + " vs " +
                                    b.shape_str());
    const index_t m = a.rows(), k = a.cols(), n = b.rows();
    prepare_out(c, m, n, accumulate, "matmul_a_bt");
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < m; ++i) {
        double* crow = pc + i * n;
        const double* arow = pa + i * k;
        for (index_t j = 0; j < n; ++j) {
            const double* brow = pb + j * k;
            double acc = crow[j];
            for (index_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
            crow[j] = acc;
        }
    }
}

void spmm_csr(const std::vector<index_t>& offsets, const std::vector<index_t>& targets,
              const std::vector<double>& values, const Tensor& x, Tensor& y, bool accumulate) {
    const index_t n = static_cast<index_t>(offsets.size()) - 1;
    const index_t d = x.cols();
    prepare_out(y, n, d, accumulate, "spmm_csr");
    const double* px = x.data();
    double* py = y.data();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < n; ++i) {
        double* yrow = py + i * d;
        for (index_t e = offsets[i]; e < offsets[i + 1]; ++e) {
            const double w = values[e];
            const double* xrow = px + targets[e] * d;
            for (index_t j = 0; j < d; ++j) yrow[j] += w * xrow[j];
        }
    }
}

void add_bias_rows(Tensor& c, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != c.cols())
        throw std::invalid_argument("add_bias_rows: bias " + bias.shape_str() + " vs " +
                                    c.shape_str());
    const index_t m = c.rows(), n = c.cols();
    double* pc = c.data();
    const double* pb = bias.data();
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < m; ++i) {
        double* crow = pc + i * n;
        for (index_t j = 0; j < n; ++j) crow[j] += pb[j];
    }
}

void colsum(const Tensor& t, Tensor& out, bool accumulate) {
    const index_t m = t.rows(), n = t.cols();
    prepare_out(out, 1, n, accumulate, "colsum");
    // serial over rows so the reduction order is fixed
    double* po = out.data();
    const double* pt = t.data();
    for (index_t i = 0; i < m; ++i) {
        const double* trow = pt + i * n;
        for (index_t j = 0; j < n; ++j) po[j] += trow[j];
    }
}

namespace ref {

void matmul(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    const index_t m = a.rows(), k = a.cols(), n = b.cols();
    prepare_out(c, m, n, accumulate, "ref::matmul");
    for (index_t i = 0; i < m; ++i)
        for (index_t j = 0; j < n; ++j) {
            double acc = c.at(i, j);
            for (index_t kk = 0; kk < k; ++kk) {
                const double aik = a.at(i, kk);
                if (aik == 0.0) continue;  // same zero-skip as the omp kernel (bitwise parity)
                acc += aik * b.at(kk, j);
            }
            c.at(i, j) = acc;
        }
}

void matmul_at_b(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    const index_t m = a.rows(), k = a.cols(), n = b.cols();
    prepare_out(c, k, n, accumulate, "ref::matmul_at_b");
    for (index_t r = 0; r < k; ++r)
        for (index_t j = 0; j < n; ++j) {
            double acc = c.at(r, j);
            for (index_t i = 0; i < m; ++i) {
                const double ari = a.at(i, r);
                if (ari == 0.0) continue;  // same zero-skip as the omp kernel (bitwise parity)
                acc += ari * b.at(i, j);
            }
            c.at(r, j) = acc;
        }
}

void matmul_a_bt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
    const index_t m = a.rows(), k = a.cols(), n = b.rows();
    prepare_out(c, m, n, accumulate, "ref::matmul_a_bt");
    for (index_t i = 0; i < m; ++i)
        for (index_t j = 0; j < n; ++j) {
            double acc = c.at(i, j);
            for (index_t kk = 0; kk < k; ++kk) acc += a.at(i, kk) * b.at(j, kk);
            c.at(i, j) = acc;
        }
}

void spmm_csr(const std::vector<index_t>& offsets, const std::vector<index_t>& targets,
              const std::vector<double>& values, const Tensor& x, Tensor& y, bool accumulate) {
    const index_t n = static_cast<index_t>(offsets.size()) - 1;
    const index_t d = x.cols();
    prepare_out(y, n, d, accumulate, "ref::spmm_csr");
    for (index_t i = 0; i < n; ++i)
        for (index_t e = offsets[i]; e < offsets[i + 1]; ++e)
            for (index_t j = 0; j < d; ++j) y.at(i, j) += values[e] * x.at(targets[e], j);
}

}  // namespace ref

}  // namespace amgae::kernels
