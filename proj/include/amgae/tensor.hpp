#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace amgae {

using index_t = std::int64_t;

// Dense row-major matrix of 64-bit reals; the unit of all numerical work.
class Tensor {
public:
    Tensor() = default;
    Tensor(index_t rows, index_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}
    Tensor(index_t rows, index_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (checked_size(rows, cols) != data_.size())
            throw std::invalid_argument("Tensor: data size does not match shape");
    }

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t size() const { return rows_ * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& at(index_t r, index_t c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    double at(index_t r, index_t c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }

    double* row(index_t r) { return data_.data() + r * cols_; }
    const double* row(index_t r) const { return data_.data() + r * cols_; }

    bool same_shape(const Tensor& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    void fill(double value) { data_.assign(data_.size(), value); }

    // NaN/Inf poison check; non-finite tensors are an error state, not a value.
    bool all_finite() const;

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

private:
    static std::size_t checked_size(index_t rows, index_t cols) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("Tensor: negative shape");
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }

    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<double> data_;
};

inline void require_shape(const Tensor& t, index_t rows, index_t cols, const char* what) {
    if (t.rows() != rows || t.cols() != cols)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(rows) +
                                    "x" + std::to_string(cols) + ", got " + t.shape_str());
}

}  // namespace amgae
