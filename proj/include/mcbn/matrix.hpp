#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mcbn {

// Dense row-major matrix of doubles. Rows are samples, columns are features
// or units throughout this codebase.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    bool all_finite() const;

    // Rows of this matrix selected by `idx`, in the given order.
    Matrix gather_rows(std::span<const std::size_t> idx) const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A * B^T where A is m-by-k and B is n-by-k; C is m-by-n. Both inner
// dimensions are contiguous, so each output entry is one dot kernel call.
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);

// C = A * B where A is m-by-k and B is k-by-n; row-wise axpy accumulation.
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);

// C = A^T * B where A is m-by-k and B is m-by-n; C is k-by-n.
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);

}  // namespace mcbn
