#include "mcbn/matrix.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mcbn/kernels.hpp"

namespace mcbn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols)
        throw std::invalid_argument("Matrix: data length does not match rows*cols");
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix Matrix::gather_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::memcpy(out.data() + i * cols_, data_.data() + idx[i] * cols_, cols_ * sizeof(double));
    return out;
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols() != b.cols()) throw std::invalid_argument("gemm_nt: inner dimension mismatch");
    c = Matrix(a.rows(), b.rows());
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.data() + i * a.cols();
        double* crow = c.data() + i * c.cols();
        for (std::size_t j = 0; j < b.rows(); ++j)
            crow[j] = k.dot(arow, b.data() + j * b.cols(), a.cols());
    }
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols() != b.rows()) throw std::invalid_argument("gemm_nn: inner dimension mismatch");
    c = Matrix(a.rows(), b.cols());
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.data() + i * c.cols();
        for (std::size_t p = 0; p < a.cols(); ++p)
            k.axpy(a(i, p), b.data() + p * b.cols(), crow, b.cols());
    }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows() != b.rows()) throw std::invalid_argument("gemm_tn: outer dimension mismatch");
    c = Matrix(a.cols(), b.cols());
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* brow = b.data() + i * b.cols();
        for (std::size_t p = 0; p < a.cols(); ++p)
            k.axpy(a(i, p), brow, c.data() + p * c.cols(), b.cols());
    }
}

}  // namespace mcbn
