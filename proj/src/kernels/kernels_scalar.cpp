#include "mcbn/kernels.hpp"

#include <cmath>

// Reference kernels. Reductions walk four interleaved lanes and combine them
// as (l0+l1)+(l2+l3) so the AVX2 variants can match them bit for bit.

namespace mcbn::kernels {
namespace {

double sum_scalar(const double* x, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        acc0 += x[i];
        acc1 += x[i + 1];
        acc2 += x[i + 2];
        acc3 += x[i + 3];
    }
    double r = (acc0 + acc1) + (acc2 + acc3);
    for (; i < n; ++i) r += x[i];
    return r;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        acc0 += x[i] * y[i];
        acc1 += x[i + 1] * y[i + 1];
        acc2 += x[i + 2] * y[i + 2];
        acc3 += x[i + 3] * y[i + 3];
    }
    double r = (acc0 + acc1) + (acc2 + acc3);
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

double sumsq_dev_scalar(const double* x, std::size_t n, double mean) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const double d0 = x[i] - mean;
        const double d1 = x[i + 1] - mean;
        const double d2 = x[i + 2] - mean;
        const double d3 = x[i + 3] - mean;
        acc0 += d0 * d0;
        acc1 += d1 * d1;
        acc2 += d2 * d2;
        acc3 += d3 * d3;
    }
    double r = (acc0 + acc1) + (acc2 + acc3);
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        r += d * d;
    }
    return r;
}

double sumsq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        acc0 += d0 * d0;
        acc1 += d1 * d1;
        acc2 += d2 * d2;
        acc3 += d3 * d3;
    }
    double r = (acc0 + acc1) + (acc2 + acc3);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        r += d * d;
    }
    return r;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void mul_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] *= x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void scaled_diff_scalar(double a, const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * (x[i] - y[i]);
}

void accum_sq_dev_scalar(const double* x, const double* mu, double* acc, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mu[i];
        acc[i] += d * d;
    }
}

void bn_apply_scalar(const double* h, const double* mu, const double* inv_sd,
                     const double* gamma, const double* beta, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = ((h[i] - mu[i]) * inv_sd[i]) * gamma[i] + beta[i];
}

void relu_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_scalar(const double* x, const double* dy, double* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void adam_update_scalar(double* p, double* m, double* v, const double* g, std::size_t n,
                        double lr, double b1, double b2, double eps,
                        double inv_bc1, double inv_bc2) {
    const double one_minus_b1 = 1.0 - b1;
    const double one_minus_b2 = 1.0 - b2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + one_minus_b1 * g[i];
        v[i] = b2 * v[i] + one_minus_b2 * (g[i] * g[i]);
        const double mhat = m[i] * inv_bc1;
        const double vhat = v[i] * inv_bc2;
        p[i] -= (lr * mhat) / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{
        sum_scalar,        dot_scalar,  sumsq_dev_scalar, sumsq_diff_scalar,
        axpy_scalar,       add_scalar,  mul_scalar,       scale_scalar,
        scaled_diff_scalar, accum_sq_dev_scalar, bn_apply_scalar,
        relu_scalar,       relu_backward_scalar, adam_update_scalar,
    };
    return t;
}

}  // namespace mcbn::kernels
