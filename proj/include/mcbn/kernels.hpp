#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by the matrix / network / optimizer code.
//
// Every kernel has a scalar reference implementation and an AVX2 variant,
// selected once at startup from CPUID (override with force_backend or the
// MCBN_KERNEL_BACKEND environment variable). The two variants are required
// to be bit-identical: reductions are defined as four independent lane
// accumulators over stride-4 positions, combined as (l0+l1)+(l2+l3), with a
// sequential tail; elementwise kernels fix the rounding order and use no FMA.

namespace mcbn::kernels {

enum class Backend { Scalar, Avx2 };

bool cpu_supports_avx2();
Backend active_backend();
// Throws std::runtime_error if the requested backend is unsupported here.
void force_backend(Backend b);
std::string_view backend_name(Backend b);

struct KernelTable {
    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum over i of (x[i] - mean)^2
    double (*sumsq_dev)(const double* x, std::size_t n, double mean);
    // sum over i of (a[i] - b[i])^2
    double (*sumsq_diff)(const double* a, const double* b, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y[i] += x[i]
    void (*add)(const double* x, double* y, std::size_t n);
    // y[i] *= x[i]
    void (*mul)(const double* x, double* y, std::size_t n);
    // x[i] *= a
    void (*scale)(double a, double* x, std::size_t n);
    // out[i] = a * (x[i] - y[i])
    void (*scaled_diff)(double a, const double* x, const double* y, double* out, std::size_t n);
    // acc[i] += (x[i] - mu[i])^2
    void (*accum_sq_dev)(const double* x, const double* mu, double* acc, std::size_t n);
    // out[i] = ((h[i] - mu[i]) * inv_sd[i]) * gamma[i] + beta[i]
    void (*bn_apply)(const double* h, const double* mu, const double* inv_sd,
                     const double* gamma, const double* beta, double* out, std::size_t n);
    // out[i] = max(x[i], 0)
    void (*relu)(const double* x, double* out, std::size_t n);
    // dx[i] = x[i] > 0 ? dy[i] : 0
    void (*relu_backward)(const double* x, const double* dy, double* dx, std::size_t n);
    // Adam with fixed rounding order:
    //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*(g*g)
    //   p -= (lr * (m*inv_bc1)) / (sqrt(v*inv_bc2) + eps)
    void (*adam_update)(double* p, double* m, double* v, const double* g, std::size_t n,
                        double lr, double b1, double b2, double eps,
                        double inv_bc1, double inv_bc2);
};

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif

// Table for the active backend.
const KernelTable& active();

}  // namespace mcbn::kernels
