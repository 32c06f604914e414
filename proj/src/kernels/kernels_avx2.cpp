#if defined(__x86_64__) || defined(_M_X64)

#include "mcbn/kernels.hpp"

#include <immintrin.h>

#include <cmath>

// AVX2 kernels. One __m256d holds the four reduction lanes of the scalar
// reference; horizontal combines use the same (l0+l1)+(l2+l3) tree. No FMA:
// the reference rounds mul and add separately.

namespace mcbn::kernels {
namespace {

inline double hsum_lanes(__m256d acc) {
    const __m128d lo = _mm256_castpd256_pd128(acc);   // l0, l1
    const __m128d hi = _mm256_extractf128_pd(acc, 1); // l2, l3
    const double a01 = _mm_cvtsd_f64(_mm_hadd_pd(lo, lo)); // l0 + l1
    const double a23 = _mm_cvtsd_f64(_mm_hadd_pd(hi, hi)); // l2 + l3
    return a01 + a23;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double r = hsum_lanes(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, p);
    }
    double r = hsum_lanes(acc);
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

double sumsq_dev_avx2(const double* x, std::size_t n, double mean) {
    const __m256d vm = _mm256_set1_pd(mean);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vm);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double r = hsum_lanes(acc);
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        r += d * d;
    }
    return r;
}

double sumsq_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double r = hsum_lanes(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        r += d * d;
    }
    return r;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d p = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void add_avx2(const double* x, double* y, std::size_t n) {
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void mul_avx2(const double* x, double* y, std::size_t n) {
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] *= x[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
    for (; i < n; ++i) x[i] *= a;
}

void scaled_diff_avx2(double a, const double* x, const double* y, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, d));
    }
    for (; i < n; ++i) out[i] = a * (x[i] - y[i]);
}

void accum_sq_dev_avx2(const double* x, const double* mu, double* acc, std::size_t n) {
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(mu + i));
        const __m256d sq = _mm256_mul_pd(d, d);
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), sq));
    }
    for (; i < n; ++i) {
        const double d = x[i] - mu[i];
        acc[i] += d * d;
    }
}

void bn_apply_avx2(const double* h, const double* mu, const double* inv_sd,
                   const double* gamma, const double* beta, double* out, std::size_t n) {
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d centered = _mm256_sub_pd(_mm256_loadu_pd(h + i), _mm256_loadu_pd(mu + i));
        const __m256d norm = _mm256_mul_pd(centered, _mm256_loadu_pd(inv_sd + i));
        const __m256d scaled = _mm256_mul_pd(norm, _mm256_loadu_pd(gamma + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(scaled, _mm256_loadu_pd(beta + i)));
    }
    for (; i < n; ++i) out[i] = ((h[i] - mu[i]) * inv_sd[i]) * gamma[i] + beta[i];
}

void relu_avx2(const double* x, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        // a>b ? a : b with b = +0.0 matches the scalar (x > 0 ? x : 0) on
        // NaN and signed zero.
        _mm256_storeu_pd(out + i, _mm256_max_pd(v, zero));
    }
    for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_avx2(const double* x, const double* dy, double* dx, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(dx + i, _mm256_and_pd(mask, _mm256_loadu_pd(dy + i)));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void adam_update_avx2(double* p, double* m, double* v, const double* g, std::size_t n,
                      double lr, double b1, double b2, double eps,
                      double inv_bc1, double inv_bc2) {
    const __m256d vb1 = _mm256_set1_pd(b1);
    const __m256d vb2 = _mm256_set1_pd(b2);
    const __m256d v1mb1 = _mm256_set1_pd(1.0 - b1);
    const __m256d v1mb2 = _mm256_set1_pd(1.0 - b2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vibc1 = _mm256_set1_pd(inv_bc1);
    const __m256d vibc2 = _mm256_set1_pd(inv_bc2);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t{3};
    for (; i < n4; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        const __m256d mv = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                                         _mm256_mul_pd(v1mb1, gv));
        const __m256d vv = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                                         _mm256_mul_pd(v1mb2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_mul_pd(mv, vibc1);
        const __m256d vhat = _mm256_mul_pd(vv, vibc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    const double one_minus_b1 = 1.0 - b1;
    const double one_minus_b2 = 1.0 - b2;
    for (; i < n; ++i) {
        m[i] = b1 * m[i] + one_minus_b1 * g[i];
        v[i] = b2 * v[i] + one_minus_b2 * (g[i] * g[i]);
        const double mhat = m[i] * inv_bc1;
        const double vhat = v[i] * inv_bc2;
        p[i] -= (lr * mhat) / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable t{
        sum_avx2,        dot_avx2,  sumsq_dev_avx2, sumsq_diff_avx2,
        axpy_avx2,       add_avx2,  mul_avx2,       scale_avx2,
        scaled_diff_avx2, accum_sq_dev_avx2, bn_apply_avx2,
        relu_avx2,       relu_backward_avx2, adam_update_avx2,
    };
    return t;
}

}  // namespace mcbn::kernels

#endif  // x86_64
