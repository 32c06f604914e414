#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "mcbn/kernels.hpp"
#include "mcbn/rng.hpp"

using namespace mcbn;

namespace {

std::vector<double> random_vec(RngStream& rng, std::size_t n, double scale = 2.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * rng.next_gaussian();
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

// Sizes cover empty, sub-lane, exact lanes, and ragged tails.
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 63, 64, 257, 1024};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar and avx2 reductions are bit-identical") {
    if (!kernels::cpu_supports_avx2()) {
        MESSAGE("AVX2 unavailable; skipping equivalence checks");
        return;
    }
    const auto& s = kernels::scalar_table();
    const auto& a = kernels::avx2_table();
    RngStream rng(2024, 1);
    for (std::size_t n : kSizes) {
        const auto x = random_vec(rng, n);
        const auto y = random_vec(rng, n);
        CHECK(bit_equal(s.sum(x.data(), n), a.sum(x.data(), n)));
        CHECK(bit_equal(s.dot(x.data(), y.data(), n), a.dot(x.data(), y.data(), n)));
        CHECK(bit_equal(s.sumsq_dev(x.data(), n, 0.3), a.sumsq_dev(x.data(), n, 0.3)));
        CHECK(bit_equal(s.sumsq_diff(x.data(), y.data(), n),
                        a.sumsq_diff(x.data(), y.data(), n)));
    }
}

TEST_CASE("scalar and avx2 elementwise kernels are bit-identical") {
    if (!kernels::cpu_supports_avx2()) return;
    const auto& s = kernels::scalar_table();
    const auto& a = kernels::avx2_table();
    RngStream rng(2025, 2);
    for (std::size_t n : kSizes) {
        const auto x = random_vec(rng, n);
        const auto mu = random_vec(rng, n, 0.5);
        auto inv_sd = random_vec(rng, n, 1.0);
        for (auto& v : inv_sd) v = 0.2 + std::fabs(v);
        const auto gamma = random_vec(rng, n);
        const auto beta = random_vec(rng, n);

        auto y1 = random_vec(rng, n);
        auto y2 = y1;
        s.axpy(1.7, x.data(), y1.data(), n);
        a.axpy(1.7, x.data(), y2.data(), n);
        CHECK(bit_equal(y1, y2));

        y2 = y1;
        s.add(x.data(), y1.data(), n);
        a.add(x.data(), y2.data(), n);
        CHECK(bit_equal(y1, y2));

        y2 = y1;
        s.mul(x.data(), y1.data(), n);
        a.mul(x.data(), y2.data(), n);
        CHECK(bit_equal(y1, y2));

        y2 = y1;
        s.scale(-0.37, y1.data(), n);
        a.scale(-0.37, y2.data(), n);
        CHECK(bit_equal(y1, y2));

        std::vector<double> o1(n), o2(n);
        s.scaled_diff(2.5, x.data(), mu.data(), o1.data(), n);
        a.scaled_diff(2.5, x.data(), mu.data(), o2.data(), n);
        CHECK(bit_equal(o1, o2));

        auto acc1 = random_vec(rng, n);
        auto acc2 = acc1;
        s.accum_sq_dev(x.data(), mu.data(), acc1.data(), n);
        a.accum_sq_dev(x.data(), mu.data(), acc2.data(), n);
        CHECK(bit_equal(acc1, acc2));

        s.bn_apply(x.data(), mu.data(), inv_sd.data(), gamma.data(), beta.data(), o1.data(), n);
        a.bn_apply(x.data(), mu.data(), inv_sd.data(), gamma.data(), beta.data(), o2.data(), n);
        CHECK(bit_equal(o1, o2));

        s.relu(x.data(), o1.data(), n);
        a.relu(x.data(), o2.data(), n);
        CHECK(bit_equal(o1, o2));

        s.relu_backward(x.data(), gamma.data(), o1.data(), n);
        a.relu_backward(x.data(), gamma.data(), o2.data(), n);
        CHECK(bit_equal(o1, o2));
    }
}

TEST_CASE("scalar and avx2 adam updates are bit-identical") {
    if (!kernels::cpu_supports_avx2()) return;
    const auto& s = kernels::scalar_table();
    const auto& a = kernels::avx2_table();
    RngStream rng(2026, 3);
    for (std::size_t n : kSizes) {
        auto p1 = random_vec(rng, n);
        auto m1 = random_vec(rng, n, 0.1);
        auto v1 = random_vec(rng, n, 0.1);
        for (auto& v : v1) v = std::fabs(v);
        const auto g = random_vec(rng, n);
        auto p2 = p1;
        auto m2 = m1;
        auto v2 = v1;
        s.adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, 1e-3, 0.9, 0.999, 1e-8,
                      1.0 / (1 - 0.9), 1.0 / (1 - 0.999));
        a.adam_update(p2.data(), m2.data(), v2.data(), g.data(), n, 1e-3, 0.9, 0.999, 1e-8,
                      1.0 / (1 - 0.9), 1.0 / (1 - 0.999));
        CHECK(bit_equal(p1, p2));
        CHECK(bit_equal(m1, m2));
        CHECK(bit_equal(v1, v2));
    }
}

TEST_CASE("reduction kernels match plain summation within tolerance") {
    const auto& k = kernels::active();
    RngStream rng(11, 4);
    const auto x = random_vec(rng, 1000);
    double plain = 0.0;
    for (double v : x) plain += v;
    CHECK(k.sum(x.data(), x.size()) == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("backend selection is sticky and reversible") {
    const auto original = kernels::active_backend();
    kernels::force_backend(kernels::Backend::Scalar);
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    kernels::force_backend(original);
    CHECK(kernels::active_backend() == original);
}

}  // TEST_SUITE
