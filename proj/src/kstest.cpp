#include "mcbn/kstest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mcbn {

double kolmogorov_tail(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double q = 0.0;
    double sign = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        q += sign * 2.0 * term;
        if (2.0 * term < 1e-10) break;
        sign = -sign;
    }
    return std::clamp(q, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
    const std::size_t n = samples.size();
    if (n < 8) throw std::domain_error("ks_test: needs at least 8 samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fx = cdf(sorted[i]);
        const double upper = static_cast<double>(i + 1) / n - fx;
        const double lower = fx - static_cast<double>(i) / n;
        d = std::max({d, upper, lower});
    }
    const double lambda = std::sqrt(static_cast<double>(n)) * d;
    return {d, kolmogorov_tail(lambda)};
}

}  // namespace mcbn
