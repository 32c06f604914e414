#pragma once

#include <functional>
#include <span>

namespace mcbn {

struct KsResult {
    double statistic;  // D = sup |F_n - F|
    double p_value;    // asymptotic Kolmogorov tail at lambda = sqrt(n) * D
};

// Asymptotic Kolmogorov tail Q(lambda) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2),
// truncated when |term| < 1e-10; clamped to [0, 1].
double kolmogorov_tail(double lambda);

// One-sample Kolmogorov-Smirnov test of `samples` against the continuous CDF
// `cdf`. Requires at least 8 samples.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

}  // namespace mcbn
