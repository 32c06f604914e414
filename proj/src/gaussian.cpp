#include "mcbn/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcbn {
namespace {

constexpr double kTwoOverSqrtPi = 1.1283791670955125739;  // 2/sqrt(pi)
constexpr double kOneOverSqrtPi = 0.5641895835477562869;

// erf(x) = (2/sqrt(pi)) * x * exp(-x^2) * sum_{n>=0} (2x^2)^n / (1*3*...*(2n+1)).
// All terms positive, so no cancellation; converges quickly for |x| <= 3.
double erf_series(double x) {
    const double x2 = x * x;
    double term = 1.0;
    double sum = 1.0;
    double denom = 1.0;
    for (int n = 1; n < 200; ++n) {
        denom += 2.0;
        term *= 2.0 * x2 / denom;
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return kTwoOverSqrtPi * x * std::exp(-x2) * sum;
}

// erfc(x) for x >= 3 via the Laplace continued fraction
//   erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
// evaluated with the modified Lentz algorithm.
double erfc_cf(double x) {
    const double tiny = 1e-300;
    double f = x;
    if (f == 0.0) f = tiny;
    double c = f;
    double d = 0.0;
    for (int n = 1; n < 300; ++n) {
        const double a = 0.5 * n;  // partial numerators: 1/2, 1, 3/2, ...
        d = x + a * d;
        if (d == 0.0) d = tiny;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-x * x) * kOneOverSqrtPi / f;
}

}  // namespace

double erf_precise(double x) {
    if (std::isnan(x)) return x;
    const double ax = std::fabs(x);
    double r;
    if (ax < 3.0)
        r = erf_series(ax);
    else
        r = 1.0 - erfc_cf(ax);
    return x < 0.0 ? -r : r;
}

double erfc_precise(double x) {
    if (std::isnan(x)) return x;
    if (x >= 3.0) return erfc_cf(x);
    if (x <= -3.0) return 2.0 - erfc_cf(-x);
    return 1.0 - erf_series(std::fabs(x)) * (x < 0.0 ? -1.0 : 1.0);
}

double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double z) {
    return 0.5 * erfc_precise(-z / std::numbers::sqrt2);
}

double gauss_pdf(double x, const Gaussian& g) {
    if (!(g.variance > 0.0)) throw std::domain_error("gauss_pdf: variance must be positive");
    const double z = (x - g.mean) / std::sqrt(g.variance);
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi * g.variance);
}

double gauss_cdf(double x, const Gaussian& g) {
    if (!(g.variance > 0.0)) throw std::domain_error("gauss_cdf: variance must be positive");
    return std_normal_cdf((x - g.mean) / std::sqrt(g.variance));
}

}  // namespace mcbn
