#pragma once

namespace mcbn {

// Normal distribution parameterized by mean and variance (not std).
struct Gaussian {
    double mean = 0.0;
    double variance = 1.0;
};

// Error function to full double precision (series for small |x|, continued
// fraction for the tails); independent of libm's erf.
double erf_precise(double x);
double erfc_precise(double x);

// Density of N(mean, variance) at x. Throws std::domain_error on
// variance <= 0.
double gauss_pdf(double x, const Gaussian& g);

// CDF of N(mean, variance) at x; absolute error below 1e-12.
double gauss_cdf(double x, const Gaussian& g);

// Standard normal helpers.
double std_normal_pdf(double z);
double std_normal_cdf(double z);

}  // namespace mcbn
