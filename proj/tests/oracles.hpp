#pragma once

// Independent oracles used by the test suites. These stay deliberately
// separate from the library implementations they check: long-double series
// for erf, plain two-pass statistics, a straight-line network recomputation,
// and central finite differences.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mcbn/matrix.hpp"
#include "mcbn/network.hpp"

namespace oracles {

// erf via the long-double Maclaurin-type series (positive terms), accurate to
// ~1e-17 for |x| <= 6.
long double erf_reference(long double x);
long double std_normal_cdf_reference(long double z);

// Two-pass mean and biased variance.
struct MeanVar {
    double mean;
    double var;
};
MeanVar two_pass_stats(std::span<const double> v);

// CRPS as the literal integral of (F(t) - 1{t >= y})^2, split at y.
double crps_by_quadrature(double mean, double var, double y);

// Straight-line recomputation of a dense/bn/relu stack in deterministic
// mode with plain loops (no kernels, no shared code paths).
std::vector<double> straight_line_forward(const mcbn::Network& net,
                                          std::span<const double> input_row);

// Central finite differences of `f` at x with step h.
double central_difference(const std::function<double(double)>& f, double x, double h);

}  // namespace oracles
