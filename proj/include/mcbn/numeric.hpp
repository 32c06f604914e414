#pragma once

#include <functional>
#include <span>
#include <utility>

namespace mcbn {

// ln(sum exp(v_i)) with max shift; throws std::domain_error on empty input.
double log_sum_exp(std::span<const double> v);

// Adaptive Simpson integration of f over [lo, hi] to absolute tolerance tol.
// Throws NumericError if the refinement depth limit is hit before the
// tolerance is met.
double quadrature(const std::function<double(double)>& f, double lo, double hi, double tol);

struct ScalarMin {
    double argmin;
    double min;
};

// Golden-section search on [lo, hi]; correct for unimodal f (caller's
// responsibility). Shrinks the bracket until its width is below tol.
ScalarMin minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                          double tol);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation; used for the Student-t CDF.
double incomplete_beta(double a, double b, double x);

// CDF of Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

}  // namespace mcbn
