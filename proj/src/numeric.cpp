#include "mcbn/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcbn/errors.hpp"

namespace mcbn {
namespace {

struct SimpsonPanel {
    double estimate;
    double fmid;
};

SimpsonPanel simpson(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    return {(b - a) / 6.0 * (fa + 4.0 * fm + fb), fm};
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double fa, double b,
                        double fb, double fm, double whole, double tol, int depth) {
    if (depth > 60) throw NumericError("quadrature: refinement depth exceeded");
    const double m = 0.5 * (a + b);
    const auto left = simpson(f, a, fa, m, fm);
    const auto right = simpson(f, m, fm, b, fb);
    const double sum = left.estimate + right.estimate;
    const double delta = sum - whole;
    // Stop when within tolerance or at the rounding floor of the panel.
    const double floor_tol = 1e-15 * std::fabs(sum) + 1e-300;
    if (std::fabs(delta) <= std::max(15.0 * tol, floor_tol))
        return sum + delta / 15.0;
    return adaptive_simpson(f, a, fa, m, fm, left.fmid, left.estimate, 0.5 * tol, depth + 1) +
           adaptive_simpson(f, m, fm, b, fb, right.fmid, right.estimate, 0.5 * tol, depth + 1);
}

}  // namespace

double log_sum_exp(std::span<const double> v) {
    if (v.empty()) throw std::domain_error("log_sum_exp: empty input");
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double quadrature(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(lo < hi)) throw std::domain_error("quadrature: requires lo < hi");
    const double fa = f(lo);
    const double fb = f(hi);
    const auto top = simpson(f, lo, fa, hi, fb);
    return adaptive_simpson(f, lo, fa, hi, fb, top.fmid, top.estimate, tol, 0);
}

ScalarMin minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    if (!(lo < hi)) throw std::domain_error("minimize_scalar: invalid bracket");
    constexpr double invphi = 0.6180339887498949;   // 1/phi
    constexpr double invphi2 = 0.3819660112501051;  // 1/phi^2
    double a = lo, b = hi;
    double c = a + invphi2 * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = a + invphi2 * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

double incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    // I_x(a,b) = prefactor * cf / a, with the symmetry transform for
    // convergence when x > (a+1)/(a+b+2).
    if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);
    const double ln_pre = a * std::log(x) + b * std::log1p(-x) + std::lgamma(a + b) -
                          std::lgamma(a) - std::lgamma(b);
    // Modified Lentz on the standard continued fraction.
    const double tiny = 1e-300;
    double f = tiny, c = f, d = 0.0;
    for (int m = 0; m <= 400; ++m) {
        double num;
        if (m == 0) {
            num = 1.0;
        } else if (m % 2 == 1) {
            const int k = (m - 1) / 2;
            num = -(a + k) * (a + b + k) * x / ((a + 2.0 * k) * (a + 2.0 * k + 1.0));
        } else {
            const int k = m / 2;
            num = k * (b - k) * x / ((a + 2.0 * k - 1.0) * (a + 2.0 * k));
        }
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (m > 0 && std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(ln_pre) * f / a;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw std::domain_error("student_t_cdf: df must be positive");
    if (t == 0.0) return 0.5;
    const double x = df / (df + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

}  // namespace mcbn
