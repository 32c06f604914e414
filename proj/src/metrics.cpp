#include "mcbn/metrics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mcbn/gaussian.hpp"
#include "mcbn/kernels.hpp"
#include "mcbn/numeric.hpp"

namespace mcbn::metrics {
namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kLogTwoPi = 1.8378770664093454836;  // ln(2*pi)

}  // namespace

double pll_mc(std::span<const double> samples, double y, double tau) {
    if (samples.empty()) throw std::domain_error("pll_mc: needs at least one sample");
    if (!(tau > 0.0)) throw std::domain_error("pll_mc: tau must be positive");
    std::vector<double> exponents(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
        const double d = y - samples[j];
        exponents[j] = -0.5 * tau * d * d;
    }
    return log_sum_exp(exponents) - std::log(static_cast<double>(samples.size())) -
           0.5 * kLogTwoPi + 0.5 * std::log(tau);
}

double pll_gaussian(double mean, double var, double y) {
    if (!(var > 0.0)) throw std::domain_error("pll_gaussian: variance must be positive");
    const double d = y - mean;
    return -0.5 * (kLogTwoPi + std::log(var)) - 0.5 * d * d / var;
}

double crps_gaussian(double mean, double var, double y) {
    if (!(var > 0.0)) throw std::domain_error("crps_gaussian: variance must be positive");
    const double sd = std::sqrt(var);
    const double z = (y - mean) / sd;
    const double crps =
        sd * (z * (2.0 * std_normal_cdf(z) - 1.0) + 2.0 * std_normal_pdf(z) -
              1.0 / std::sqrt(std::numbers::pi));
    return crps < 0.0 ? 0.0 : crps;
}

OptimalVariance optimal_variance_pll(double mean, double y) {
    const double d = y - mean;
    if (d == 0.0) return {kVarianceFloor, true};
    return {d * d, false};
}

double crps_optimal_variance_ratio() {
    static const double ratio = [] {
        // argmin over ln v of CRPS(N(0, v); 1); unimodal on this bracket.
        const auto res = minimize_scalar(
            [](double lv) { return crps_gaussian(0.0, std::exp(lv), 1.0); }, std::log(1e-12),
            std::log(1e6), 1e-13);
        return std::exp(res.argmin);
    }();
    return ratio;
}

OptimalVariance optimal_variance_crps(double mean, double y) {
    const double d = y - mean;
    if (d == 0.0) return {kVarianceFloor, true};
    return {crps_optimal_variance_ratio() * (d * d), false};
}

double rmse(std::span<const double> preds, std::span<const double> targets) {
    if (preds.size() != targets.size()) throw std::invalid_argument("rmse: length mismatch");
    if (preds.empty()) throw std::domain_error("rmse: empty input");
    const double ss = kernels::active().sumsq_diff(preds.data(), targets.data(), preds.size());
    return std::sqrt(ss / static_cast<double>(preds.size()));
}

TTestResult one_sample_t_test(std::span<const double> values, double mu0) {
    const std::size_t n = values.size();
    if (n < 2) throw std::domain_error("one_sample_t_test: needs at least 2 values");
    const double mean = kernels::active().sum(values.data(), n) / static_cast<double>(n);
    const double ss = kernels::active().sumsq_dev(values.data(), n, mean);
    const double var_unbiased = ss / static_cast<double>(n - 1);
    if (!(var_unbiased > 0.0))
        throw std::domain_error("one_sample_t_test: zero sample variance");
    const double se = std::sqrt(var_unbiased / static_cast<double>(n));
    const double t = (mean - mu0) / se;
    const double p = 1.0 - student_t_cdf(t, static_cast<double>(n - 1));
    return {t, p, n};
}

double ScoreSet::mean_crps() const {
    if (crps.empty()) throw std::domain_error("ScoreSet: empty");
    return kernels::active().sum(crps.data(), crps.size()) / static_cast<double>(crps.size());
}

double ScoreSet::mean_pll() const {
    if (pll.empty()) throw std::domain_error("ScoreSet: empty");
    return kernels::active().sum(pll.data(), pll.size()) / static_cast<double>(pll.size());
}

NormalizedScores normalized_scores(const ScoreSet& model, const ScoreSet& baseline,
                                   const ScoreSet& bounds, bool per_observation) {
    const std::size_t n = model.crps.size();
    if (baseline.crps.size() != n || bounds.crps.size() != n || model.pll.size() != n ||
        baseline.pll.size() != n || bounds.pll.size() != n)
        throw std::invalid_argument("normalized_scores: record sets differ in size");
    if (n == 0) throw std::domain_error("normalized_scores: empty records");

    NormalizedScores out;
    if (per_observation) {
        double crps_acc = 0.0, pll_acc = 0.0;
        std::size_t crps_n = 0, pll_n = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double cd = bounds.crps[i] - baseline.crps[i];
            if (cd != 0.0) {
                crps_acc += (model.crps[i] - baseline.crps[i]) / cd * 100.0;
                ++crps_n;
            }
            const double pd = bounds.pll[i] - baseline.pll[i];
            if (pd != 0.0) {
                pll_acc += (model.pll[i] - baseline.pll[i]) / pd * 100.0;
                ++pll_n;
            }
        }
        out.crps_valid = crps_n > 0;
        out.pll_valid = pll_n > 0;
        out.crps_bar = out.crps_valid ? crps_acc / static_cast<double>(crps_n)
                                      : std::numeric_limits<double>::quiet_NaN();
        out.pll_bar = out.pll_valid ? pll_acc / static_cast<double>(pll_n)
                                    : std::numeric_limits<double>::quiet_NaN();
        return out;
    }

    const double crps_denom = bounds.mean_crps() - baseline.mean_crps();
    const double pll_denom = bounds.mean_pll() - baseline.mean_pll();
    out.crps_valid = crps_denom != 0.0;
    out.pll_valid = pll_denom != 0.0;
    out.crps_bar = out.crps_valid
                       ? (model.mean_crps() - baseline.mean_crps()) / crps_denom * 100.0
                       : std::numeric_limits<double>::quiet_NaN();
    out.pll_bar = out.pll_valid ? (model.mean_pll() - baseline.mean_pll()) / pll_denom * 100.0
                                : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace mcbn::metrics
