#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mcbn::metrics {

// Monte Carlo predictive log likelihood over T stochastic outputs:
//   logsumexp_j(-tau/2 (y - f_j)^2) - ln T - ln(2 pi)/2 + ln(tau)/2.
double pll_mc(std::span<const double> samples, double y, double tau);

// ln N(y; mean, var).
double pll_gaussian(double mean, double var, double y);

// Closed-form Gaussian CRPS: sigma * (z(2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi)).
double crps_gaussian(double mean, double var, double y);

struct OptimalVariance {
    double v;
    bool degenerate;  // y == mean; v floored at 1e-12
};

// Variance maximizing pll_gaussian(mean, ., y): (y - mean)^2.
OptimalVariance optimal_variance_pll(double mean, double y);

// Variance minimizing crps_gaussian(mean, ., y). By scale equivariance this
// is c* (y - mean)^2 for a universal constant; c* is found once by a
// golden-section search on a log bracket and cached.
OptimalVariance optimal_variance_crps(double mean, double y);

// The cached universal ratio c* = argmin_v CRPS(N(0,v); 1).
double crps_optimal_variance_ratio();

double rmse(std::span<const double> preds, std::span<const double> targets);

struct TTestResult {
    double t;
    double p_one_sided;  // H1: mean > mu0
    std::size_t n;
};

TTestResult one_sample_t_test(std::span<const double> values, double mu0);

// Per-observation scores for one scoring pass over a test set.
struct ScoreSet {
    std::vector<double> crps;
    std::vector<double> pll;

    double mean_crps() const;
    double mean_pll() const;
};

struct NormalizedScores {
    double crps_bar = 0.0;  // percent: 0 at the baseline, 100 at the bound
    double pll_bar = 0.0;
    bool crps_valid = true;  // false when bound mean == baseline mean
    bool pll_valid = true;
};

// Dataset-mean normalization (default). The per-observation variant averages
// the per-observation ratios instead.
NormalizedScores normalized_scores(const ScoreSet& model, const ScoreSet& baseline,
                                   const ScoreSet& bounds, bool per_observation = false);

}  // namespace mcbn::metrics
