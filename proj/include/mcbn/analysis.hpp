#pragma once

#include <span>
#include <vector>

#include "mcbn/gaussian.hpp"
#include "mcbn/matrix.hpp"
#include "mcbn/network.hpp"

namespace mcbn::analysis {

// Population moments of one BN unit's pre-activation over the training set:
// mean, biased standard deviation, and fourth central moment.
struct UnitMomentSummary {
    double mean = 0.0;
    double sd = 0.0;
    double fourth_central = 0.0;
};

// One exact pass over `data`, layer by layer with earlier BN layers
// normalized by population statistics computed from this same pass.
// Outer index: BN layer in network order; inner: unit.
std::vector<std::vector<UnitMomentSummary>> unit_population_moments(const Network& net,
                                                                    const Matrix& data);

struct PredictedDist {
    Gaussian dist;
    bool degenerate = false;  // zero population spread
};

// CLT approximation of the batch mean: N(mean, sd^2 / M).
PredictedDist predicted_mean_dist(const UnitMomentSummary& summary, std::size_t m);

// CLT approximation of the batch standard deviation:
// N(sd, (E4 - sd^4) / (4 sd^2 M)). Throws std::domain_error when sd == 0.
Gaussian predicted_std_dist(const UnitMomentSummary& summary, std::size_t m);

// Raw (mu_B, sigma_B) samples per BN unit over `draws` independent batches.
struct BnStatSamples {
    // [bn layer][unit][draw]
    std::vector<std::vector<std::vector<double>>> mu;
    std::vector<std::vector<std::vector<double>>> sigma;
};

BnStatSamples collect_bn_stat_samples(const Network& net, const Matrix& train_x, std::size_t m,
                                      std::size_t draws, RngStream& rng);

// KL(q || p) for Gaussians: ln(sp/sq) + (sq^2 + (mq - mp)^2) / (2 sp^2) - 1/2.
double kl_gaussian(const Gaussian& q, const Gaussian& p);

// Sum of per-parameter KL terms for factorized Gaussians.
double kl_factorized(std::span<const Gaussian> q_list, std::span<const Gaussian> p_list);

struct PriorParams {
    double mu_mu_p = 0.0;
    bool sigma_mu_p_infinite = true;  // flat prior on the batch mean
    double mu_sigma_p = 0.0;
    double sigma_sigma_p = 0.0;  // 1 / (2 N tau lambda)
    bool improper = false;       // lambda == 0
};

PriorParams prior_params(std::size_t n, double tau, double lambda);

// Per-unit KS summary used by the verification report. The parametric
// columns test the raw samples against the CLT Gaussians; the shape columns
// test empirically standardized samples against N(0,1) (the batch-statistics
// normality check). sigma_sd_ratio is empirical SD / predicted SD.
struct UnitKsRow {
    std::size_t layer = 0;
    std::size_t unit = 0;
    double mu_d = 0.0, mu_p = 0.0;
    double sigma_d = 0.0, sigma_p = 0.0;
    double mu_shape_d = 0.0, mu_shape_p = 0.0;
    double sigma_shape_d = 0.0, sigma_shape_p = 0.0;
    double sigma_sd_ratio = 0.0;
};

std::vector<UnitKsRow> bn_normality_report(const Network& net, const Matrix& train_x,
                                           std::size_t m, std::size_t draws, RngStream& rng);

}  // namespace mcbn::analysis
