#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcbn/matrix.hpp"
#include "mcbn/network.hpp"
#include "mcbn/prediction.hpp"

namespace mcbn::inference {

struct InferenceConfig {
    std::size_t passes = 500;     // T
    std::size_t batch_size = 32;  // M, must equal the training batch size
    std::uint64_t seed = 1;
    double tau = 1.0;  // observation-noise precision, normalized-target units
};

// Algorithm: for t = 1..T draw a batch B from train_x uniformly without
// replacement, set omega_t = compute_batch_stats(net, B), evaluate the
// queries in stochastic-BN mode. One batch draw serves one forward pass for
// all query rows; the queries never enter the batch statistics. Variance is
// tau^-1 plus the biased sample variance of the T outputs.
std::vector<PredictiveDistribution> mcbn_predict(const Network& net, const Matrix& queries,
                                                 const Matrix& train_x,
                                                 const InferenceConfig& cfg);

// Same moment assembly with fresh dropout masks per pass. Requires a network
// with dropout layers.
std::vector<PredictiveDistribution> mcdo_predict(const Network& net, const Matrix& queries,
                                                 const InferenceConfig& cfg);

// Experimental: omega sampled from the modeled Gaussian approximations of
// the batch statistics (per-unit CLT Gaussians fitted on train_x) instead of
// from batches of the training data.
std::vector<PredictiveDistribution> mcbn_predict_modeled_omega(const Network& net,
                                                               const Matrix& queries,
                                                               const Matrix& train_x,
                                                               const InferenceConfig& cfg);

struct ConstantVariance {
    double v = 0.0;
    bool at_edge = false;  // optimum hit the log-grid boundary
};

// The single v >= 0 minimizing mean Gaussian CRPS of N(mean_i, v) over the
// validation set; log grid plus golden-section refinement.
ConstantVariance fit_constant_uncertainty(std::span<const double> means,
                                          std::span<const double> targets);

// Constant-uncertainty baseline: the stochastic model's means with one
// shared variance.
std::vector<PredictiveDistribution> cu_predict(std::span<const double> means, double v,
                                               double tau);

}  // namespace mcbn::inference
