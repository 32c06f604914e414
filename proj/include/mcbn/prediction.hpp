#pragma once

#include <vector>

namespace mcbn {

// Predictive distribution for one query: sample mean / variance of the
// stochastic forward passes plus the observation-noise floor tau^-1.
// `variance` >= 1/tau by construction for the stochastic models; `samples`
// is empty for the constant-uncertainty baselines.
struct PredictiveDistribution {
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> samples;
    double tau = 1.0;
};

}  // namespace mcbn
