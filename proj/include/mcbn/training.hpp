#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mcbn/data.hpp"
#include "mcbn/matrix.hpp"
#include "mcbn/network.hpp"

namespace mcbn::training {

struct TrainConfig {
    double lambda = 0.0;             // weight decay on dense W only
    std::size_t batch_size = 32;     // M >= 2
    std::size_t max_epochs = 2000;
    double learning_rate = 1e-3;
    std::size_t eval_every = 20;     // epochs between validation evaluations
    std::uint64_t seed = 1;
};

struct SseLossResult {
    double loss;  // (1/M) sum (yhat - y)^2
    Matrix dy;    // exact gradient wrt yhat
};

SseLossResult sse_loss(const Matrix& y_hat, const Matrix& y);

// Adam first/second moment mirrors of the trainable parameters.
struct AdamState {
    struct LayerState {
        Matrix mW, vW;
        std::vector<double> mb, vb, mgamma, vgamma, mbeta, vbeta;
    };
    std::vector<LayerState> layers;
    std::size_t t = 0;
    std::vector<double> scratch;  // decayed-gradient buffer
};

AdamState make_adam_state(const Network& net);

// One Adam step (beta1 0.9, beta2 0.999, eps 1e-8) with the 2*lambda*W decay
// term added to dense weight gradients. Throws NumericError on non-finite
// gradients; the step is not applied.
void adam_step(Network& net, const Gradients& grads, AdamState& state, double lr, double lambda);

struct EvalPoint {
    std::size_t epoch;
    double train_loss;  // mean mini-batch loss over the epoch
    double val_rmse;    // deterministic forward after a population-stats refresh
};

struct TrainResult {
    Network net;  // snapshot at the best recorded epoch (population stats set)
    std::vector<EvalPoint> history;
    std::size_t best_epoch = 0;
    double best_rmse = 0.0;
};

// Mini-batch training: per-epoch shuffling without replacement, short final
// batches kept unless smaller than 2. Validation every eval_every epochs;
// returns the network snapshot at the best recorded epoch. Throws
// TrainingError (with the epoch) if the loss goes non-finite.
TrainResult train(Network net, const Matrix& x, const Matrix& y, const TrainConfig& cfg,
                  const Matrix& val_x, const Matrix& val_y);

struct GridPoint {
    double lambda = 0.0;
    std::size_t batch_size = 32;
    double dropout_rate = 0.0;  // MCDO path only
};

struct GridEval {
    GridPoint point;
    std::vector<std::size_t> epochs;
    std::vector<double> mean_rmse;  // mean CV RMSE per recorded epoch; +inf on divergence
};

struct CvSelection {
    GridPoint best;
    std::size_t best_index = 0;  // index into the grid
    std::size_t best_epoch = 0;
    double best_mean_rmse = 0.0;
    std::vector<GridEval> table;
};

// Builds the fold network for one (gridpoint, fold) job; seeded externally so
// the search is reproducible and jobs can run in parallel.
using NetFactory = std::function<Network(const GridPoint&, RngStream&)>;

// K-fold CV over the grid on the CV portion of `ds` (original scale).
// Normalization is per fold from the fold's training indices; fold RMSE is
// scored on the original target scale so fold means are comparable.
// Deterministic tie-break: first gridpoint in grid order, earliest epoch.
// A diverging fold scores its gridpoint +inf.
CvSelection grid_search_cv(const std::vector<GridPoint>& grid, const data::Dataset& ds,
                           const std::vector<std::vector<std::size_t>>& folds,
                           const TrainConfig& base_cfg, const NetFactory& factory,
                           std::uint64_t seed, std::size_t workers = 1);

// One CV-validation observation for tau optimization: moments of the
// stochastic samples plus the fold's target-scale factor (std^2), so a
// single tau in normalized units serves every fold.
struct CvPrediction {
    double sample_mean = 0.0;
    double sample_var = 0.0;   // biased variance of the stochastic samples
    double noise_scale = 1.0;  // fold y_std^2; tau^-1 * noise_scale adds to variance
    double target = 0.0;
};

struct TauEstimate {
    double tau = 1.0;
    bool at_edge = false;  // optimum hit the search-grid boundary
};

// tau minimizing mean Gaussian CRPS of N(mean_i, var_i + tau^-1 * scale_i)
// over the CV predictions: 101-point log grid on 10^-4..10^6, then
// golden-section refinement around the grid optimum.
TauEstimate optimize_tau(std::span<const CvPrediction> predictions);

}  // namespace mcbn::training
