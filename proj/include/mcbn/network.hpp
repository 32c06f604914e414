#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mcbn/matrix.hpp"
#include "mcbn/rng.hpp"

namespace mcbn {

enum class Activation { ReLU, Identity };

struct DenseLayer {
    Matrix W;               // out x in
    std::vector<double> b;  // out
};

struct BNLayer {
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> pop_mean;
    std::vector<double> pop_var;  // biased (divide-by-N) population variance
    double eps = 1e-5;
    // When false, gamma/beta stay fixed at 1/0 and receive no updates; used
    // by the prior-analysis path.
    bool affine = true;
};

struct DropoutLayer {
    double rate = 0.0;  // probability of zeroing a unit; inverted scaling 1/(1-rate)
};

struct ActivationLayer {
    Activation kind = Activation::ReLU;
};

using Layer = std::variant<DenseLayer, BNLayer, DropoutLayer, ActivationLayer>;

// The stochastic parameters omega: per BN layer (network order), per unit,
// a mini-batch mean and a biased standard deviation.
struct BatchStats {
    std::vector<std::vector<double>> mu;
    std::vector<std::vector<double>> sigma;
};

struct Network {
    std::size_t input_width = 0;
    std::vector<Layer> layers;

    std::size_t output_width() const;
    std::size_t bn_layer_count() const;
    // Any dropout layer with rate > 0 (drives the rng requirement in train mode).
    bool has_dropout() const;
    // Any dropout layer at all, including rate 0 (the MCDO contract).
    bool has_dropout_layers() const;
    std::vector<std::size_t> bn_unit_counts() const;
    bool stats_shape_matches(const BatchStats& stats) const;
    // Throws DimensionError if layer widths are inconsistent.
    void validate() const;
};

// Forward modes. Train computes BN statistics from the mini-batch itself and
// activates dropout (rng required iff the net has dropout layers).
// StochasticBN normalizes with the supplied BatchStats, dropout off.
// Deterministic uses population statistics, dropout off. Dropout draws fresh
// masks and uses population statistics for any BN layer.
struct TrainMode {
    RngStream* rng = nullptr;
};
struct StochasticBNMode {
    const BatchStats* stats = nullptr;
};
struct DeterministicMode {};
struct DropoutMode {
    RngStream* rng = nullptr;
};
using ForwardMode = std::variant<TrainMode, StochasticBNMode, DeterministicMode, DropoutMode>;

// Activation record for exact backprop.
struct Cache {
    struct DenseRec {
        Matrix input;
    };
    struct BNRec {
        Matrix input;
        std::vector<double> mu;
        std::vector<double> var;
        std::vector<double> inv_sd;  // 1/sqrt(var + eps)
        Matrix xhat;                 // normalized, pre scale-and-shift
        bool batch_mode = false;     // stats were functions of the batch
    };
    struct DropRec {
        Matrix mask;  // entries in {0, 1/(1-rate)}; empty when inactive
        bool active = false;
    };
    struct ActRec {
        Matrix input;
    };
    using Rec = std::variant<DenseRec, BNRec, DropRec, ActRec>;

    const Network* net = nullptr;
    std::size_t rows = 0;
    std::vector<Rec> records;
};

// Forward pass without gradient bookkeeping.
Matrix forward(const Network& net, const Matrix& x, const ForwardMode& mode);

// Forward pass recording everything backward() needs.
std::pair<Matrix, Cache> forward_cached(const Network& net, const Matrix& x,
                                        const ForwardMode& mode);

// Mini-batch BN statistics, computed layer by layer with earlier layers
// already normalized by these same batch statistics. Requires >= 2 rows.
BatchStats compute_batch_stats(const Network& net, const Matrix& batch);

// Sets pop_mean/pop_var on every BN layer from a single full-dataset pass
// (earlier layers normalized by the freshly computed population statistics).
// Idempotent.
void compute_population_stats(Network& net, const Matrix& data);

struct LayerGrads {
    Matrix dW;
    std::vector<double> db;
    std::vector<double> dgamma;
    std::vector<double> dbeta;
};

struct Gradients {
    std::vector<LayerGrads> layers;  // parallel to Network::layers

    bool all_finite() const;
    void scale(double a);
};

// Exact gradients of the scalar loss with upstream dY = dL/d(output).
// Throws ContractError if the cache does not belong to this network.
Gradients backward(const Network& net, const Cache& cache, const Matrix& dy);

// input -> [dropout?] -> dense -> [bn?] -> relu (per hidden width) -> [dropout?] -> dense(1).
// Weights N(0, 2/fan_in), biases 0, gamma 1, beta 0.
struct MlpSpec {
    std::size_t input_width = 1;
    std::vector<std::size_t> hidden_widths = {50, 50};
    std::size_t output_width = 1;
    bool batch_norm = true;
    bool bn_affine = true;
    double dropout_rate = 0.0;  // > 0 inserts dropout before every dense layer
    Activation activation = Activation::ReLU;
};

Network make_mlp(const MlpSpec& spec, RngStream& rng);

}  // namespace mcbn
