#include "mcbn/inference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcbn/analysis.hpp"
#include "mcbn/errors.hpp"
#include "mcbn/kernels.hpp"
#include "mcbn/metrics.hpp"
#include "mcbn/numeric.hpp"

namespace mcbn::inference {
namespace {

std::vector<PredictiveDistribution> assemble_moments(const Matrix& samples, double tau) {
    // samples: queries x T
    const auto& k = kernels::active();
    const std::size_t t = samples.cols();
    std::vector<PredictiveDistribution> out(samples.rows());
    for (std::size_t q = 0; q < samples.rows(); ++q) {
        const double* row = samples.data() + q * t;
        PredictiveDistribution& pd = out[q];
        pd.samples.assign(row, row + t);
        pd.tau = tau;
        pd.mean = k.sum(row, t) / static_cast<double>(t);
        const double ss = k.sumsq_dev(row, t, pd.mean);
        pd.variance = 1.0 / tau + ss / static_cast<double>(t);
    }
    return out;
}

void check_cfg(const InferenceConfig& cfg) {
    if (cfg.passes < 1) throw std::domain_error("inference: T must be >= 1");
    if (!(cfg.tau > 0.0)) throw std::domain_error("inference: tau must be positive");
}

}  // namespace

std::vector<PredictiveDistribution> mcbn_predict(const Network& net, const Matrix& queries,
                                                 const Matrix& train_x,
                                                 const InferenceConfig& cfg) {
    check_cfg(cfg);
    if (cfg.batch_size < 2) throw std::domain_error("mcbn_predict: M must be >= 2");
    if (cfg.batch_size > train_x.rows())
        throw std::domain_error("mcbn_predict: M exceeds the training set size");
    RngStream rng(cfg.seed, 201);
    Matrix samples(queries.rows(), cfg.passes);
    for (std::size_t t = 0; t < cfg.passes; ++t) {
        const auto idx = rng.sample_without_replacement(train_x.rows(), cfg.batch_size);
        const Matrix batch = train_x.gather_rows(idx);
        const BatchStats stats = compute_batch_stats(net, batch);
        const Matrix y = forward(net, queries, StochasticBNMode{&stats});
        for (std::size_t q = 0; q < queries.rows(); ++q) samples(q, t) = y(q, 0);
    }
    return assemble_moments(samples, cfg.tau);
}

std::vector<PredictiveDistribution> mcdo_predict(const Network& net, const Matrix& queries,
                                                 const InferenceConfig& cfg) {
    check_cfg(cfg);
    if (!net.has_dropout_layers())
        throw ContractError("mcdo_predict: network has no dropout layers");
    RngStream rng(cfg.seed, 202);
    Matrix samples(queries.rows(), cfg.passes);
    for (std::size_t t = 0; t < cfg.passes; ++t) {
        const Matrix y = forward(net, queries, DropoutMode{&rng});
        for (std::size_t q = 0; q < queries.rows(); ++q) samples(q, t) = y(q, 0);
    }
    return assemble_moments(samples, cfg.tau);
}

std::vector<PredictiveDistribution> mcbn_predict_modeled_omega(const Network& net,
                                                               const Matrix& queries,
                                                               const Matrix& train_x,
                                                               const InferenceConfig& cfg) {
    check_cfg(cfg);
    const auto moments = analysis::unit_population_moments(net, train_x);
    RngStream rng(cfg.seed, 203);
    Matrix samples(queries.rows(), cfg.passes);
    BatchStats stats;
    stats.mu.resize(moments.size());
    stats.sigma.resize(moments.size());
    for (std::size_t t = 0; t < cfg.passes; ++t) {
        for (std::size_t l = 0; l < moments.size(); ++l) {
            const auto& layer_moments = moments[l];
            stats.mu[l].resize(layer_moments.size());
            stats.sigma[l].resize(layer_moments.size());
            for (std::size_t u = 0; u < layer_moments.size(); ++u) {
                const auto mean_dist =
                    analysis::predicted_mean_dist(layer_moments[u], cfg.batch_size);
                const auto sd_dist =
                    analysis::predicted_std_dist(layer_moments[u], cfg.batch_size);
                stats.mu[l][u] =
                    mean_dist.dist.mean + std::sqrt(mean_dist.dist.variance) * rng.next_gaussian();
                // sigma_B draws below zero are clamped; the modeled Gaussian
                // has small but positive mass there.
                const double s =
                    sd_dist.mean + std::sqrt(sd_dist.variance) * rng.next_gaussian();
                stats.sigma[l][u] = s > 0.0 ? s : 0.0;
            }
        }
        const Matrix y = forward(net, queries, StochasticBNMode{&stats});
        for (std::size_t q = 0; q < queries.rows(); ++q) samples(q, t) = y(q, 0);
    }
    return assemble_moments(samples, cfg.tau);
}

ConstantVariance fit_constant_uncertainty(std::span<const double> means,
                                          std::span<const double> targets) {
    if (means.empty()) throw std::domain_error("fit_constant_uncertainty: empty input");
    if (means.size() != targets.size())
        throw std::invalid_argument("fit_constant_uncertainty: length mismatch");
    const auto objective = [&](double lv) {
        const double v = std::exp(lv);
        double acc = 0.0;
        for (std::size_t i = 0; i < means.size(); ++i)
            acc += metrics::crps_gaussian(means[i], v, targets[i]);
        return acc / static_cast<double>(means.size());
    };
    const double lo = std::log(1e-12), hi = std::log(1e6);
    constexpr int kPoints = 101;
    double best_x = lo, best_f = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < kPoints; ++i) {
        const double xx = lo + (hi - lo) * i / (kPoints - 1);
        const double f = objective(xx);
        if (f < best_f) {
            best_f = f;
            best_x = xx;
            best_i = i;
        }
    }
    ConstantVariance cv;
    if (best_i == 0 || best_i == kPoints - 1) {
        cv.at_edge = true;
        cv.v = std::exp(best_x);
        return cv;
    }
    const double step = (hi - lo) / (kPoints - 1);
    const auto refined = minimize_scalar(objective, best_x - step, best_x + step, 1e-12);
    cv.v = std::exp(refined.argmin);
    return cv;
}

std::vector<PredictiveDistribution> cu_predict(std::span<const double> means, double v,
                                               double tau) {
    if (v < 0.0) throw std::domain_error("cu_predict: variance must be >= 0");
    std::vector<PredictiveDistribution> out(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
        out[i].mean = means[i];
        out[i].variance = v;
        out[i].tau = tau;
    }
    return out;
}

}  // namespace mcbn::inference
