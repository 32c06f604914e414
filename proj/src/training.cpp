#include "mcbn/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "mcbn/errors.hpp"
#include "mcbn/kernels.hpp"
#include "mcbn/metrics.hpp"
#include "mcbn/numeric.hpp"

namespace mcbn::training {
namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

SseLossResult sse_loss(const Matrix& y_hat, const Matrix& y) {
    if (y_hat.rows() != y.rows() || y_hat.cols() != y.cols())
        throw DimensionError("sse_loss: shape mismatch");
    const auto& k = kernels::active();
    const double m = static_cast<double>(y_hat.rows());
    const double ss = k.sumsq_diff(y_hat.data(), y.data(), y_hat.size());
    SseLossResult res;
    res.loss = ss / m;
    res.dy = Matrix(y_hat.rows(), y_hat.cols());
    k.scaled_diff(2.0 / m, y_hat.data(), y.data(), res.dy.data(), y_hat.size());
    return res;
}

AdamState make_adam_state(const Network& net) {
    AdamState state;
    state.layers.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        auto& ls = state.layers[i];
        if (const auto* d = std::get_if<DenseLayer>(&net.layers[i])) {
            ls.mW = Matrix(d->W.rows(), d->W.cols());
            ls.vW = Matrix(d->W.rows(), d->W.cols());
            ls.mb.assign(d->b.size(), 0.0);
            ls.vb.assign(d->b.size(), 0.0);
        } else if (const auto* bn = std::get_if<BNLayer>(&net.layers[i])) {
            ls.mgamma.assign(bn->gamma.size(), 0.0);
            ls.vgamma.assign(bn->gamma.size(), 0.0);
            ls.mbeta.assign(bn->beta.size(), 0.0);
            ls.vbeta.assign(bn->beta.size(), 0.0);
        }
    }
    return state;
}

void adam_step(Network& net, const Gradients& grads, AdamState& state, double lr, double lambda) {
    if (grads.layers.size() != net.layers.size() || state.layers.size() != net.layers.size())
        throw DimensionError("adam_step: state/gradient shape mismatch");
    if (!grads.all_finite()) throw NumericError("adam_step: non-finite gradient, step aborted");
    const auto& k = kernels::active();
    ++state.t;
    const double inv_bc1 = 1.0 / (1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t)));
    const double inv_bc2 = 1.0 / (1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t)));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        auto& ls = state.layers[i];
        const auto& lg = grads.layers[i];
        if (auto* d = std::get_if<DenseLayer>(&net.layers[i])) {
            const double* gw = lg.dW.data();
            if (lambda > 0.0) {
                // Weight decay applies to dense W only (not b, gamma, beta).
                state.scratch.assign(lg.dW.data(), lg.dW.data() + lg.dW.size());
                k.axpy(2.0 * lambda, d->W.data(), state.scratch.data(), state.scratch.size());
                gw = state.scratch.data();
            }
            k.adam_update(d->W.data(), ls.mW.data(), ls.vW.data(), gw, d->W.size(), lr,
                          kAdamBeta1, kAdamBeta2, kAdamEps, inv_bc1, inv_bc2);
            k.adam_update(d->b.data(), ls.mb.data(), ls.vb.data(), lg.db.data(), d->b.size(), lr,
                          kAdamBeta1, kAdamBeta2, kAdamEps, inv_bc1, inv_bc2);
        } else if (auto* bn = std::get_if<BNLayer>(&net.layers[i])) {
            if (!bn->affine) continue;
            k.adam_update(bn->gamma.data(), ls.mgamma.data(), ls.vgamma.data(), lg.dgamma.data(),
                          bn->gamma.size(), lr, kAdamBeta1, kAdamBeta2, kAdamEps, inv_bc1,
                          inv_bc2);
            k.adam_update(bn->beta.data(), ls.mbeta.data(), ls.vbeta.data(), lg.dbeta.data(),
                          bn->beta.size(), lr, kAdamBeta1, kAdamBeta2, kAdamEps, inv_bc1,
                          inv_bc2);
        }
    }
}

TrainResult train(Network net, const Matrix& x, const Matrix& y, const TrainConfig& cfg,
                  const Matrix& val_x, const Matrix& val_y) {
    if (x.rows() != y.rows()) throw DimensionError("train: x/y row mismatch");
    if (cfg.batch_size < 2) throw std::domain_error("train: batch size must be >= 2");
    if (!(cfg.learning_rate > 0.0)) throw std::domain_error("train: learning rate must be > 0");
    if (cfg.lambda < 0.0) throw std::domain_error("train: lambda must be >= 0");

    TrainResult result;
    result.history.clear();
    if (cfg.max_epochs == 0) {
        result.net = std::move(net);
        return result;
    }

    RngStream shuffle_rng(cfg.seed, 101);
    RngStream dropout_rng(cfg.seed, 102);
    AdamState adam = make_adam_state(net);
    const std::size_t n = x.rows();
    const std::size_t m = std::min(cfg.batch_size, n);

    double best_rmse = std::numeric_limits<double>::infinity();
    Network best_net = net;
    std::size_t best_epoch = 0;
    bool have_eval = false;

    std::vector<std::size_t> batch_idx;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto perm = shuffle_rng.permutation(n);
        double loss_acc = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += m) {
            const std::size_t count = std::min(m, n - start);
            if (count < 2) break;  // drop a trailing single-row batch
            batch_idx.assign(perm.begin() + start, perm.begin() + start + count);
            const Matrix bx = x.gather_rows(batch_idx);
            const Matrix by = y.gather_rows(batch_idx);
            auto [pred, cache] = forward_cached(net, bx, TrainMode{&dropout_rng});
            auto loss = sse_loss(pred, by);
            if (!std::isfinite(loss.loss))
                throw TrainingError("train: loss diverged", epoch);
            loss_acc += loss.loss;
            ++batches;
            const Gradients grads = backward(net, cache, loss.dy);
            adam_step(net, grads, adam, cfg.learning_rate, cfg.lambda);
        }
        if (epoch % cfg.eval_every == 0 || epoch == cfg.max_epochs) {
            compute_population_stats(net, x);
            const Matrix val_pred = forward(net, val_x, DeterministicMode{});
            const double rmse = metrics::rmse(
                std::span<const double>(val_pred.data(), val_pred.size()),
                std::span<const double>(val_y.data(), val_y.size()));
            result.history.push_back({epoch, loss_acc / static_cast<double>(batches), rmse});
            if (!have_eval || rmse < best_rmse) {
                have_eval = true;
                best_rmse = rmse;
                best_epoch = epoch;
                best_net = net;
            }
        }
    }
    result.net = std::move(best_net);
    result.best_epoch = best_epoch;
    result.best_rmse = best_rmse;
    return result;
}

namespace {

struct FoldCurve {
    std::vector<std::size_t> epochs;
    std::vector<double> rmse;  // original target scale
    bool diverged = false;
};

FoldCurve run_fold(const std::vector<GridPoint>& grid, std::size_t grid_index,
                   const data::Dataset& ds, const std::vector<std::vector<std::size_t>>& folds,
                   std::size_t fold_index, const TrainConfig& base_cfg, const NetFactory& factory,
                   std::uint64_t seed) {
    const GridPoint& gp = grid[grid_index];
    // Fold-train indices: every fold but `fold_index`.
    std::vector<std::size_t> train_idx;
    for (std::size_t f = 0; f < folds.size(); ++f)
        if (f != fold_index) train_idx.insert(train_idx.end(), folds[f].begin(), folds[f].end());
    const auto& val_idx = folds[fold_index];

    data::NormStats st;
    const data::Dataset norm = data::normalize(ds, train_idx, &st);

    const Matrix train_x = norm.x.gather_rows(train_idx);
    const Matrix val_x = norm.x.gather_rows(val_idx);
    Matrix train_y(train_idx.size(), 1), val_y(val_idx.size(), 1);
    for (std::size_t i = 0; i < train_idx.size(); ++i) train_y(i, 0) = norm.y[train_idx[i]];
    for (std::size_t i = 0; i < val_idx.size(); ++i) val_y(i, 0) = norm.y[val_idx[i]];

    TrainConfig cfg = base_cfg;
    cfg.lambda = gp.lambda;
    cfg.batch_size = std::min(gp.batch_size, train_idx.size());
    // Job stream: decorrelated per (gridpoint, fold).
    cfg.seed = seed + 1000003ULL * grid_index + 7919ULL * fold_index;

    FoldCurve curve;
    try {
        RngStream init_rng(cfg.seed, 100);
        Network net = factory(gp, init_rng);
        const TrainResult res = train(std::move(net), train_x, train_y, cfg, val_x, val_y);
        curve.epochs.reserve(res.history.size());
        curve.rmse.reserve(res.history.size());
        for (const auto& pt : res.history) {
            curve.epochs.push_back(pt.epoch);
            // Affine denormalization scales RMSE by y_std exactly.
            curve.rmse.push_back(pt.val_rmse * st.y_std);
        }
    } catch (const TrainingError&) {
        curve.diverged = true;
    } catch (const NumericError&) {
        curve.diverged = true;
    }
    return curve;
}

}  // namespace

CvSelection grid_search_cv(const std::vector<GridPoint>& grid, const data::Dataset& ds,
                           const std::vector<std::vector<std::size_t>>& folds,
                           const TrainConfig& base_cfg, const NetFactory& factory,
                           std::uint64_t seed, std::size_t workers) {
    if (grid.empty()) throw std::domain_error("grid_search_cv: empty grid");
    if (folds.size() < 2) throw std::domain_error("grid_search_cv: needs k >= 2 folds");

    const std::size_t jobs = grid.size() * folds.size();
    std::vector<FoldCurve> curves(jobs);
    const std::size_t pool = std::max<std::size_t>(1, workers);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs) return;
            const std::size_t gi = j / folds.size();
            const std::size_t fi = j % folds.size();
            curves[j] = run_fold(grid, gi, ds, folds, fi, base_cfg, factory, seed);
        }
    };
    if (pool == 1) {
        worker();
    } else {
        std::vector<std::future<void>> futures;
        for (std::size_t w = 0; w < pool; ++w)
            futures.push_back(std::async(std::launch::async, worker));
        for (auto& f : futures) f.get();
    }

    CvSelection sel;
    sel.table.reserve(grid.size());
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        GridEval eval;
        eval.point = grid[gi];
        bool diverged = false;
        for (std::size_t fi = 0; fi < folds.size(); ++fi)
            diverged = diverged || curves[gi * folds.size() + fi].diverged;
        if (!diverged) {
            const auto& epochs = curves[gi * folds.size()].epochs;
            eval.epochs = epochs;
            eval.mean_rmse.assign(epochs.size(), 0.0);
            for (std::size_t fi = 0; fi < folds.size(); ++fi) {
                const auto& c = curves[gi * folds.size() + fi];
                for (std::size_t e = 0; e < epochs.size(); ++e) eval.mean_rmse[e] += c.rmse[e];
            }
            for (double& v : eval.mean_rmse) v /= static_cast<double>(folds.size());
            for (std::size_t e = 0; e < epochs.size(); ++e) {
                if (eval.mean_rmse[e] < best) {  // strict: ties keep first grid order / earliest epoch
                    best = eval.mean_rmse[e];
                    sel.best = grid[gi];
                    sel.best_index = gi;
                    sel.best_epoch = epochs[e];
                    sel.best_mean_rmse = best;
                    found = true;
                }
            }
        } else {
            eval.mean_rmse.assign(1, std::numeric_limits<double>::infinity());
            eval.epochs.assign(1, 0);
        }
        sel.table.push_back(std::move(eval));
    }
    if (!found) throw TrainingError("grid_search_cv: every gridpoint diverged", 0);
    return sel;
}

TauEstimate optimize_tau(std::span<const CvPrediction> predictions) {
    if (predictions.empty()) throw std::domain_error("optimize_tau: empty predictions");
    const auto objective = [&](double log10_tau) {
        const double tau_inv = std::pow(10.0, -log10_tau);
        double acc = 0.0;
        for (const auto& p : predictions) {
            const double var = p.sample_var + tau_inv * p.noise_scale;
            acc += metrics::crps_gaussian(p.sample_mean, var, p.target);
        }
        return acc / static_cast<double>(predictions.size());
    };
    // 101-point grid on log10 tau in [-4, 6].
    constexpr double kLo = -4.0, kHi = 6.0;
    constexpr int kPoints = 101;
    double best_x = kLo, best_f = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < kPoints; ++i) {
        const double xx = kLo + (kHi - kLo) * i / (kPoints - 1);
        const double f = objective(xx);
        if (f < best_f) {
            best_f = f;
            best_x = xx;
            best_i = i;
        }
    }
    TauEstimate est;
    if (best_i == 0 || best_i == kPoints - 1) {
        est.at_edge = true;
        est.tau = std::pow(10.0, best_x);
        return est;
    }
    const double step = (kHi - kLo) / (kPoints - 1);
    const auto refined = minimize_scalar(objective, best_x - step, best_x + step, 1e-10);
    est.tau = std::pow(10.0, refined.argmin);
    return est;
}

}  // namespace mcbn::training
