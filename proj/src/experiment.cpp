#include "mcbn/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "mcbn/analysis.hpp"
#include "mcbn/errors.hpp"
#include "mcbn/kernels.hpp"
#include "mcbn/gaussian.hpp"
#include "mcbn/numeric.hpp"
#include "mcbn/serialize.hpp"
#include "mcbn/svg.hpp"

namespace mcbn::experiment {
namespace {

using nlohmann::json;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) {
    std::uint64_t h = mix64(base + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (c + 0xd6e8feb86659fd93ULL));
    return h;
}

bool is_bn_model(ModelKind kind) { return kind == ModelKind::Mcbn || kind == ModelKind::Cubn; }
bool is_cu_model(ModelKind kind) { return kind == ModelKind::Cubn || kind == ModelKind::Cudo; }

constexpr double kVarFloor = 1e-12;

double cu_crps(double mean, double v, double y) {
    if (v <= 0.0) return std::fabs(y - mean);  // point-prediction limit
    return metrics::crps_gaussian(mean, v, y);
}

double cu_pll(double mean, double v, double y) {
    return metrics::pll_gaussian(mean, v > kVarFloor ? v : kVarFloor, y);
}

Matrix to_column(const std::vector<double>& v) {
    Matrix out(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) out(i, 0) = v[i];
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

}  // namespace

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "mcbn") return ModelKind::Mcbn;
    if (s == "mcdo") return ModelKind::Mcdo;
    if (s == "cubn") return ModelKind::Cubn;
    if (s == "cudo") return ModelKind::Cudo;
    throw std::invalid_argument("unknown model kind: " + s);
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Mcbn: return "mcbn";
        case ModelKind::Mcdo: return "mcdo";
        case ModelKind::Cubn: return "cubn";
        case ModelKind::Cudo: return "cudo";
    }
    return "?";
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

data::Dataset resolve_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset == "toy") return data::make_toy_dataset(cfg.toy_n, 424242);
    if (cfg.dataset.size() > 4 && cfg.dataset.substr(cfg.dataset.size() - 4) == ".csv") {
        if (!std::filesystem::exists(cfg.dataset))
            throw DatasetMissingError("dataset file not found: " + cfg.dataset);
        // Plain CSV: last column is the target.
        std::ifstream in(cfg.dataset);
        std::string header;
        std::getline(in, header);
        std::vector<std::string> cols;
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) {
            while (!col.empty() && (col.back() == '\r' || col.back() == ' ')) col.pop_back();
            cols.push_back(col);
        }
        if (cols.size() < 2)
            throw std::invalid_argument("dataset csv needs at least two columns");
        data::ColumnSchema schema;
        schema.feature_columns.assign(cols.begin(), cols.end() - 1);
        schema.target_column = cols.back();
        return data::load_csv(cfg.dataset, schema);
    }
    if (!std::filesystem::exists(cfg.registry_path))
        throw DatasetMissingError("registry not found: " + cfg.registry_path);
    const auto registry = data::load_registry(cfg.registry_path);
    const auto entry = data::registry_find(registry, cfg.dataset);
    if (!entry) throw DatasetMissingError("dataset '" + cfg.dataset + "' not in registry");
    const std::string path = cfg.data_dir + "/" + entry->file;
    if (!std::filesystem::exists(path))
        throw DatasetMissingError("dataset file missing: " + path + " (source: " +
                                  entry->source + ")");
    return data::load_registered(*entry, cfg.data_dir);
}

std::vector<training::GridPoint> build_grid(const ExperimentConfig& cfg, std::size_t cv_size) {
    const bool dropout_path = !is_bn_model(cfg.model);
    std::vector<double> lambdas;
    std::vector<std::size_t> batches;
    std::vector<double> rates;
    if (cfg.grid_preset == "full") {
        for (int e = 1; e <= 15; ++e) lambdas.push_back(std::pow(10.0, -e));
        for (std::size_t m = 32; m <= 1024; m *= 2) batches.push_back(m);
        rates = {0.2, 0.1, 0.05, 0.01, 0.005, 0.001};
    } else if (cfg.grid_preset == "desk") {
        lambdas = {1e-2, 1e-4, 1e-6, 1e-8};
        batches = {32, 128};
        rates = {0.1, 0.01};
    } else {
        throw std::invalid_argument("unknown grid preset: " + cfg.grid_preset);
    }
    std::vector<training::GridPoint> grid;
    if (dropout_path) {
        for (double l : lambdas)
            for (double r : rates) grid.push_back({l, 32, r});
    } else {
        // Cap batch sizes at the CV fold-train size and drop duplicates.
        std::vector<std::size_t> capped;
        for (std::size_t m : batches) {
            const std::size_t c = std::min(m, cv_size);
            if (std::find(capped.begin(), capped.end(), c) == capped.end()) capped.push_back(c);
        }
        for (double l : lambdas)
            for (std::size_t m : capped) grid.push_back({l, m, 0.0});
    }
    return grid;
}

namespace {

Network build_model_net(const ExperimentConfig& cfg, std::size_t input_width,
                        const training::GridPoint& gp, RngStream& rng) {
    MlpSpec spec;
    spec.input_width = input_width;
    spec.hidden_widths = cfg.hidden;
    spec.batch_norm = is_bn_model(cfg.model);
    spec.dropout_rate = is_bn_model(cfg.model) ? 0.0 : gp.dropout_rate;
    return make_mlp(spec, rng);
}

// Trains for exactly `epochs` epochs (no snapshot selection) and refreshes
// population statistics; history records the in-sample RMSE.
training::TrainResult train_to_epoch(Network net, const Matrix& x, const Matrix& y,
                                     training::TrainConfig cfg, std::size_t epochs) {
    cfg.max_epochs = epochs;
    RngStream shuffle_rng(cfg.seed, 101);
    RngStream dropout_rng(cfg.seed, 102);
    auto adam = training::make_adam_state(net);
    const std::size_t n = x.rows();
    const std::size_t m = std::min(cfg.batch_size, n);
    training::TrainResult result;
    std::vector<std::size_t> batch_idx;
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        const auto perm = shuffle_rng.permutation(n);
        double loss_acc = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += m) {
            const std::size_t count = std::min(m, n - start);
            if (count < 2) break;
            batch_idx.assign(perm.begin() + start, perm.begin() + start + count);
            const Matrix bx = x.gather_rows(batch_idx);
            const Matrix by = y.gather_rows(batch_idx);
            auto [pred, cache] = forward_cached(net, bx, TrainMode{&dropout_rng});
            auto loss = training::sse_loss(pred, by);
            if (!std::isfinite(loss.loss)) throw TrainingError("train_to_epoch: loss diverged", epoch);
            loss_acc += loss.loss;
            ++batches;
            const Gradients grads = backward(net, cache, loss.dy);
            training::adam_step(net, grads, adam, cfg.learning_rate, cfg.lambda);
        }
        if (epoch % cfg.eval_every == 0 || epoch == epochs) {
            compute_population_stats(net, x);
            const Matrix pred = forward(net, x, DeterministicMode{});
            const double rmse = metrics::rmse(
                std::span<const double>(pred.data(), pred.size()),
                std::span<const double>(y.data(), y.size()));
            result.history.push_back({epoch, loss_acc / static_cast<double>(batches), rmse});
        }
    }
    compute_population_stats(net, x);
    result.net = std::move(net);
    result.best_epoch = epochs;
    return result;
}

struct FoldData {
    Matrix train_x, train_y, val_x, val_y;
    data::NormStats stats;
    std::vector<std::size_t> val_idx;
};

FoldData make_fold_data(const data::Dataset& ds,
                        const std::vector<std::vector<std::size_t>>& folds,
                        std::size_t fold_index) {
    std::vector<std::size_t> train_idx;
    for (std::size_t f = 0; f < folds.size(); ++f)
        if (f != fold_index) train_idx.insert(train_idx.end(), folds[f].begin(), folds[f].end());
    FoldData fd;
    fd.val_idx = folds[fold_index];
    const data::Dataset norm = data::normalize(ds, train_idx, &fd.stats);
    fd.train_x = norm.x.gather_rows(train_idx);
    fd.val_x = norm.x.gather_rows(fd.val_idx);
    std::vector<double> ty(train_idx.size()), vy(fd.val_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) ty[i] = norm.y[train_idx[i]];
    for (std::size_t i = 0; i < fd.val_idx.size(); ++i) vy[i] = norm.y[fd.val_idx[i]];
    fd.train_y = to_column(ty);
    fd.val_y = to_column(vy);
    return fd;
}

std::vector<PredictiveDistribution> stochastic_predict(const ExperimentConfig& cfg,
                                                       const Network& net, const Matrix& queries,
                                                       const Matrix& train_x,
                                                       const inference::InferenceConfig& icfg) {
    if (is_bn_model(cfg.model)) {
        if (cfg.omega_source == "model")
            return inference::mcbn_predict_modeled_omega(net, queries, train_x, icfg);
        return inference::mcbn_predict(net, queries, train_x, icfg);
    }
    return inference::mcdo_predict(net, queries, icfg);
}

}  // namespace

SplitArtifacts train_split(const ExperimentConfig& cfg, const data::Dataset& ds,
                           const data::Split& split) {
    SplitArtifacts art;
    art.split = split;

    std::size_t fold_train_min = std::numeric_limits<std::size_t>::max();
    for (std::size_t f = 0; f < split.folds.size(); ++f)
        fold_train_min = std::min(fold_train_min, split.train_idx.size() - split.folds[f].size());
    const auto grid = build_grid(cfg, fold_train_min);

    training::TrainConfig base;
    base.max_epochs = cfg.max_epochs;
    base.eval_every = cfg.eval_every;
    base.learning_rate = cfg.learning_rate;
    const std::uint64_t cv_seed = derive_seed(cfg.seed, split.seed, 1);
    const training::NetFactory factory = [&](const training::GridPoint& gp, RngStream& rng) {
        return build_model_net(cfg, ds.q(), gp, rng);
    };
    art.selection = training::grid_search_cv(grid, ds, split.folds, base, factory, cv_seed,
                                             cfg.workers);

    // Re-train the winning gridpoint per fold (identical seeds reproduce the
    // CV trajectories) and collect stochastic predictions on each validation
    // fold for tau and the CU constant.
    const std::size_t gi = art.selection.best_index;
    std::vector<training::CvPrediction> tau_preds;
    std::vector<double> cu_means, cu_targets;
    for (std::size_t f = 0; f < split.folds.size(); ++f) {
        const FoldData fd = make_fold_data(ds, split.folds, f);
        training::TrainConfig fold_cfg = base;
        fold_cfg.lambda = art.selection.best.lambda;
        fold_cfg.batch_size = std::min(art.selection.best.batch_size, fd.train_x.rows());
        fold_cfg.seed = cv_seed + 1000003ULL * gi + 7919ULL * f;
        RngStream init_rng(fold_cfg.seed, 100);
        Network fold_net = build_model_net(cfg, ds.q(), art.selection.best, init_rng);
        auto trained = train_to_epoch(std::move(fold_net), fd.train_x, fd.train_y, fold_cfg,
                                      art.selection.best_epoch);

        inference::InferenceConfig icfg;
        icfg.passes = cfg.passes;
        icfg.batch_size = std::min(art.selection.best.batch_size, fd.train_x.rows());
        icfg.seed = derive_seed(cfg.seed, split.seed, 2, f);
        icfg.tau = 1.0;  // placeholder; only sample moments are used here
        const auto preds = stochastic_predict(cfg, trained.net, fd.val_x, fd.train_x, icfg);
        const double ys = fd.stats.y_std;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const double target = ds.y[fd.val_idx[i]];
            const double mean = preds[i].mean * ys + fd.stats.y_mean;
            const double svar = (preds[i].variance - 1.0 / icfg.tau) * ys * ys;
            tau_preds.push_back({mean, svar, ys * ys, target});
            cu_means.push_back(mean);
            cu_targets.push_back(target);
        }
    }
    art.tau = training::optimize_tau(tau_preds);
    art.cu = inference::fit_constant_uncertainty(cu_means, cu_targets);

    // Final model on the full CV set at the selected hyperparameters.
    const data::Dataset norm = data::normalize(ds, split.train_idx, &art.norm);
    const Matrix train_x = norm.x.gather_rows(split.train_idx);
    std::vector<double> ty(split.train_idx.size());
    for (std::size_t i = 0; i < split.train_idx.size(); ++i) ty[i] = norm.y[split.train_idx[i]];
    training::TrainConfig final_cfg = base;
    final_cfg.lambda = art.selection.best.lambda;
    final_cfg.batch_size = std::min(art.selection.best.batch_size, train_x.rows());
    final_cfg.seed = derive_seed(cfg.seed, split.seed, 3);
    RngStream init_rng(final_cfg.seed, 100);
    Network net = build_model_net(cfg, ds.q(), art.selection.best, init_rng);
    auto trained = train_to_epoch(std::move(net), train_x, to_column(ty), final_cfg,
                                  art.selection.best_epoch);
    art.net = std::move(trained.net);
    art.final_history = std::move(trained.history);
    return art;
}

RunScores evaluate_run(const ExperimentConfig& cfg, const data::Dataset& ds,
                       const SplitArtifacts& art, std::uint64_t eval_seed,
                       std::vector<ObservationScore>* per_obs,
                       std::vector<PredictiveDistribution>* predictions) {
    const data::Dataset norm = data::apply_normalization(ds, art.norm);
    const auto& pool = art.pool_idx.empty() ? art.split.train_idx : art.pool_idx;
    const Matrix train_x = norm.x.gather_rows(pool);
    const Matrix test_x = norm.x.gather_rows(art.split.test_idx);
    const std::size_t n_test = art.split.test_idx.size();

    inference::InferenceConfig icfg;
    icfg.passes = cfg.passes;
    icfg.batch_size = std::min(art.selection.best.batch_size, train_x.rows());
    icfg.seed = eval_seed;
    icfg.tau = art.tau.tau;
    auto preds = stochastic_predict(cfg, art.net, test_x, train_x, icfg);
    for (auto& pd : preds) pd = data::denormalize_prediction(pd, art.norm);
    if (predictions) *predictions = preds;

    metrics::ScoreSet model, baseline, bounds;
    model.crps.resize(n_test);
    model.pll.resize(n_test);
    baseline.crps.resize(n_test);
    baseline.pll.resize(n_test);
    bounds.crps.resize(n_test);
    bounds.pll.resize(n_test);
    std::vector<double> means(n_test), targets(n_test);
    std::size_t degenerate = 0;
    if (per_obs) per_obs->resize(n_test);

    const bool cu_model = is_cu_model(cfg.model);
    for (std::size_t i = 0; i < n_test; ++i) {
        const double y = ds.y[art.split.test_idx[i]];
        const auto& pd = preds[i];
        means[i] = pd.mean;
        targets[i] = y;
        if (cu_model) {
            model.crps[i] = cu_crps(pd.mean, art.cu.v, y);
            model.pll[i] = cu_pll(pd.mean, art.cu.v, y);
        } else {
            model.crps[i] = metrics::crps_gaussian(pd.mean, pd.variance, y);
            model.pll[i] = metrics::pll_mc(pd.samples, y, pd.tau);
        }
        baseline.crps[i] = cu_crps(pd.mean, art.cu.v, y);
        baseline.pll[i] = cu_pll(pd.mean, art.cu.v, y);
        const auto vc = metrics::optimal_variance_crps(pd.mean, y);
        const auto vp = metrics::optimal_variance_pll(pd.mean, y);
        bounds.crps[i] = metrics::crps_gaussian(pd.mean, vc.v, y);
        bounds.pll[i] = metrics::pll_gaussian(pd.mean, vp.v, y);
        if (vc.degenerate || vp.degenerate) ++degenerate;
        if (per_obs) {
            auto& obs = (*per_obs)[i];
            obs.query_id = i;
            obs.x0 = ds.x(art.split.test_idx[i], 0);
            obs.mean = pd.mean;
            obs.variance = cu_model ? art.cu.v : pd.variance;
            obs.target = y;
            obs.crps = model.crps[i];
            obs.pll = model.pll[i];
            obs.baseline_crps = baseline.crps[i];
            obs.baseline_pll = baseline.pll[i];
            obs.baseline_variance = art.cu.v;
            obs.bound_crps = bounds.crps[i];
            obs.bound_pll = bounds.pll[i];
            obs.v_crps = vc.v;
            obs.v_pll = vp.v;
            obs.degenerate = vc.degenerate || vp.degenerate;
        }
    }

    const auto ns = metrics::normalized_scores(model, baseline, bounds,
                                               cfg.per_observation_norm);
    RunScores rs;
    rs.split_seed = art.split.seed;
    rs.eval_seed = eval_seed;
    rs.crps_bar = ns.crps_bar;
    rs.pll_bar = ns.pll_bar;
    rs.mean_crps = model.mean_crps();
    rs.mean_pll = model.mean_pll();
    rs.baseline_mean_crps = baseline.mean_crps();
    rs.baseline_mean_pll = baseline.mean_pll();
    rs.bound_mean_crps = bounds.mean_crps();
    rs.bound_mean_pll = bounds.mean_pll();
    rs.rmse = metrics::rmse(means, targets);
    rs.degenerate_count = degenerate;
    return rs;
}

ProtocolReport summarize_runs(const std::vector<RunScores>& runs) {
    ProtocolReport rep;
    rep.runs = runs;
    std::vector<double> crps_bars, pll_bars;
    double rmse_acc = 0.0;
    for (const auto& r : runs) {
        crps_bars.push_back(r.crps_bar);
        pll_bars.push_back(r.pll_bar);
        rmse_acc += r.rmse;
    }
    const double n = static_cast<double>(runs.size());
    rep.mean_crps_bar = kernels::active().sum(crps_bars.data(), crps_bars.size()) / n;
    rep.mean_pll_bar = kernels::active().sum(pll_bars.data(), pll_bars.size()) / n;
    rep.mean_rmse = rmse_acc / n;
    if (runs.size() >= 2) {
        try {
            rep.crps_test = metrics::one_sample_t_test(crps_bars, 0.0);
            const double s_c = std::sqrt(kernels::active().sumsq_dev(
                                   crps_bars.data(), crps_bars.size(), rep.mean_crps_bar) /
                               (n - 1.0));
            rep.se_crps_bar = s_c / std::sqrt(n);
        } catch (const std::domain_error&) {
            rep.crps_test = {0.0, 1.0, runs.size()};
        }
        try {
            rep.pll_test = metrics::one_sample_t_test(pll_bars, 0.0);
            const double s_p = std::sqrt(kernels::active().sumsq_dev(
                                   pll_bars.data(), pll_bars.size(), rep.mean_pll_bar) /
                               (n - 1.0));
            rep.se_pll_bar = s_p / std::sqrt(n);
        } catch (const std::domain_error&) {
            rep.pll_test = {0.0, 1.0, runs.size()};
        }
    }
    return rep;
}

ProtocolReport run_full_protocol(const ExperimentConfig& cfg, const data::Dataset& ds,
                                 std::vector<ObservationScore>* first_run_obs) {
    data::SplitPlan plan;
    plan.split_seeds.clear();
    for (std::size_t i = 0; i < cfg.splits; ++i)
        plan.split_seeds.push_back(derive_seed(cfg.seed, 17, i));
    plan.fold_count = cfg.folds;
    plan.eval_seeds_per_split = cfg.eval_seeds;
    const auto splits = data::make_splits(ds, plan);
    std::vector<RunScores> runs;
    bool first = true;
    for (const auto& split : splits) {
        const SplitArtifacts art = train_split(cfg, ds, split);
        for (std::size_t j = 0; j < cfg.eval_seeds; ++j) {
            runs.push_back(evaluate_run(cfg, ds, art, derive_seed(cfg.seed, split.seed, 4, j),
                                        first ? first_run_obs : nullptr));
            first = false;
        }
    }
    return summarize_runs(runs);
}

RunScores sweep_single(const ExperimentConfig& cfg, const data::Dataset& ds,
                       const data::Split& split, const training::GridPoint& gp,
                       std::size_t passes, std::uint64_t seed) {
    // Fixed hyperparameters: one held-out fold picks the epoch, the
    // remaining folds train the network.
    const FoldData fd = make_fold_data(ds, split.folds, 0);
    training::TrainConfig cfg_t;
    cfg_t.lambda = gp.lambda;
    cfg_t.batch_size = std::min(gp.batch_size, fd.train_x.rows());
    cfg_t.max_epochs = cfg.max_epochs;
    cfg_t.eval_every = cfg.eval_every;
    cfg_t.learning_rate = cfg.learning_rate;
    cfg_t.seed = derive_seed(seed, split.seed, 5);
    RngStream init_rng(cfg_t.seed, 100);
    Network net = build_model_net(cfg, ds.q(), gp, init_rng);
    auto trained = training::train(std::move(net), fd.train_x, fd.train_y, cfg_t, fd.val_x,
                                   fd.val_y);

    // tau and CU constant from the held-out fold.
    inference::InferenceConfig icfg;
    icfg.passes = passes;
    icfg.batch_size = cfg_t.batch_size;
    icfg.seed = derive_seed(seed, split.seed, 6);
    icfg.tau = 1.0;
    const auto val_preds = stochastic_predict(cfg, trained.net, fd.val_x, fd.train_x, icfg);
    std::vector<training::CvPrediction> tau_preds;
    std::vector<double> cu_means, cu_targets;
    const double ys = fd.stats.y_std;
    for (std::size_t i = 0; i < val_preds.size(); ++i) {
        const double target = ds.y[fd.val_idx[i]];
        const double mean = val_preds[i].mean * ys + fd.stats.y_mean;
        const double svar = (val_preds[i].variance - 1.0) * ys * ys;
        tau_preds.push_back({mean, svar, ys * ys, target});
        cu_means.push_back(mean);
        cu_targets.push_back(target);
    }
    SplitArtifacts art;
    art.split = split;
    art.selection.best = gp;
    art.selection.best_index = 0;
    art.selection.best_epoch = trained.best_epoch;
    art.tau = training::optimize_tau(tau_preds);
    art.cu = inference::fit_constant_uncertainty(cu_means, cu_targets);
    art.norm = fd.stats;
    art.net = std::move(trained.net);
    for (std::size_t f = 1; f < split.folds.size(); ++f)
        art.pool_idx.insert(art.pool_idx.end(), split.folds[f].begin(), split.folds[f].end());

    ExperimentConfig run_cfg = cfg;
    run_cfg.passes = passes;
    return evaluate_run(run_cfg, ds, art, derive_seed(seed, split.seed, 7));
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const data::Dataset& ds) {
    data::SplitPlan plan;
    plan.split_seeds.clear();
    const std::size_t sweep_splits = std::min<std::size_t>(cfg.splits, 3);
    for (std::size_t i = 0; i < sweep_splits; ++i)
        plan.split_seeds.push_back(derive_seed(cfg.seed, 17, i));
    plan.fold_count = cfg.folds;
    const auto splits = data::make_splits(ds, plan);

    std::vector<SweepRow> rows;
    const bool batch_axis = cfg.sweep_axis == "batch_size";
    std::vector<std::size_t> axis_values;
    if (batch_axis)
        axis_values = {8, 16, 32, 64, 128, 256, 512, 1024};
    else if (cfg.sweep_axis == "passes")
        axis_values = {50, 100, 250};
    else
        throw std::invalid_argument("unknown sweep axis: " + cfg.sweep_axis);

    for (std::size_t value : axis_values) {
        SweepRow row;
        row.axis_value = static_cast<double>(value);
        if (batch_axis && value > ds.n()) {
            row.skipped = true;
            row.note = "batch size exceeds dataset size";
            rows.push_back(row);
            continue;
        }
        double crps_acc = 0.0, pll_acc = 0.0;
        std::size_t n_runs = 0;
        for (const auto& split : splits) {
            for (std::size_t s = 0; s < cfg.eval_seeds; ++s) {
                training::GridPoint gp;
                gp.lambda = cfg.sweep_lambda;
                gp.batch_size = batch_axis ? value : cfg.sweep_batch.value_or(32);
                gp.dropout_rate = is_bn_model(cfg.model) ? 0.0 : 0.05;
                const std::size_t passes = batch_axis ? cfg.passes : value;
                const RunScores rs =
                    sweep_single(cfg, ds, split, gp, passes, derive_seed(cfg.seed, 23, s));
                crps_acc += rs.crps_bar;
                pll_acc += rs.pll_bar;
                ++n_runs;
            }
        }
        row.mean_crps_bar = crps_acc / static_cast<double>(n_runs);
        row.mean_pll_bar = pll_acc / static_cast<double>(n_runs);
        row.runs = n_runs;
        rows.push_back(row);
    }
    return rows;
}

// --- file emission ---------------------------------------------------------

void write_split_artifacts(const ExperimentConfig& cfg, const SplitArtifacts& art,
                           const std::string& dir) {
    ensure_dir(dir);
    save_network(art.net, dir + "/network.json");

    json hp;
    hp["model"] = model_kind_name(cfg.model);
    hp["split_seed"] = art.split.seed;
    hp["grid"] = {{"lambda", art.selection.best.lambda},
                  {"batch_size", art.selection.best.batch_size},
                  {"dropout_rate", art.selection.best.dropout_rate}};
    hp["best_epoch"] = art.selection.best_epoch;
    hp["best_mean_cv_rmse"] = art.selection.best_mean_rmse;
    hp["tau"] = art.tau.tau;
    hp["tau_at_edge"] = art.tau.at_edge;
    hp["cu_variance"] = art.cu.v;
    hp["cu_at_edge"] = art.cu.at_edge;
    hp["normalization"] = {{"x_mean", art.norm.x_mean},
                           {"x_std", art.norm.x_std},
                           {"y_mean", art.norm.y_mean},
                           {"y_std", art.norm.y_std},
                           {"constant_features", art.norm.constant_features}};
    std::ofstream(dir + "/hyperparams.json") << hp.dump(2) << '\n';

    std::ofstream cv(dir + "/cv_history.csv");
    cv << "grid_index,lambda,batch_size,dropout_rate,epoch,mean_cv_rmse\n";
    for (std::size_t gi = 0; gi < art.selection.table.size(); ++gi) {
        const auto& eval = art.selection.table[gi];
        for (std::size_t e = 0; e < eval.epochs.size(); ++e)
            cv << gi << ',' << format_double(eval.point.lambda) << ',' << eval.point.batch_size
               << ',' << format_double(eval.point.dropout_rate) << ',' << eval.epochs[e] << ','
               << format_double(eval.mean_rmse[e]) << '\n';
    }

    std::ofstream th(dir + "/train_history.csv");
    th << "epoch,train_loss,cv_rmse\n";
    for (const auto& pt : art.final_history)
        th << pt.epoch << ',' << format_double(pt.train_loss) << ','
           << format_double(pt.val_rmse) << '\n';
}

SplitArtifacts load_split_artifacts(const ExperimentConfig& cfg, const data::Dataset& ds,
                                    const std::string& dir) {
    SplitArtifacts art;
    art.net = load_network(dir + "/network.json");
    if (art.net.input_width != ds.q())
        throw ContractError("network input width " + std::to_string(art.net.input_width) +
                            " does not match dataset feature count " + std::to_string(ds.q()));
    std::ifstream in(dir + "/hyperparams.json");
    if (!in) throw std::runtime_error("missing " + dir + "/hyperparams.json");
    json hp;
    in >> hp;
    art.selection.best.lambda = hp.at("grid").at("lambda").get<double>();
    art.selection.best.batch_size = hp.at("grid").at("batch_size").get<std::size_t>();
    art.selection.best.dropout_rate = hp.at("grid").at("dropout_rate").get<double>();
    art.selection.best_epoch = hp.at("best_epoch").get<std::size_t>();
    art.tau.tau = hp.at("tau").get<double>();
    art.tau.at_edge = hp.at("tau_at_edge").get<bool>();
    art.cu.v = hp.at("cu_variance").get<double>();
    art.cu.at_edge = hp.at("cu_at_edge").get<bool>();
    art.norm.x_mean = hp.at("normalization").at("x_mean").get<std::vector<double>>();
    art.norm.x_std = hp.at("normalization").at("x_std").get<std::vector<double>>();
    art.norm.y_mean = hp.at("normalization").at("y_mean").get<double>();
    art.norm.y_std = hp.at("normalization").at("y_std").get<double>();
    art.norm.constant_features =
        hp.at("normalization").at("constant_features").get<std::vector<std::size_t>>();

    const std::uint64_t split_seed = hp.at("split_seed").get<std::uint64_t>();
    data::SplitPlan plan;
    plan.split_seeds = {split_seed};
    plan.fold_count = cfg.folds;
    art.split = data::make_splits(ds, plan)[0];
    return art;
}

void write_samples_csv(const std::vector<PredictiveDistribution>& preds,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "query_id,pass,value\n";
    for (std::size_t q = 0; q < preds.size(); ++q)
        for (std::size_t t = 0; t < preds[q].samples.size(); ++t)
            out << q << ',' << t << ',' << format_double(preds[q].samples[t]) << '\n';
}

void write_scores_csv(const std::vector<ObservationScore>& scores, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "query_id,x0,mean,variance,target,crps,pll,baseline_crps,baseline_pll,"
           "baseline_variance,bound_crps,bound_pll,v_crps,v_pll,degenerate\n";
    for (const auto& s : scores)
        out << s.query_id << ',' << format_double(s.x0) << ',' << format_double(s.mean) << ','
            << format_double(s.variance) << ',' << format_double(s.target) << ','
            << format_double(s.crps) << ',' << format_double(s.pll) << ','
            << format_double(s.baseline_crps) << ',' << format_double(s.baseline_pll) << ','
            << format_double(s.baseline_variance) << ',' << format_double(s.bound_crps) << ','
            << format_double(s.bound_pll) << ',' << format_double(s.v_crps) << ','
            << format_double(s.v_pll) << ',' << (s.degenerate ? 1 : 0) << '\n';
}

namespace {

double parse_csv_double(const std::string& s, std::size_t row) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("scores csv: malformed number '" + s + "' at row " +
                                    std::to_string(row));
    return v;
}

}  // namespace

std::vector<ObservationScore> read_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("scores csv: empty file " + path);
    std::vector<ObservationScore> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 15)
            throw std::invalid_argument("scores csv: row " + std::to_string(row) + " has " +
                                        std::to_string(f.size()) + " fields, expected 15");
        ObservationScore s;
        s.query_id = static_cast<std::size_t>(parse_csv_double(f[0], row));
        s.x0 = parse_csv_double(f[1], row);
        s.mean = parse_csv_double(f[2], row);
        s.variance = parse_csv_double(f[3], row);
        s.target = parse_csv_double(f[4], row);
        s.crps = parse_csv_double(f[5], row);
        s.pll = parse_csv_double(f[6], row);
        s.baseline_crps = parse_csv_double(f[7], row);
        s.baseline_pll = parse_csv_double(f[8], row);
        s.baseline_variance = parse_csv_double(f[9], row);
        s.bound_crps = parse_csv_double(f[10], row);
        s.bound_pll = parse_csv_double(f[11], row);
        s.v_crps = parse_csv_double(f[12], row);
        s.v_pll = parse_csv_double(f[13], row);
        s.degenerate = parse_csv_double(f[14], row) != 0.0;
        out.push_back(s);
    }
    return out;
}

void write_metric_report(const ExperimentConfig& cfg, const ProtocolReport& report,
                         const std::string& path) {
    json doc;
    doc["model"] = model_kind_name(cfg.model);
    doc["dataset"] = cfg.dataset;
    doc["passes"] = cfg.passes;
    doc["runs"] = json::array();
    for (const auto& r : report.runs) {
        doc["runs"].push_back({{"split_seed", r.split_seed},
                               {"eval_seed", r.eval_seed},
                               {"crps_bar", r.crps_bar},
                               {"pll_bar", r.pll_bar},
                               {"mean_crps", r.mean_crps},
                               {"mean_pll", r.mean_pll},
                               {"rmse", r.rmse},
                               {"baseline_mean_crps", r.baseline_mean_crps},
                               {"baseline_mean_pll", r.baseline_mean_pll},
                               {"bound_mean_crps", r.bound_mean_crps},
                               {"bound_mean_pll", r.bound_mean_pll},
                               {"degenerate_count", r.degenerate_count}});
    }
    doc["summary"] = {{"mean_crps_bar", report.mean_crps_bar},
                      {"se_crps_bar", report.se_crps_bar},
                      {"mean_pll_bar", report.mean_pll_bar},
                      {"se_pll_bar", report.se_pll_bar},
                      {"mean_rmse", report.mean_rmse},
                      {"crps_t", report.crps_test.t},
                      {"crps_p_one_sided", report.crps_test.p_one_sided},
                      {"pll_t", report.pll_test.t},
                      {"pll_p_one_sided", report.pll_test.p_one_sided},
                      {"n", report.crps_test.n}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << doc.dump(2) << '\n';
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << axis << ",mean_crps_bar,mean_pll_bar,runs,note\n";
    for (const auto& r : rows) {
        if (r.skipped)
            out << format_double(r.axis_value) << ",,,0," << r.note << '\n';
        else
            out << format_double(r.axis_value) << ',' << format_double(r.mean_crps_bar) << ','
                << format_double(r.mean_pll_bar) << ',' << r.runs << ',' << r.note << '\n';
    }
}

// --- verification ------------------------------------------------------------

VerifyReport run_verify(const ExperimentConfig& cfg) {
    VerifyReport rep;

    // Synthetic Gaussian-input network: first-layer pre-activations are
    // exactly Gaussian, the CLT setting of the batch-statistics analysis.
    const std::size_t n = 2048, q = 8, m = 32, draws = 1000;
    RngStream data_rng(cfg.seed, 301);
    Matrix x(n, q);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = data_rng.next_gaussian();
    MlpSpec spec;
    spec.input_width = q;
    spec.hidden_widths = cfg.hidden;
    spec.batch_norm = true;
    RngStream net_rng(cfg.seed, 302);
    Network net = make_mlp(spec, net_rng);
    RngStream draw_rng(cfg.seed, 303);
    rep.ks_rows = analysis::bn_normality_report(net, x, m, draws, draw_rng);

    std::size_t first_units = 0, mu_pass = 0, shape_pass = 0, spread_pass = 0, param_pass = 0;
    for (const auto& row : rep.ks_rows) {
        if (row.layer != 0) continue;
        ++first_units;
        mu_pass += row.mu_p > 0.01;
        shape_pass += row.sigma_shape_p > 0.01;
        spread_pass += std::fabs(row.sigma_sd_ratio - 1.0) < 0.15;
        param_pass += row.sigma_p > 0.01;
    }
    rep.mu_parametric_pass_rate = static_cast<double>(mu_pass) / first_units;
    rep.sigma_shape_pass_rate = static_cast<double>(shape_pass) / first_units;
    rep.sigma_spread_pass_rate = static_cast<double>(spread_pass) / first_units;
    rep.sigma_parametric_pass_rate = static_cast<double>(param_pass) / first_units;
    rep.mu_ok = rep.mu_parametric_pass_rate >= 0.90;
    rep.sigma_shape_ok = rep.sigma_shape_pass_rate >= 0.80;
    rep.sigma_spread_ok = rep.sigma_spread_pass_rate >= 0.80;

    // KL closed form vs numerical integration on 500 random pairs.
    RngStream kl_rng(cfg.seed, 304);
    double max_diff = 0.0;
    for (int i = 0; i < 500; ++i) {
        const Gaussian gq{kl_rng.next_gaussian() * 2.0, 0.1 + 4.9 * kl_rng.next_double()};
        const Gaussian gp{kl_rng.next_gaussian() * 2.0, 0.1 + 4.9 * kl_rng.next_double()};
        const double closed = analysis::kl_gaussian(gq, gp);
        const double sd = std::sqrt(gq.variance);
        const auto log_pdf = [](double w, const Gaussian& g) {
            const double d = w - g.mean;
            return -0.5 * std::log(2.0 * std::numbers::pi * g.variance) -
                   0.5 * d * d / g.variance;
        };
        const auto integrand = [&](double w) {
            return gauss_pdf(w, gq) * (log_pdf(w, gq) - log_pdf(w, gp));
        };
        const double numeric =
            quadrature(integrand, gq.mean - 12.0 * sd, gq.mean + 12.0 * sd, 1e-10);
        max_diff = std::max(max_diff, std::fabs(closed - numeric));
    }
    rep.kl_max_abs_diff = max_diff;
    const Gaussian same{0.7, 1.3};
    rep.kl_self = analysis::kl_gaussian(same, same);
    rep.kl_ok = max_diff < 1e-6 && std::fabs(rep.kl_self) <= 1e-12;

    const auto prior = analysis::prior_params(cfg.toy_n, 1.0, cfg.sweep_lambda);
    rep.prior_sigma_sigma_p = prior.sigma_sigma_p;
    rep.prior_ok = !prior.improper &&
                   prior.sigma_sigma_p ==
                       1.0 / (2.0 * static_cast<double>(cfg.toy_n) * 1.0 * cfg.sweep_lambda);

    if (!rep.mu_ok) rep.failures.push_back("mu_B parametric KS pass rate below 0.90");
    if (!rep.sigma_shape_ok) rep.failures.push_back("sigma_B shape KS pass rate below 0.80");
    if (!rep.sigma_spread_ok) rep.failures.push_back("sigma_B spread match below 0.80");
    if (!rep.kl_ok) rep.failures.push_back("KL closed form vs quadrature above 1e-6");
    if (!rep.prior_ok) rep.failures.push_back("prior constant mismatch");
    return rep;
}

void write_verify_outputs(const VerifyReport& rep, const std::string& dir) {
    ensure_dir(dir);
    json doc;
    doc["mu_parametric_pass_rate"] = rep.mu_parametric_pass_rate;
    doc["sigma_shape_pass_rate"] = rep.sigma_shape_pass_rate;
    doc["sigma_spread_pass_rate"] = rep.sigma_spread_pass_rate;
    doc["sigma_parametric_pass_rate"] = rep.sigma_parametric_pass_rate;
    doc["kl_max_abs_diff"] = rep.kl_max_abs_diff;
    doc["kl_self"] = rep.kl_self;
    doc["prior_sigma_sigma_p"] = rep.prior_sigma_sigma_p;
    doc["failures"] = rep.failures;
    std::ofstream(dir + "/verify_report.json") << doc.dump(2) << '\n';

    // Histogram bin data for the first two first-layer units: standardized
    // batch statistics against the standard normal density.
    std::ofstream hist(dir + "/bn_histograms.csv");
    hist << "layer,unit,statistic,bin_left,bin_right,count,normal_density\n";
    {
        RngStream hist_rng(20251, 0);
        const std::size_t n = 2048, q = 8, m = 32, draws = 1000;
        Matrix x(n, q);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = hist_rng.next_gaussian();
        MlpSpec spec;
        spec.input_width = q;
        spec.hidden_widths = {16};
        RngStream net_rng(20252, 0);
        Network net = make_mlp(spec, net_rng);
        RngStream draw_rng(20253, 0);
        const auto samples = analysis::collect_bn_stat_samples(net, x, m, draws, draw_rng);
        const auto standardize = [](std::vector<double> v) {
            double mean = 0.0;
            for (double s : v) mean += s;
            mean /= static_cast<double>(v.size());
            double var = 0.0;
            for (double s : v) var += (s - mean) * (s - mean);
            const double sd = std::sqrt(var / static_cast<double>(v.size()));
            for (double& s : v) s = (s - mean) / sd;
            return v;
        };
        const int bins = 30;
        for (std::size_t u = 0; u < 2 && u < samples.mu[0].size(); ++u) {
            for (const char* stat : {"mu_B", "sigma_B"}) {
                const auto z = standardize(std::string(stat) == "mu_B" ? samples.mu[0][u]
                                                                        : samples.sigma[0][u]);
                std::vector<std::size_t> counts(bins, 0);
                for (double v : z) {
                    const int b = static_cast<int>((v + 4.0) / 8.0 * bins);
                    if (b >= 0 && b < bins) ++counts[b];
                }
                for (int b = 0; b < bins; ++b) {
                    const double left = -4.0 + 8.0 * b / bins;
                    const double right = -4.0 + 8.0 * (b + 1) / bins;
                    hist << 0 << ',' << u << ',' << stat << ',' << format_double(left) << ','
                         << format_double(right) << ',' << counts[b] << ','
                         << format_double(std_normal_pdf(0.5 * (left + right))) << '\n';
                }
            }
        }
    }

    std::ofstream csv(dir + "/bn_normality.csv");
    csv << "layer,unit,mu_D,mu_p,sigma_D,sigma_p,mu_shape_D,mu_shape_p,sigma_shape_D,"
           "sigma_shape_p,sigma_sd_ratio\n";
    for (const auto& r : rep.ks_rows)
        csv << r.layer << ',' << r.unit << ',' << format_double(r.mu_d) << ','
            << format_double(r.mu_p) << ',' << format_double(r.sigma_d) << ','
            << format_double(r.sigma_p) << ',' << format_double(r.mu_shape_d) << ','
            << format_double(r.mu_shape_p) << ',' << format_double(r.sigma_shape_d) << ','
            << format_double(r.sigma_shape_p) << ',' << format_double(r.sigma_sd_ratio) << '\n';
}

// --- plotting ----------------------------------------------------------------

PlotSeries uncertainty_error_series(const std::vector<ObservationScore>& scores) {
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a].variance != scores[b].variance)
            return scores[a].variance < scores[b].variance;
        return a < b;  // stable under equal variances
    });
    PlotSeries s;
    const std::size_t n = scores.size();
    s.abs_error.resize(n);
    s.half50.resize(n);
    s.half95.resize(n);
    s.running_mean.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& obs = scores[order[i]];
        const double sd = std::sqrt(obs.variance);
        s.abs_error[i] = std::fabs(obs.target - obs.mean);
        s.half50[i] = 0.674 * sd;
        s.half95[i] = 1.96 * sd;
    }
    const std::size_t window = std::max<std::size_t>(5, n / 20);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += s.abs_error[i];
        if (i >= window) acc -= s.abs_error[i - window];
        s.running_mean[i] = acc / static_cast<double>(std::min(i + 1, window));
    }
    if (!scores.empty()) s.constant_band = 1.96 * std::sqrt(scores[0].baseline_variance);
    return s;
}

void write_uncertainty_plot(const std::vector<ObservationScore>& scores,
                            const std::string& svg_path, const std::string& csv_path) {
    const PlotSeries s = uncertainty_error_series(scores);
    const std::size_t n = s.abs_error.size();
    if (n == 0) throw std::invalid_argument("uncertainty plot: no observations");

    std::ofstream csv(csv_path);
    csv << "rank,abs_error,half50,half95,running_mean,constant_band\n";
    for (std::size_t i = 0; i < n; ++i)
        csv << i << ',' << format_double(s.abs_error[i]) << ',' << format_double(s.half50[i])
            << ',' << format_double(s.half95[i]) << ',' << format_double(s.running_mean[i])
            << ',' << format_double(s.constant_band) << '\n';

    double ymax = s.constant_band;
    for (std::size_t i = 0; i < n; ++i)
        ymax = std::max({ymax, s.abs_error[i], s.half95[i]});
    svg::Canvas canvas(640, 420, 0.0, static_cast<double>(n - 1), 0.0, ymax * 1.05,
                       "Errors sorted by estimated uncertainty");
    std::vector<svg::Point> zero(n), h50(n), h95(n), err(n), rm(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xx = static_cast<double>(i);
        zero[i] = {xx, 0.0};
        h50[i] = {xx, s.half50[i]};
        h95[i] = {xx, s.half95[i]};
        err[i] = {xx, s.abs_error[i]};
        rm[i] = {xx, s.running_mean[i]};
    }
    canvas.band(zero, h95, "#5588cc", 0.25);
    canvas.band(zero, h50, "#5588cc", 0.45);
    canvas.dots(err, "#777777", 2.0);
    canvas.polyline(rm, "#555555", 1.5);
    canvas.hline(s.constant_band, "#222222", 1.2, true);
    canvas.axes("observations sorted by predicted std", "absolute error");
    canvas.save(svg_path);
}

void write_toy_fit_plot(const data::Dataset& toy_train,
                        const std::vector<ObservationScore>& query_scores,
                        const std::string& svg_path, const std::string& csv_path) {
    std::vector<ObservationScore> sorted = query_scores;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.x0 < b.x0; });

    std::ofstream csv(csv_path);
    csv << "x,mean,sd\n";
    for (const auto& s : sorted)
        csv << format_double(s.x0) << ',' << format_double(s.mean) << ','
            << format_double(std::sqrt(s.variance)) << '\n';

    double xmin = sorted.front().x0, xmax = sorted.back().x0;
    double ymin = 0.0, ymax = 0.0;
    for (const auto& s : sorted) {
        ymin = std::min(ymin, s.mean - 2.2 * std::sqrt(s.variance));
        ymax = std::max(ymax, s.mean + 2.2 * std::sqrt(s.variance));
    }
    for (std::size_t i = 0; i < toy_train.n(); ++i) {
        ymin = std::min(ymin, toy_train.y[i]);
        ymax = std::max(ymax, toy_train.y[i]);
    }
    svg::Canvas canvas(640, 420, xmin, xmax, ymin, ymax, "Toy fit with predictive bands");
    std::vector<svg::Point> mean, lo50, hi50, lo95, hi95;
    for (const auto& s : sorted) {
        const double sd = std::sqrt(s.variance);
        mean.push_back({s.x0, s.mean});
        lo50.push_back({s.x0, s.mean - 0.674 * sd});
        hi50.push_back({s.x0, s.mean + 0.674 * sd});
        lo95.push_back({s.x0, s.mean - 1.96 * sd});
        hi95.push_back({s.x0, s.mean + 1.96 * sd});
    }
    canvas.band(lo95, hi95, "#5588cc", 0.22);
    canvas.band(lo50, hi50, "#5588cc", 0.42);
    std::vector<svg::Point> dots;
    for (std::size_t i = 0; i < toy_train.n(); ++i)
        dots.push_back({toy_train.x(i, 0), toy_train.y[i]});
    canvas.dots(dots, "#444444", 1.8);
    canvas.polyline(mean, "#113355", 1.8);
    canvas.axes("x", "y");
    canvas.save(svg_path);
}

}  // namespace mcbn::experiment
