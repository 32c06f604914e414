#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcbn/analysis.hpp"
#include "mcbn/data.hpp"
#include "mcbn/inference.hpp"
#include "mcbn/metrics.hpp"
#include "mcbn/network.hpp"
#include "mcbn/training.hpp"

namespace mcbn::experiment {

enum class ModelKind { Mcbn, Mcdo, Cubn, Cudo };

ModelKind model_kind_from_string(const std::string& s);
std::string model_kind_name(ModelKind kind);

struct ExperimentConfig {
    std::string dataset = "toy";       // registry name, "toy", or a csv path
    std::string data_dir = "data";
    std::string registry_path = "data/registry.json";
    ModelKind model = ModelKind::Mcbn;
    std::vector<std::size_t> hidden = {50, 50};
    std::string grid_preset = "desk";  // desk | full
    std::size_t passes = 500;          // T
    std::uint64_t seed = 1;
    std::size_t splits = 5;
    std::size_t eval_seeds = 5;
    std::size_t folds = 5;
    std::size_t max_epochs = 2000;
    std::size_t eval_every = 20;
    double learning_rate = 1e-3;
    std::size_t workers = 2;
    std::string out_dir = "out";
    bool per_observation_norm = false;
    std::string omega_source = "batches";  // batches | model (experimental)
    std::size_t toy_n = 512;
    // Sweep settings
    std::string sweep_axis = "batch_size";  // batch_size | passes
    double sweep_lambda = 1e-4;
    std::optional<std::size_t> sweep_batch = 32;
};

// Thrown when a named dataset cannot be located (CLI exit code 2).
class DatasetMissingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Resolves cfg.dataset: the builtin toy generator, a registry name checked
// against its expected N/Q, or a plain CSV path (last column = target).
data::Dataset resolve_dataset(const ExperimentConfig& cfg);

std::vector<training::GridPoint> build_grid(const ExperimentConfig& cfg,
                                            std::size_t cv_size);

// Everything produced by training one split: CV selection, tau, the CU
// constant variance (original target scale), the trained network, and the
// normalization statistics of the split's CV data.
struct SplitArtifacts {
    data::Split split;
    training::CvSelection selection;
    training::TauEstimate tau;
    inference::ConstantVariance cu;
    data::NormStats norm;
    Network net;
    std::vector<training::EvalPoint> final_history;
    // Batch-draw pool for stochastic inference; split.train_idx when empty
    // (the sweep path trains on a fold subset and pools only those rows).
    std::vector<std::size_t> pool_idx;
};

SplitArtifacts train_split(const ExperimentConfig& cfg, const data::Dataset& ds,
                           const data::Split& split);

// Per-observation scoring detail for one evaluation run (scores.csv rows).
struct ObservationScore {
    std::size_t query_id = 0;
    double x0 = 0.0;  // first feature, original scale (used by toy plots)
    double mean = 0.0;
    double variance = 0.0;
    double target = 0.0;
    double crps = 0.0, pll = 0.0;
    double baseline_crps = 0.0, baseline_pll = 0.0;
    double baseline_variance = 0.0;
    double bound_crps = 0.0, bound_pll = 0.0;
    double v_crps = 0.0, v_pll = 0.0;
    bool degenerate = false;
};

struct RunScores {
    std::uint64_t split_seed = 0;
    std::uint64_t eval_seed = 0;
    double crps_bar = 0.0, pll_bar = 0.0;
    double mean_crps = 0.0, mean_pll = 0.0, rmse = 0.0;
    double baseline_mean_crps = 0.0, baseline_mean_pll = 0.0;
    double bound_mean_crps = 0.0, bound_mean_pll = 0.0;
    std::size_t degenerate_count = 0;
};

RunScores evaluate_run(const ExperimentConfig& cfg, const data::Dataset& ds,
                       const SplitArtifacts& artifacts, std::uint64_t eval_seed,
                       std::vector<ObservationScore>* per_obs = nullptr,
                       std::vector<PredictiveDistribution>* predictions = nullptr);

// Long-format dump of every stochastic sample: query_id, pass, value.
void write_samples_csv(const std::vector<PredictiveDistribution>& preds,
                       const std::string& path);

struct ProtocolReport {
    std::vector<RunScores> runs;  // splits x eval seeds
    double mean_crps_bar = 0.0, mean_pll_bar = 0.0;
    double se_crps_bar = 0.0, se_pll_bar = 0.0;
    metrics::TTestResult crps_test{0.0, 1.0, 0};
    metrics::TTestResult pll_test{0.0, 1.0, 0};
    double mean_rmse = 0.0;
};

ProtocolReport summarize_runs(const std::vector<RunScores>& runs);

// The full protocol: `splits` random 80/20 splits, grid-search CV + tau per
// split, `eval_seeds` stochastic evaluations per split. When `first_run_obs`
// is given it receives the per-observation scores of the first run (for
// scores.csv and plotting).
ProtocolReport run_full_protocol(const ExperimentConfig& cfg, const data::Dataset& ds,
                                 std::vector<ObservationScore>* first_run_obs = nullptr);

// One fixed-hyperparameter train + evaluate pass (sweep machinery):
// trains at (lambda, batch_size or dropout) on the split's CV data with no
// grid search and scores against its own CU baseline.
RunScores sweep_single(const ExperimentConfig& cfg, const data::Dataset& ds,
                       const data::Split& split, const training::GridPoint& gp,
                       std::size_t passes, std::uint64_t seed);

struct SweepRow {
    double axis_value = 0.0;
    bool skipped = false;
    std::string note;
    double mean_crps_bar = 0.0, mean_pll_bar = 0.0;
    std::size_t runs = 0;
};

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const data::Dataset& ds);

// Deterministic shortest round-trip decimal formatting for report files.
std::string format_double(double v);

// --- file emission -------------------------------------------------------

void write_split_artifacts(const ExperimentConfig& cfg, const SplitArtifacts& artifacts,
                           const std::string& dir);
SplitArtifacts load_split_artifacts(const ExperimentConfig& cfg, const data::Dataset& ds,
                                    const std::string& dir);

void write_scores_csv(const std::vector<ObservationScore>& scores, const std::string& path);
std::vector<ObservationScore> read_scores_csv(const std::string& path);

void write_metric_report(const ExperimentConfig& cfg, const ProtocolReport& report,
                         const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis,
                     const std::string& path);

// --- verification (appendix mathematics) ----------------------------------

struct VerifyReport {
    double mu_parametric_pass_rate = 0.0;   // first-layer units, KS vs N(mu, sd^2/M)
    double sigma_shape_pass_rate = 0.0;     // standardized sigma_B vs N(0,1)
    double sigma_spread_pass_rate = 0.0;    // empirical/predicted SD within 15%
    double sigma_parametric_pass_rate = 0.0;  // diagnostic only (centered CLT)
    double kl_max_abs_diff = 0.0;           // closed form vs quadrature
    double kl_self = 0.0;                   // KL(q, q)
    double prior_sigma_sigma_p = 0.0;       // 1/(2 N tau lambda)
    bool mu_ok = false, sigma_shape_ok = false, sigma_spread_ok = false, kl_ok = false,
         prior_ok = false;
    std::vector<std::string> failures;
    std::vector<analysis::UnitKsRow> ks_rows;
};

VerifyReport run_verify(const ExperimentConfig& cfg);
void write_verify_outputs(const VerifyReport& report, const std::string& dir);

// --- plotting --------------------------------------------------------------

struct PlotSeries {
    // Observations sorted by predicted SD ascending.
    std::vector<double> abs_error;
    std::vector<double> half50;       // 0.674 sd
    std::vector<double> half95;       // 1.96 sd
    std::vector<double> running_mean; // window max(5, n/20)
    double constant_band = 0.0;       // 1.96 sqrt(baseline v) when constant
};

PlotSeries uncertainty_error_series(const std::vector<ObservationScore>& scores);
void write_uncertainty_plot(const std::vector<ObservationScore>& scores,
                            const std::string& svg_path, const std::string& csv_path);
// Toy fit plot: data dots, predictive mean line, 50/95% bands over a grid.
void write_toy_fit_plot(const data::Dataset& toy_train,
                        const std::vector<ObservationScore>& query_scores,
                        const std::string& svg_path, const std::string& csv_path);

}  // namespace mcbn::experiment
