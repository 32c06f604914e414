// Batch-experiment harness: train / evaluate / sweep / verify / plot.
//
// Exit codes: 0 success, 2 dataset missing, 3 all gridpoints diverged,
// 4 network/architecture mismatch, 5 verification failures, 6 malformed
// score CSV, 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcbn/errors.hpp"
#include "mcbn/experiment.hpp"
#include "mcbn/kernels.hpp"
#include "mcbn/serialize.hpp"

namespace {

using mcbn::experiment::ExperimentConfig;
using nlohmann::json;

struct CliOptions {
    ExperimentConfig cfg;
    std::string config_path;
    std::string network_dir;
    std::string scores_csv;
    bool full_protocol = false;
    bool dump_samples = false;
};

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config file not found: " + path);
    json doc;
    in >> doc;
    if (doc.contains("dataset")) cfg.dataset = doc["dataset"].get<std::string>();
    if (doc.contains("data_dir")) cfg.data_dir = doc["data_dir"].get<std::string>();
    if (doc.contains("model"))
        cfg.model = mcbn::experiment::model_kind_from_string(doc["model"].get<std::string>());
    if (doc.contains("hidden")) cfg.hidden = doc["hidden"].get<std::vector<std::size_t>>();
    if (doc.contains("grid")) cfg.grid_preset = doc["grid"].get<std::string>();
    if (doc.contains("passes")) cfg.passes = doc["passes"].get<std::size_t>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("splits")) cfg.splits = doc["splits"].get<std::size_t>();
    if (doc.contains("eval_seeds")) cfg.eval_seeds = doc["eval_seeds"].get<std::size_t>();
    if (doc.contains("max_epochs")) cfg.max_epochs = doc["max_epochs"].get<std::size_t>();
    if (doc.contains("eval_every")) cfg.eval_every = doc["eval_every"].get<std::size_t>();
    if (doc.contains("workers")) cfg.workers = doc["workers"].get<std::size_t>();
    if (doc.contains("out")) cfg.out_dir = doc["out"].get<std::string>();
    if (doc.contains("per_observation_norm"))
        cfg.per_observation_norm = doc["per_observation_norm"].get<bool>();
    if (doc.contains("omega_source")) cfg.omega_source = doc["omega_source"].get<std::string>();
    if (doc.contains("toy_n")) cfg.toy_n = doc["toy_n"].get<std::size_t>();
    if (doc.contains("sweep_axis")) cfg.sweep_axis = doc["sweep_axis"].get<std::string>();
    if (doc.contains("sweep_lambda")) cfg.sweep_lambda = doc["sweep_lambda"].get<double>();
}

std::string resolve_out_dir(const std::string& out_dir) {
    if (const char* root = std::getenv("MCBN_OUT_ROOT")) {
        const std::filesystem::path p(out_dir);
        if (p.is_relative()) return (std::filesystem::path(root) / p).string();
    }
    return out_dir;
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

int cmd_train(const CliOptions& opts) {
    const auto ds = mcbn::experiment::resolve_dataset(opts.cfg);
    mcbn::data::SplitPlan plan;
    plan.split_seeds = {opts.cfg.seed};
    plan.fold_count = opts.cfg.folds;
    const auto splits = mcbn::data::make_splits(ds, plan);
    const auto artifacts = mcbn::experiment::train_split(opts.cfg, ds, splits[0]);
    const std::string out = resolve_out_dir(opts.cfg.out_dir);
    mcbn::experiment::write_split_artifacts(opts.cfg, artifacts, out);
    std::cout << "train: wrote network.json, hyperparams.json, cv_history.csv, "
                 "train_history.csv to "
              << out << "\n"
              << "selected lambda=" << artifacts.selection.best.lambda
              << " batch_size=" << artifacts.selection.best.batch_size
              << " epoch=" << artifacts.selection.best_epoch << " tau=" << artifacts.tau.tau
              << "\n";
    return 0;
}

int cmd_evaluate(const CliOptions& opts) {
    const auto ds = mcbn::experiment::resolve_dataset(opts.cfg);
    const std::string out = resolve_out_dir(opts.cfg.out_dir);
    ensure_dir(out);
    if (opts.full_protocol) {
        std::vector<mcbn::experiment::ObservationScore> first_obs;
        const auto report = mcbn::experiment::run_full_protocol(opts.cfg, ds, &first_obs);
        mcbn::experiment::write_metric_report(opts.cfg, report, out + "/metric_report.json");
        mcbn::experiment::write_scores_csv(first_obs, out + "/scores.csv");
        std::cout << "evaluate: mean CRPS_bar=" << report.mean_crps_bar
                  << " (p=" << report.crps_test.p_one_sided
                  << "), mean PLL_bar=" << report.mean_pll_bar
                  << " (p=" << report.pll_test.p_one_sided << ") over " << report.runs.size()
                  << " runs\n";
        return 0;
    }
    const std::string net_dir = opts.network_dir.empty() ? out : opts.network_dir;
    const auto artifacts = mcbn::experiment::load_split_artifacts(opts.cfg, ds, net_dir);
    std::vector<mcbn::experiment::RunScores> runs;
    std::vector<mcbn::experiment::ObservationScore> per_obs;
    std::vector<mcbn::PredictiveDistribution> first_preds;
    for (std::size_t j = 0; j < opts.cfg.eval_seeds; ++j) {
        std::vector<mcbn::experiment::ObservationScore> obs;
        std::vector<mcbn::PredictiveDistribution> preds;
        runs.push_back(mcbn::experiment::evaluate_run(
            opts.cfg, ds, artifacts, opts.cfg.seed + 900001ULL * (j + 1),
            j == 0 ? &obs : nullptr, j == 0 && opts.dump_samples ? &preds : nullptr));
        if (j == 0) {
            per_obs = std::move(obs);
            first_preds = std::move(preds);
        }
    }
    const auto report = mcbn::experiment::summarize_runs(runs);
    mcbn::experiment::write_metric_report(opts.cfg, report, out + "/metric_report.json");
    mcbn::experiment::write_scores_csv(per_obs, out + "/scores.csv");
    if (opts.dump_samples)
        mcbn::experiment::write_samples_csv(first_preds, out + "/samples.csv");
    std::cout << "evaluate: mean CRPS_bar=" << report.mean_crps_bar
              << ", mean PLL_bar=" << report.mean_pll_bar << " over " << runs.size()
              << " runs; wrote metric_report.json, scores.csv to " << out << "\n";
    return 0;
}

int cmd_sweep(const CliOptions& opts) {
    const auto ds = mcbn::experiment::resolve_dataset(opts.cfg);
    const auto rows = mcbn::experiment::run_sweep(opts.cfg, ds);
    const std::string out = resolve_out_dir(opts.cfg.out_dir);
    ensure_dir(out);
    mcbn::experiment::write_sweep_csv(rows, opts.cfg.sweep_axis, out + "/sweep.csv");
    std::cout << "sweep: wrote " << rows.size() << " rows to " << out << "/sweep.csv\n";
    return 0;
}

int cmd_verify(const CliOptions& opts) {
    const auto report = mcbn::experiment::run_verify(opts.cfg);
    const std::string out = resolve_out_dir(opts.cfg.out_dir);
    mcbn::experiment::write_verify_outputs(report, out);
    std::cout << "verify: mu_B parametric " << report.mu_parametric_pass_rate
              << ", sigma_B shape " << report.sigma_shape_pass_rate << ", sigma_B spread "
              << report.sigma_spread_pass_rate << ", sigma_B parametric (diagnostic) "
              << report.sigma_parametric_pass_rate << "\n"
              << "verify: KL max |closed - quadrature| = " << report.kl_max_abs_diff
              << ", KL(q,q) = " << report.kl_self << "\n"
              << "verify: prior sigma_sigma_p = " << report.prior_sigma_sigma_p << "\n";
    if (!report.failures.empty()) {
        for (const auto& f : report.failures) std::cerr << "verify FAILED: " << f << "\n";
        return 5;
    }
    std::cout << "verify: all properties hold\n";
    return 0;
}

int cmd_plot(const CliOptions& opts) {
    const std::string out = resolve_out_dir(opts.cfg.out_dir);
    ensure_dir(out);
    std::vector<mcbn::experiment::ObservationScore> scores;
    try {
        scores = mcbn::experiment::read_scores_csv(opts.scores_csv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "plot: " << e.what() << "\n";
        return 6;
    }
    mcbn::experiment::write_uncertainty_plot(scores, out + "/uncertainty_error.svg",
                                             out + "/uncertainty_error.csv");
    // Toy runs get the fit plot with predictive bands as well.
    const bool toy_fit = opts.cfg.dataset == "toy";
    if (toy_fit) {
        const auto toy = mcbn::experiment::resolve_dataset(opts.cfg);
        mcbn::experiment::write_toy_fit_plot(toy, scores, out + "/toy_fit.svg",
                                             out + "/toy_fit.csv");
    }
    std::cout << "plot: wrote uncertainty_error.svg/.csv"
              << (toy_fit ? " and toy_fit.svg/.csv" : "") << " to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo batch-normalization uncertainty harness"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    CliOptions opts;
    std::string model = "mcbn";
    std::string backend;

    app.add_option("--config", opts.config_path, "JSON config file (flags override it)");
    app.add_option("--dataset", opts.cfg.dataset, "registry name, 'toy', or a CSV path");
    app.add_option("--data-dir", opts.cfg.data_dir, "directory with dataset CSVs");
    app.add_option("--model", model, "mcbn | mcdo | cubn | cudo");
    app.add_option("--grid", opts.cfg.grid_preset, "desk | full");
    app.add_option("--passes", opts.cfg.passes, "stochastic forward passes T");
    app.add_option("--seed", opts.cfg.seed, "master seed");
    app.add_option("--splits", opts.cfg.splits, "number of 80/20 splits (full protocol)");
    app.add_option("--eval-seeds", opts.cfg.eval_seeds, "evaluation seeds per split");
    app.add_option("--max-epochs", opts.cfg.max_epochs, "training epoch cap");
    app.add_option("--eval-every", opts.cfg.eval_every, "validation interval in epochs");
    app.add_option("--hidden", opts.cfg.hidden, "hidden layer widths");
    app.add_option("--workers", opts.cfg.workers, "parallel CV jobs");
    app.add_option("--out", opts.cfg.out_dir, "output directory (MCBN_OUT_ROOT prefixes)");
    app.add_option("--toy-n", opts.cfg.toy_n, "toy dataset size");
    app.add_option("--batch-size", opts.cfg.sweep_batch, "fixed batch size (sweep passes axis)");
    app.add_option("--sweep-lambda", opts.cfg.sweep_lambda, "fixed weight decay for sweeps");
    app.add_option("--omega-source", opts.cfg.omega_source,
                   "batches | model (experimental q(omega) sampling)");
    app.add_flag("--per-observation-norm", opts.cfg.per_observation_norm,
                 "normalize metrics per observation instead of on dataset means");
    app.add_option("--kernel-backend", backend, "scalar | avx2 (default: runtime detect)");

    auto* train = app.add_subcommand("train", "grid-search CV on one split and save the model");
    auto* evaluate = app.add_subcommand("evaluate", "score a trained model or run the full protocol");
    evaluate->add_option("--network", opts.network_dir, "directory with network.json + hyperparams.json");
    evaluate->add_flag("--protocol-full", opts.full_protocol, "run the 5x5 split/seed protocol");
    evaluate->add_flag("--dump-samples", opts.dump_samples,
                       "also write samples.csv with every stochastic pass (first eval seed)");
    auto* sweep = app.add_subcommand("sweep", "sensitivity table over batch size or passes");
    sweep->add_option("--axis", opts.cfg.sweep_axis, "batch_size | passes");
    auto* verify = app.add_subcommand("verify", "executable checks of the appendix mathematics");
    auto* plot = app.add_subcommand("plot", "uncertainty-error and toy fit plots from scores.csv");
    plot->add_option("scores", opts.scores_csv, "scores.csv from evaluate")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!opts.config_path.empty()) {
            ExperimentConfig from_file = opts.cfg;
            apply_config_file(from_file, opts.config_path);
            // Flags win: reapply any explicitly passed options.
            ExperimentConfig merged = from_file;
            const ExperimentConfig& flags = opts.cfg;
            if (app.count("--dataset")) merged.dataset = flags.dataset;
            if (app.count("--data-dir")) merged.data_dir = flags.data_dir;
            if (app.count("--grid")) merged.grid_preset = flags.grid_preset;
            if (app.count("--passes")) merged.passes = flags.passes;
            if (app.count("--seed")) merged.seed = flags.seed;
            if (app.count("--splits")) merged.splits = flags.splits;
            if (app.count("--eval-seeds")) merged.eval_seeds = flags.eval_seeds;
            if (app.count("--max-epochs")) merged.max_epochs = flags.max_epochs;
            if (app.count("--eval-every")) merged.eval_every = flags.eval_every;
            if (app.count("--hidden")) merged.hidden = flags.hidden;
            if (app.count("--workers")) merged.workers = flags.workers;
            if (app.count("--out")) merged.out_dir = flags.out_dir;
            if (app.count("--toy-n")) merged.toy_n = flags.toy_n;
            if (app.count("--sweep-lambda")) merged.sweep_lambda = flags.sweep_lambda;
            if (app.count("--omega-source")) merged.omega_source = flags.omega_source;
            if (app.count("--per-observation-norm"))
                merged.per_observation_norm = flags.per_observation_norm;
            opts.cfg = merged;
        }
        if (app.count("--model")) opts.cfg.model = mcbn::experiment::model_kind_from_string(model);
        // Protein uses the wider architecture unless overridden.
        if (!app.count("--hidden") && opts.cfg.dataset == "protein")
            opts.cfg.hidden = {100, 100};
        if (!backend.empty())
            mcbn::kernels::force_backend(backend == "avx2" ? mcbn::kernels::Backend::Avx2
                                                           : mcbn::kernels::Backend::Scalar);

        if (*train) return cmd_train(opts);
        if (*evaluate) return cmd_evaluate(opts);
        if (*sweep) return cmd_sweep(opts);
        if (*verify) return cmd_verify(opts);
        if (*plot) return cmd_plot(opts);
    } catch (const mcbn::experiment::DatasetMissingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mcbn::TrainingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mcbn::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
