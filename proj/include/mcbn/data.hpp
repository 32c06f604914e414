#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcbn/matrix.hpp"
#include "mcbn/prediction.hpp"

namespace mcbn::data {

struct ColumnSchema {
    std::vector<std::string> feature_columns;
    std::string target_column;
};

struct Dataset {
    std::string name;
    Matrix x;               // N x Q
    std::vector<double> y;  // N

    std::size_t n() const { return x.rows(); }
    std::size_t q() const { return x.cols(); }
};

// Comma-separated, header row, UTF-8. Rows with unparseable fields are
// rejected with a row-indexed error message.
Dataset load_csv(const std::string& path, const ColumnSchema& schema, std::string name = "");

struct NormStats {
    std::vector<double> x_mean;
    std::vector<double> x_std;  // 1.0 for constant features
    double y_mean = 0.0;
    double y_std = 1.0;
    std::vector<std::size_t> constant_features;  // flagged, left centered
};

NormStats compute_norm_stats(const Dataset& ds, std::span<const std::size_t> stats_from);

// Z-score every row of `ds` with `stats`.
Dataset apply_normalization(const Dataset& ds, const NormStats& stats);

// Z-score with statistics taken from the given training indices only.
Dataset normalize(const Dataset& ds, std::span<const std::size_t> stats_from,
                  NormStats* out_stats = nullptr);

Dataset denormalize(const Dataset& ds, const NormStats& stats);

// mean' = mean*std + m, variance' = variance*std^2, samples elementwise,
// tau' = tau/std^2 (noise precision transforms with variance).
PredictiveDistribution denormalize_prediction(const PredictiveDistribution& pd,
                                              const NormStats& stats);

struct SplitPlan {
    std::vector<std::uint64_t> split_seeds = {1, 2, 3, 4, 5};
    double test_fraction = 0.2;
    std::size_t fold_count = 5;
    std::size_t eval_seeds_per_split = 5;
};

struct Split {
    std::uint64_t seed = 0;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    std::vector<std::vector<std::size_t>> folds;  // partition of train_idx
};

// Deterministic given the plan's seeds: seeded uniform permutation, 20% test
// (rounded down), folds of near-equal size partitioning the CV data.
std::vector<Split> make_splits(const Dataset& ds, const SplitPlan& plan);

struct RegistryEntry {
    std::string name;
    std::string file;
    std::size_t n = 0;
    std::size_t q = 0;
    ColumnSchema schema;
    std::string source;  // download instructions
};

std::vector<RegistryEntry> load_registry(const std::string& path);
std::optional<RegistryEntry> registry_find(const std::vector<RegistryEntry>& reg,
                                           const std::string& name);

// Loads a registered dataset from `data_dir` and checks the registered N/Q.
Dataset load_registered(const RegistryEntry& entry, const std::string& data_dir);

// 1-D heteroscedastic toy problem: x uniform on [-4, 4],
// y = x sin(x) + eps with eps ~ N(0, (0.15 + 0.15|x|)^2).
Dataset make_toy_dataset(std::size_t n, std::uint64_t seed);
double toy_true_mean(double x);
// Evenly spaced query grid over [lo, hi] as an n-by-1 matrix.
Matrix toy_query_grid(std::size_t n, double lo, double hi);

}  // namespace mcbn::data
