#include "mcbn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mcbn/errors.hpp"
#include "mcbn/rng.hpp"

namespace mcbn::data {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // Trim surrounding whitespace and CR.
        const auto begin = field.find_first_not_of(" \t\r");
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_number(const std::string& s, std::size_t row, const std::string& column) {
    double value = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("load_csv: non-numeric cell '" + s + "' in column '" +
                                    column + "' at data row " + std::to_string(row));
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const ColumnSchema& schema, std::string name) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: missing file " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("load_csv: empty file " + path);
    const auto header = split_csv_line(line);

    auto column_of = [&](const std::string& col) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), col);
        if (it == header.end())
            throw std::invalid_argument("load_csv: column '" + col + "' not found in " + path);
        return static_cast<std::size_t>(it - header.begin());
    };

    std::vector<std::size_t> feature_pos;
    feature_pos.reserve(schema.feature_columns.size());
    for (const auto& col : schema.feature_columns) feature_pos.push_back(column_of(col));
    const std::size_t target_pos = column_of(schema.target_column);

    std::vector<double> xdata;
    std::vector<double> y;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::invalid_argument("load_csv: row " + std::to_string(row) + " has " +
                                        std::to_string(fields.size()) + " fields, header has " +
                                        std::to_string(header.size()));
        for (std::size_t j = 0; j < feature_pos.size(); ++j)
            xdata.push_back(parse_number(fields[feature_pos[j]], row, schema.feature_columns[j]));
        y.push_back(parse_number(fields[target_pos], row, schema.target_column));
    }
    Dataset ds;
    ds.name = name.empty() ? path : std::move(name);
    ds.x = Matrix(y.size(), feature_pos.size(), std::move(xdata));
    ds.y = std::move(y);
    return ds;
}

NormStats compute_norm_stats(const Dataset& ds, std::span<const std::size_t> stats_from) {
    if (stats_from.empty()) throw std::domain_error("compute_norm_stats: empty index set");
    const std::size_t q = ds.q();
    NormStats st;
    st.x_mean.assign(q, 0.0);
    st.x_std.assign(q, 0.0);
    const double inv_n = 1.0 / static_cast<double>(stats_from.size());
    for (std::size_t i : stats_from)
        for (std::size_t j = 0; j < q; ++j) st.x_mean[j] += ds.x(i, j);
    for (double& m : st.x_mean) m *= inv_n;
    for (std::size_t i : stats_from)
        for (std::size_t j = 0; j < q; ++j) {
            const double d = ds.x(i, j) - st.x_mean[j];
            st.x_std[j] += d * d;
        }
    for (std::size_t j = 0; j < q; ++j) {
        st.x_std[j] = std::sqrt(st.x_std[j] * inv_n);
        if (st.x_std[j] == 0.0) {
            st.x_std[j] = 1.0;  // constant feature: centered, unit divisor
            st.constant_features.push_back(j);
        }
    }
    double ym = 0.0;
    for (std::size_t i : stats_from) ym += ds.y[i];
    ym *= inv_n;
    double yv = 0.0;
    for (std::size_t i : stats_from) {
        const double d = ds.y[i] - ym;
        yv += d * d;
    }
    st.y_mean = ym;
    st.y_std = std::sqrt(yv * inv_n);
    if (st.y_std == 0.0) st.y_std = 1.0;
    return st;
}

Dataset apply_normalization(const Dataset& ds, const NormStats& stats) {
    if (stats.x_mean.size() != ds.q())
        throw DimensionError("apply_normalization: stats width mismatch");
    Dataset out;
    out.name = ds.name;
    out.x = Matrix(ds.n(), ds.q());
    out.y.resize(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.q(); ++j)
            out.x(i, j) = (ds.x(i, j) - stats.x_mean[j]) / stats.x_std[j];
        out.y[i] = (ds.y[i] - stats.y_mean) / stats.y_std;
    }
    return out;
}

Dataset normalize(const Dataset& ds, std::span<const std::size_t> stats_from,
                  NormStats* out_stats) {
    const NormStats st = compute_norm_stats(ds, stats_from);
    if (out_stats) *out_stats = st;
    return apply_normalization(ds, st);
}

Dataset denormalize(const Dataset& ds, const NormStats& stats) {
    Dataset out;
    out.name = ds.name;
    out.x = Matrix(ds.n(), ds.q());
    out.y.resize(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.q(); ++j)
            out.x(i, j) = ds.x(i, j) * stats.x_std[j] + stats.x_mean[j];
        out.y[i] = ds.y[i] * stats.y_std + stats.y_mean;
    }
    return out;
}

PredictiveDistribution denormalize_prediction(const PredictiveDistribution& pd,
                                              const NormStats& stats) {
    PredictiveDistribution out;
    const double s = stats.y_std;
    out.mean = pd.mean * s + stats.y_mean;
    out.variance = pd.variance * s * s;
    out.tau = pd.tau / (s * s);
    out.samples.resize(pd.samples.size());
    for (std::size_t i = 0; i < pd.samples.size(); ++i)
        out.samples[i] = pd.samples[i] * s + stats.y_mean;
    return out;
}

std::vector<Split> make_splits(const Dataset& ds, const SplitPlan& plan) {
    const std::size_t n = ds.n();
    if (n < 25) throw std::domain_error("make_splits: dataset too small (needs N >= 25)");
    std::vector<Split> splits;
    splits.reserve(plan.split_seeds.size());
    for (const std::uint64_t seed : plan.split_seeds) {
        RngStream rng(seed, 0);
        const auto perm = rng.permutation(n);
        const std::size_t n_test = static_cast<std::size_t>(
            std::floor(plan.test_fraction * static_cast<double>(n)));
        Split split;
        split.seed = seed;
        split.test_idx.assign(perm.begin(), perm.begin() + n_test);
        split.train_idx.assign(perm.begin() + n_test, perm.end());
        const std::size_t n_cv = split.train_idx.size();
        split.folds.resize(plan.fold_count);
        // Near-equal contiguous chunks of the shuffled CV indices.
        std::size_t start = 0;
        for (std::size_t f = 0; f < plan.fold_count; ++f) {
            const std::size_t count = n_cv / plan.fold_count + (f < n_cv % plan.fold_count ? 1 : 0);
            split.folds[f].assign(split.train_idx.begin() + start,
                                  split.train_idx.begin() + start + count);
            start += count;
        }
        splits.push_back(std::move(split));
    }
    return splits;
}

std::vector<RegistryEntry> load_registry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_registry: missing file " + path);
    nlohmann::json doc;
    in >> doc;
    std::vector<RegistryEntry> entries;
    for (const auto& e : doc.at("datasets")) {
        RegistryEntry entry;
        entry.name = e.at("name").get<std::string>();
        entry.file = e.at("file").get<std::string>();
        entry.n = e.at("n").get<std::size_t>();
        entry.q = e.at("q").get<std::size_t>();
        entry.schema.feature_columns = e.at("features").get<std::vector<std::string>>();
        entry.schema.target_column = e.at("target").get<std::string>();
        entry.source = e.value("source", "");
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::optional<RegistryEntry> registry_find(const std::vector<RegistryEntry>& reg,
                                           const std::string& name) {
    for (const auto& e : reg)
        if (e.name == name) return e;
    return std::nullopt;
}

Dataset load_registered(const RegistryEntry& entry, const std::string& data_dir) {
    const std::string path = data_dir.empty() ? entry.file : data_dir + "/" + entry.file;
    Dataset ds = load_csv(path, entry.schema, entry.name);
    if (ds.n() != entry.n || ds.q() != entry.q)
        throw std::invalid_argument("load_registered: " + entry.name + " has N=" +
                                    std::to_string(ds.n()) + ", Q=" + std::to_string(ds.q()) +
                                    "; registry expects N=" + std::to_string(entry.n) +
                                    ", Q=" + std::to_string(entry.q));
    return ds;
}

double toy_true_mean(double x) { return x * std::sin(x); }

Dataset make_toy_dataset(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed, 7001);
    Dataset ds;
    ds.name = "toy";
    ds.x = Matrix(n, 1);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -4.0 + 8.0 * rng.next_double();
        const double noise_sd = 0.15 + 0.15 * std::fabs(x);
        ds.x(i, 0) = x;
        ds.y[i] = toy_true_mean(x) + noise_sd * rng.next_gaussian();
    }
    return ds;
}

Matrix toy_query_grid(std::size_t n, double lo, double hi) {
    Matrix grid(n, 1);
    for (std::size_t i = 0; i < n; ++i)
        grid(i, 0) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

}  // namespace mcbn::data
