#include "mcbn/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcbn/errors.hpp"
#include "mcbn/kernels.hpp"
#include "mcbn/kstest.hpp"

namespace mcbn::analysis {

std::vector<std::vector<UnitMomentSummary>> unit_population_moments(const Network& net,
                                                                    const Matrix& data) {
    if (data.rows() < 2) throw std::domain_error("unit_population_moments: needs >= 2 rows");
    // One stats pass fixes the per-layer normalization, then pre-activations
    // are replayed to accumulate fourth moments.
    Network scratch = net;
    compute_population_stats(scratch, data);

    std::vector<std::vector<UnitMomentSummary>> out;
    Matrix h = data;
    const auto& k = kernels::active();
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    for (const auto& layer : scratch.layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            Matrix next;
            gemm_nt(h, d->W, next);
            for (std::size_t r = 0; r < next.rows(); ++r)
                k.add(d->b.data(), next.data() + r * next.cols(), next.cols());
            h = std::move(next);
        } else if (const auto* bn = std::get_if<BNLayer>(&layer)) {
            const std::size_t units = bn->gamma.size();
            std::vector<UnitMomentSummary> summaries(units);
            for (std::size_t j = 0; j < units; ++j) {
                summaries[j].mean = bn->pop_mean[j];
                summaries[j].sd = std::sqrt(bn->pop_var[j]);
            }
            for (std::size_t r = 0; r < h.rows(); ++r)
                for (std::size_t j = 0; j < units; ++j) {
                    const double dev = h(r, j) - summaries[j].mean;
                    const double d2 = dev * dev;
                    summaries[j].fourth_central += d2 * d2;
                }
            for (auto& s : summaries) s.fourth_central *= inv_n;
            out.push_back(std::move(summaries));
            // Continue with population-normalized activations.
            std::vector<double> inv_sd(units);
            for (std::size_t j = 0; j < units; ++j)
                inv_sd[j] = 1.0 / std::sqrt(bn->pop_var[j] + bn->eps);
            Matrix norm(h.rows(), units);
            for (std::size_t r = 0; r < h.rows(); ++r)
                k.bn_apply(h.data() + r * units, bn->pop_mean.data(), inv_sd.data(),
                           bn->gamma.data(), bn->beta.data(), norm.data() + r * units, units);
            h = std::move(norm);
        } else if (std::get_if<DropoutLayer>(&layer)) {
            // Population moments are dropout-free.
        } else {
            const auto& act = std::get<ActivationLayer>(layer);
            if (act.kind == Activation::ReLU) {
                Matrix next(h.rows(), h.cols());
                k.relu(h.data(), next.data(), h.size());
                h = std::move(next);
            }
        }
    }
    return out;
}

PredictedDist predicted_mean_dist(const UnitMomentSummary& summary, std::size_t m) {
    if (m < 2) throw std::domain_error("predicted_mean_dist: M must be >= 2");
    PredictedDist out;
    out.dist.mean = summary.mean;
    out.dist.variance = summary.sd * summary.sd / static_cast<double>(m);
    out.degenerate = summary.sd == 0.0;
    return out;
}

Gaussian predicted_std_dist(const UnitMomentSummary& summary, std::size_t m) {
    if (m < 2) throw std::domain_error("predicted_std_dist: M must be >= 2");
    if (!(summary.sd > 0.0))
        throw std::domain_error("predicted_std_dist: zero population spread");
    const double s2 = summary.sd * summary.sd;
    const double s4 = s2 * s2;
    const double var = (summary.fourth_central - s4) / (4.0 * s2 * static_cast<double>(m));
    return {summary.sd, var};
}

BnStatSamples collect_bn_stat_samples(const Network& net, const Matrix& train_x, std::size_t m,
                                      std::size_t draws, RngStream& rng) {
    if (draws < 100) throw std::domain_error("collect_bn_stat_samples: needs >= 100 draws");
    if (m > train_x.rows())
        throw std::domain_error("collect_bn_stat_samples: M exceeds the dataset");
    const auto unit_counts = net.bn_unit_counts();
    BnStatSamples samples;
    samples.mu.resize(unit_counts.size());
    samples.sigma.resize(unit_counts.size());
    for (std::size_t l = 0; l < unit_counts.size(); ++l) {
        samples.mu[l].assign(unit_counts[l], std::vector<double>(draws));
        samples.sigma[l].assign(unit_counts[l], std::vector<double>(draws));
    }
    for (std::size_t d = 0; d < draws; ++d) {
        const auto idx = rng.sample_without_replacement(train_x.rows(), m);
        const Matrix batch = train_x.gather_rows(idx);
        const BatchStats stats = compute_batch_stats(net, batch);
        for (std::size_t l = 0; l < unit_counts.size(); ++l)
            for (std::size_t u = 0; u < unit_counts[l]; ++u) {
                samples.mu[l][u][d] = stats.mu[l][u];
                samples.sigma[l][u][d] = stats.sigma[l][u];
            }
    }
    return samples;
}

double kl_gaussian(const Gaussian& q, const Gaussian& p) {
    if (!(q.variance > 0.0) || !(p.variance > 0.0))
        throw std::domain_error("kl_gaussian: variances must be positive");
    const double dm = q.mean - p.mean;
    return 0.5 * std::log(p.variance / q.variance) +
           (q.variance + dm * dm) / (2.0 * p.variance) - 0.5;
}

double kl_factorized(std::span<const Gaussian> q_list, std::span<const Gaussian> p_list) {
    if (q_list.size() != p_list.size())
        throw DimensionError("kl_factorized: list length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < q_list.size(); ++i) acc += kl_gaussian(q_list[i], p_list[i]);
    return acc;
}

PriorParams prior_params(std::size_t n, double tau, double lambda) {
    if (n < 1) throw std::domain_error("prior_params: N must be >= 1");
    if (!(tau > 0.0)) throw std::domain_error("prior_params: tau must be positive");
    if (lambda < 0.0) throw std::domain_error("prior_params: lambda must be >= 0");
    PriorParams out;
    if (lambda == 0.0) {
        out.improper = true;
        out.sigma_sigma_p = std::numeric_limits<double>::infinity();
        return out;
    }
    out.sigma_sigma_p = 1.0 / (2.0 * static_cast<double>(n) * tau * lambda);
    return out;
}

namespace {

struct MomentPair {
    double mean;
    double sd;
};

MomentPair sample_moments(const std::vector<double>& v) {
    const auto& k = kernels::active();
    const double mean = k.sum(v.data(), v.size()) / static_cast<double>(v.size());
    const double var = k.sumsq_dev(v.data(), v.size(), mean) / static_cast<double>(v.size());
    return {mean, std::sqrt(var)};
}

}  // namespace

std::vector<UnitKsRow> bn_normality_report(const Network& net, const Matrix& train_x,
                                           std::size_t m, std::size_t draws, RngStream& rng) {
    const auto moments = unit_population_moments(net, train_x);
    const auto samples = collect_bn_stat_samples(net, train_x, m, draws, rng);
    std::vector<UnitKsRow> rows;
    for (std::size_t l = 0; l < moments.size(); ++l) {
        for (std::size_t u = 0; u < moments[l].size(); ++u) {
            UnitKsRow row;
            row.layer = l;
            row.unit = u;
            const auto& mu_samples = samples.mu[l][u];
            const auto& sd_samples = samples.sigma[l][u];

            const auto mean_pred = predicted_mean_dist(moments[l][u], m);
            const auto mu_param = ks_test(mu_samples, [&](double x) {
                return gauss_cdf(x, mean_pred.dist);
            });
            row.mu_d = mu_param.statistic;
            row.mu_p = mu_param.p_value;

            const Gaussian sd_pred = predicted_std_dist(moments[l][u], m);
            const auto sd_param = ks_test(sd_samples, [&](double x) {
                return gauss_cdf(x, sd_pred);
            });
            row.sigma_d = sd_param.statistic;
            row.sigma_p = sd_param.p_value;

            // Shape test: standardize empirically, compare against N(0,1).
            const Gaussian std_normal{0.0, 1.0};
            const auto mu_mom = sample_moments(mu_samples);
            std::vector<double> z(mu_samples.size());
            for (std::size_t i = 0; i < z.size(); ++i)
                z[i] = (mu_samples[i] - mu_mom.mean) / mu_mom.sd;
            const auto mu_shape =
                ks_test(z, [&](double x) { return gauss_cdf(x, std_normal); });
            row.mu_shape_d = mu_shape.statistic;
            row.mu_shape_p = mu_shape.p_value;

            const auto sd_mom = sample_moments(sd_samples);
            for (std::size_t i = 0; i < z.size(); ++i)
                z[i] = (sd_samples[i] - sd_mom.mean) / sd_mom.sd;
            const auto sd_shape =
                ks_test(z, [&](double x) { return gauss_cdf(x, std_normal); });
            row.sigma_shape_d = sd_shape.statistic;
            row.sigma_shape_p = sd_shape.p_value;

            row.sigma_sd_ratio = sd_mom.sd / std::sqrt(sd_pred.variance);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace mcbn::analysis
