#include "mcbn/network.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mcbn/errors.hpp"
#include "mcbn/kernels.hpp"

namespace mcbn {
namespace {

void column_mean(const Matrix& m, std::vector<double>& out) {
    const auto& k = kernels::active();
    out.assign(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) k.add(m.data() + r * m.cols(), out.data(), m.cols());
    k.scale(1.0 / static_cast<double>(m.rows()), out.data(), out.size());
}

void column_var_biased(const Matrix& m, const std::vector<double>& mean,
                       std::vector<double>& out) {
    const auto& k = kernels::active();
    out.assign(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r)
        k.accum_sq_dev(m.data() + r * m.cols(), mean.data(), out.data(), m.cols());
    k.scale(1.0 / static_cast<double>(m.rows()), out.data(), out.size());
}

Matrix dense_forward(const DenseLayer& d, const Matrix& x) {
    if (x.cols() != d.W.cols())
        throw DimensionError("dense layer: input width " + std::to_string(x.cols()) +
                             " does not match weight columns " + std::to_string(d.W.cols()));
    Matrix h;
    gemm_nt(x, d.W, h);
    const auto& k = kernels::active();
    for (std::size_t r = 0; r < h.rows(); ++r)
        k.add(d.b.data(), h.data() + r * h.cols(), h.cols());
    return h;
}

struct BnStatsView {
    const std::vector<double>* mu;
    std::vector<double> var;  // variance (sigma^2 or pop_var)
    bool batch_mode;
};

Matrix bn_forward(const BNLayer& bn, const Matrix& h, const std::vector<double>& mu,
                  const std::vector<double>& var, std::vector<double>& inv_sd, Matrix* xhat_out) {
    const std::size_t units = bn.gamma.size();
    if (h.cols() != units) throw DimensionError("bn layer: unit count mismatch");
    inv_sd.resize(units);
    for (std::size_t j = 0; j < units; ++j) {
        const double denom = var[j] + bn.eps;
        if (!(denom > 0.0))
            throw NumericError("bn layer: zero variance with zero epsilon");
        inv_sd[j] = 1.0 / std::sqrt(denom);
    }
    const auto& k = kernels::active();
    Matrix out(h.rows(), units);
    if (xhat_out) {
        *xhat_out = Matrix(h.rows(), units);
        std::vector<double> ones(units, 1.0), zeros(units, 0.0);
        for (std::size_t r = 0; r < h.rows(); ++r) {
            k.bn_apply(h.data() + r * units, mu.data(), inv_sd.data(), ones.data(), zeros.data(),
                       xhat_out->data() + r * units, units);
            k.bn_apply(h.data() + r * units, mu.data(), inv_sd.data(), bn.gamma.data(),
                       bn.beta.data(), out.data() + r * units, units);
        }
    } else {
        for (std::size_t r = 0; r < h.rows(); ++r)
            k.bn_apply(h.data() + r * units, mu.data(), inv_sd.data(), bn.gamma.data(),
                       bn.beta.data(), out.data() + r * units, units);
    }
    return out;
}

Matrix make_dropout_mask(std::size_t rows, std::size_t cols, double rate, RngStream& rng) {
    Matrix mask(rows, cols);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask.data()[i] = rng.next_double() < rate ? 0.0 : keep_scale;
    return mask;
}

struct ModeView {
    bool train = false;
    bool dropout_active = false;
    RngStream* rng = nullptr;
    const BatchStats* stats = nullptr;
};

ModeView view_of(const ForwardMode& mode, const Network& net) {
    ModeView v;
    if (const auto* t = std::get_if<TrainMode>(&mode)) {
        v.train = true;
        v.dropout_active = net.has_dropout();
        v.rng = t->rng;
        if (v.dropout_active && v.rng == nullptr)
            throw ContractError("train mode on a dropout network requires an rng");
    } else if (const auto* s = std::get_if<StochasticBNMode>(&mode)) {
        v.stats = s->stats;
        if (v.stats == nullptr || !net.stats_shape_matches(*v.stats))
            throw DimensionError("stochastic-bn mode: batch stats do not match the network");
    } else if (const auto* d = std::get_if<DropoutMode>(&mode)) {
        v.dropout_active = true;
        v.rng = d->rng;
        if (v.rng == nullptr) throw ContractError("dropout mode requires an rng");
    }
    return v;
}

template <bool WithCache>
Matrix run_forward(const Network& net, const Matrix& x, const ForwardMode& mode, Cache* cache) {
    if (x.cols() != net.input_width)
        throw DimensionError("forward: input has " + std::to_string(x.cols()) +
                             " features, network expects " + std::to_string(net.input_width));
    const ModeView mv = view_of(mode, net);
    if constexpr (WithCache) {
        cache->net = &net;
        cache->rows = x.rows();
        cache->records.clear();
        cache->records.reserve(net.layers.size());
    }
    const auto& k = kernels::active();
    Matrix h = x;
    std::size_t bn_idx = 0;
    for (const auto& layer : net.layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            if constexpr (WithCache) cache->records.push_back(Cache::DenseRec{h});
            h = dense_forward(*d, h);
        } else if (const auto* bn = std::get_if<BNLayer>(&layer)) {
            std::vector<double> mu, var;
            bool batch_mode = false;
            if (mv.train) {
                column_mean(h, mu);
                column_var_biased(h, mu, var);
                batch_mode = true;
            } else if (mv.stats) {
                mu = mv.stats->mu[bn_idx];
                const auto& sd = mv.stats->sigma[bn_idx];
                var.resize(sd.size());
                for (std::size_t j = 0; j < sd.size(); ++j) var[j] = sd[j] * sd[j];
            } else {
                mu = bn->pop_mean;
                var = bn->pop_var;
            }
            std::vector<double> inv_sd;
            if constexpr (WithCache) {
                Cache::BNRec rec;
                rec.input = h;
                Matrix xhat;
                Matrix out = bn_forward(*bn, h, mu, var, inv_sd, &xhat);
                rec.mu = std::move(mu);
                rec.var = std::move(var);
                rec.inv_sd = std::move(inv_sd);
                rec.xhat = std::move(xhat);
                rec.batch_mode = batch_mode;
                cache->records.push_back(std::move(rec));
                h = std::move(out);
            } else {
                h = bn_forward(*bn, h, mu, var, inv_sd, nullptr);
            }
            ++bn_idx;
        } else if (const auto* dr = std::get_if<DropoutLayer>(&layer)) {
            const bool active = mv.dropout_active && dr->rate > 0.0;
            Matrix mask;
            if (active) {
                mask = make_dropout_mask(h.rows(), h.cols(), dr->rate, *mv.rng);
                for (std::size_t r = 0; r < h.rows(); ++r)
                    k.mul(mask.data() + r * h.cols(), h.data() + r * h.cols(), h.cols());
            }
            if constexpr (WithCache)
                cache->records.push_back(Cache::DropRec{std::move(mask), active});
        } else {
            const auto& act = std::get<ActivationLayer>(layer);
            if constexpr (WithCache) cache->records.push_back(Cache::ActRec{h});
            if (act.kind == Activation::ReLU) {
                Matrix out(h.rows(), h.cols());
                k.relu(h.data(), out.data(), h.size());
                h = std::move(out);
            }
        }
    }
    return h;
}

}  // namespace

std::size_t Network::output_width() const {
    std::size_t w = input_width;
    for (const auto& layer : layers)
        if (const auto* d = std::get_if<DenseLayer>(&layer)) w = d->W.rows();
    return w;
}

std::size_t Network::bn_layer_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += std::holds_alternative<BNLayer>(layer);
    return n;
}

bool Network::has_dropout() const {
    for (const auto& layer : layers)
        if (const auto* d = std::get_if<DropoutLayer>(&layer); d && d->rate > 0.0) return true;
    return false;
}

bool Network::has_dropout_layers() const {
    for (const auto& layer : layers)
        if (std::holds_alternative<DropoutLayer>(layer)) return true;
    return false;
}

std::vector<std::size_t> Network::bn_unit_counts() const {
    std::vector<std::size_t> counts;
    for (const auto& layer : layers)
        if (const auto* bn = std::get_if<BNLayer>(&layer)) counts.push_back(bn->gamma.size());
    return counts;
}

bool Network::stats_shape_matches(const BatchStats& stats) const {
    const auto counts = bn_unit_counts();
    if (stats.mu.size() != counts.size() || stats.sigma.size() != counts.size()) return false;
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (stats.mu[i].size() != counts[i] || stats.sigma[i].size() != counts[i]) return false;
    return true;
}

void Network::validate() const {
    std::size_t width = input_width;
    for (const auto& layer : layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            if (d->W.cols() != width) throw DimensionError("network: dense input width mismatch");
            if (d->b.size() != d->W.rows()) throw DimensionError("network: bias length mismatch");
            width = d->W.rows();
        } else if (const auto* bn = std::get_if<BNLayer>(&layer)) {
            if (bn->gamma.size() != width || bn->beta.size() != width ||
                bn->pop_mean.size() != width || bn->pop_var.size() != width)
                throw DimensionError("network: bn vector length mismatch");
            if (!(bn->eps > 0.0) && bn->eps != 0.0)
                throw DimensionError("network: bn epsilon must be non-negative");
            for (double v : bn->pop_var)
                if (v < 0.0) throw DimensionError("network: negative population variance");
        } else if (const auto* dr = std::get_if<DropoutLayer>(&layer)) {
            if (dr->rate < 0.0 || dr->rate >= 1.0)
                throw DimensionError("network: dropout rate outside [0,1)");
        }
    }
}

Matrix forward(const Network& net, const Matrix& x, const ForwardMode& mode) {
    return run_forward<false>(net, x, mode, nullptr);
}

std::pair<Matrix, Cache> forward_cached(const Network& net, const Matrix& x,
                                        const ForwardMode& mode) {
    Cache cache;
    Matrix y = run_forward<true>(net, x, mode, &cache);
    return {std::move(y), std::move(cache)};
}

BatchStats compute_batch_stats(const Network& net, const Matrix& batch) {
    if (batch.rows() < 2) throw std::domain_error("compute_batch_stats: needs at least 2 rows");
    if (batch.cols() != net.input_width)
        throw DimensionError("compute_batch_stats: feature count mismatch");
    BatchStats stats;
    Matrix h = batch;
    const auto& k = kernels::active();
    std::vector<double> inv_sd;
    for (const auto& layer : net.layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            h = dense_forward(*d, h);
        } else if (const auto* bn = std::get_if<BNLayer>(&layer)) {
            std::vector<double> mu, var;
            column_mean(h, mu);
            column_var_biased(h, mu, var);
            std::vector<double> sigma(var.size());
            for (std::size_t j = 0; j < var.size(); ++j) sigma[j] = std::sqrt(var[j]);
            h = bn_forward(*bn, h, mu, var, inv_sd, nullptr);
            stats.mu.push_back(std::move(mu));
            stats.sigma.push_back(std::move(sigma));
        } else if (std::get_if<DropoutLayer>(&layer)) {
            // Statistics sampling never applies dropout; only batch choice is
            // the source of randomness here.
        } else {
            const auto& act = std::get<ActivationLayer>(layer);
            if (act.kind == Activation::ReLU) {
                Matrix out(h.rows(), h.cols());
                k.relu(h.data(), out.data(), h.size());
                h = std::move(out);
            }
        }
    }
    return stats;
}

void compute_population_stats(Network& net, const Matrix& data) {
    if (data.rows() == 0) throw std::domain_error("compute_population_stats: empty dataset");
    const BatchStats stats = compute_batch_stats(net, data);
    std::size_t bn_idx = 0;
    for (auto& layer : net.layers) {
        if (auto* bn = std::get_if<BNLayer>(&layer)) {
            bn->pop_mean = stats.mu[bn_idx];
            bn->pop_var.resize(stats.sigma[bn_idx].size());
            for (std::size_t j = 0; j < bn->pop_var.size(); ++j) {
                const double s = stats.sigma[bn_idx][j];
                bn->pop_var[j] = s * s;
            }
            ++bn_idx;
        }
    }
}

bool Gradients::all_finite() const {
    for (const auto& lg : layers) {
        if (!lg.dW.all_finite()) return false;
        for (double v : lg.db)
            if (!std::isfinite(v)) return false;
        for (double v : lg.dgamma)
            if (!std::isfinite(v)) return false;
        for (double v : lg.dbeta)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

void Gradients::scale(double a) {
    const auto& k = kernels::active();
    for (auto& lg : layers) {
        k.scale(a, lg.dW.data(), lg.dW.size());
        k.scale(a, lg.db.data(), lg.db.size());
        k.scale(a, lg.dgamma.data(), lg.dgamma.size());
        k.scale(a, lg.dbeta.data(), lg.dbeta.size());
    }
}

Gradients backward(const Network& net, const Cache& cache, const Matrix& dy) {
    if (cache.net != &net || cache.records.size() != net.layers.size())
        throw ContractError("backward: cache does not belong to this network");
    if (dy.rows() != cache.rows || dy.cols() != net.output_width())
        throw DimensionError("backward: upstream gradient shape mismatch");

    const auto& k = kernels::active();
    Gradients grads;
    grads.layers.resize(net.layers.size());

    Matrix dh = dy;
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const auto& layer = net.layers[li];
        const auto& rec = cache.records[li];
        auto& lg = grads.layers[li];
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            const auto& r = std::get<Cache::DenseRec>(rec);
            gemm_tn(dh, r.input, lg.dW);  // dW = dh^T * input, out x in
            lg.db.assign(d->W.rows(), 0.0);
            for (std::size_t row = 0; row < dh.rows(); ++row)
                k.add(dh.data() + row * dh.cols(), lg.db.data(), dh.cols());
            Matrix dprev;
            gemm_nn(dh, d->W, dprev);  // dX = dh * W
            dh = std::move(dprev);
        } else if (const auto* bn = std::get_if<BNLayer>(&layer)) {
            const auto& r = std::get<Cache::BNRec>(rec);
            const std::size_t units = bn->gamma.size();
            const std::size_t m = dh.rows();
            lg.dgamma.assign(units, 0.0);
            lg.dbeta.assign(units, 0.0);
            std::vector<double> scratch(units);
            for (std::size_t row = 0; row < m; ++row) {
                const double* g = dh.data() + row * units;
                std::memcpy(scratch.data(), g, units * sizeof(double));
                k.mul(r.xhat.data() + row * units, scratch.data(), units);
                k.add(scratch.data(), lg.dgamma.data(), units);
                k.add(g, lg.dbeta.data(), units);
            }
            // dxhat = dh * gamma (in place on a copy)
            Matrix dxhat = dh;
            for (std::size_t row = 0; row < m; ++row)
                k.mul(bn->gamma.data(), dxhat.data() + row * units, units);
            Matrix dprev(m, units);
            if (r.batch_mode) {
                // Full backward through mu_B and sigma_B as batch functions.
                std::vector<double> sum_dxhat(units, 0.0), sum_dxhat_cent(units, 0.0),
                    sum_cent(units, 0.0), cent(units);
                for (std::size_t row = 0; row < m; ++row) {
                    const double* hrow = r.input.data() + row * units;
                    k.scaled_diff(1.0, hrow, r.mu.data(), cent.data(), units);
                    k.add(dxhat.data() + row * units, sum_dxhat.data(), units);
                    k.add(cent.data(), sum_cent.data(), units);
                    std::memcpy(scratch.data(), dxhat.data() + row * units,
                                units * sizeof(double));
                    k.mul(cent.data(), scratch.data(), units);
                    k.add(scratch.data(), sum_dxhat_cent.data(), units);
                }
                std::vector<double> dvar(units), dmu(units);
                const double inv_m = 1.0 / static_cast<double>(m);
                for (std::size_t j = 0; j < units; ++j) {
                    const double inv = r.inv_sd[j];
                    dvar[j] = -0.5 * inv * inv * inv * sum_dxhat_cent[j];
                    dmu[j] = -inv * sum_dxhat[j] + dvar[j] * (-2.0 * inv_m) * sum_cent[j];
                }
                for (std::size_t row = 0; row < m; ++row) {
                    const double* hrow = r.input.data() + row * units;
                    const double* dxh = dxhat.data() + row * units;
                    double* out = dprev.data() + row * units;
                    for (std::size_t j = 0; j < units; ++j) {
                        const double centered = hrow[j] - r.mu[j];
                        out[j] = dxh[j] * r.inv_sd[j] +
                                 dvar[j] * 2.0 * centered * inv_m + dmu[j] * inv_m;
                    }
                }
            } else {
                // Fixed statistics: plain elementwise chain rule.
                for (std::size_t row = 0; row < m; ++row) {
                    const double* dxh = dxhat.data() + row * units;
                    double* out = dprev.data() + row * units;
                    for (std::size_t j = 0; j < units; ++j) out[j] = dxh[j] * r.inv_sd[j];
                }
            }
            if (!bn->affine) {
                std::fill(lg.dgamma.begin(), lg.dgamma.end(), 0.0);
                std::fill(lg.dbeta.begin(), lg.dbeta.end(), 0.0);
            }
            dh = std::move(dprev);
        } else if (std::get_if<DropoutLayer>(&layer)) {
            const auto& r = std::get<Cache::DropRec>(rec);
            if (r.active)
                for (std::size_t row = 0; row < dh.rows(); ++row)
                    k.mul(r.mask.data() + row * dh.cols(), dh.data() + row * dh.cols(), dh.cols());
        } else {
            const auto& act = std::get<ActivationLayer>(layer);
            if (act.kind == Activation::ReLU) {
                const auto& r = std::get<Cache::ActRec>(rec);
                Matrix dprev(dh.rows(), dh.cols());
                k.relu_backward(r.input.data(), dh.data(), dprev.data(), dh.size());
                dh = std::move(dprev);
            }
        }
    }
    return grads;
}

Network make_mlp(const MlpSpec& spec, RngStream& rng) {
    Network net;
    net.input_width = spec.input_width;
    std::size_t in_width = spec.input_width;
    auto add_dense = [&](std::size_t out_width) {
        DenseLayer d;
        d.W = Matrix(out_width, in_width);
        const double sd = std::sqrt(2.0 / static_cast<double>(in_width));
        for (std::size_t i = 0; i < d.W.size(); ++i) d.W.data()[i] = sd * rng.next_gaussian();
        d.b.assign(out_width, 0.0);
        net.layers.emplace_back(std::move(d));
        in_width = out_width;
    };
    for (std::size_t width : spec.hidden_widths) {
        if (spec.dropout_rate > 0.0) net.layers.emplace_back(DropoutLayer{spec.dropout_rate});
        add_dense(width);
        if (spec.batch_norm) {
            BNLayer bn;
            bn.gamma.assign(width, 1.0);
            bn.beta.assign(width, 0.0);
            bn.pop_mean.assign(width, 0.0);
            bn.pop_var.assign(width, 1.0);
            bn.affine = spec.bn_affine;
            net.layers.emplace_back(std::move(bn));
        }
        net.layers.emplace_back(ActivationLayer{spec.activation});
    }
    if (spec.dropout_rate > 0.0) net.layers.emplace_back(DropoutLayer{spec.dropout_rate});
    add_dense(spec.output_width);
    net.validate();
    return net;
}

}  // namespace mcbn
