#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mcbn/errors.hpp"
#include "mcbn/inference.hpp"
#include "mcbn/kernels.hpp"
#include "mcbn/metrics.hpp"
#include "mcbn/network.hpp"
#include "mcbn/numeric.hpp"

using namespace mcbn;
using namespace mcbn::inference;

namespace {

Matrix random_matrix(RngStream& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.next_gaussian();
    return m;
}

Network bn_net(std::uint64_t seed, std::size_t input = 3) {
    RngStream rng(seed, 0);
    MlpSpec spec;
    spec.input_width = input;
    spec.hidden_widths = {8, 6};
    return make_mlp(spec, rng);
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("mcbn: T = 1 reports variance tau^-1 exactly") {
    RngStream rng(1, 0);
    Network net = bn_net(11);
    const Matrix train_x = random_matrix(rng, 40, 3);
    const Matrix queries = random_matrix(rng, 5, 3);
    InferenceConfig cfg;
    cfg.passes = 1;
    cfg.batch_size = 16;
    cfg.tau = 2.5;
    const auto preds = mcbn_predict(net, queries, train_x, cfg);
    for (const auto& pd : preds) {
        CHECK(pd.variance == 1.0 / 2.5);
        CHECK(pd.samples.size() == 1);
    }
}

TEST_CASE("mcbn: M = N makes every pass deterministic, variance tau^-1 exactly") {
    RngStream rng(2, 0);
    Network net = bn_net(12);
    const Matrix train_x = random_matrix(rng, 24, 3);
    const Matrix queries = random_matrix(rng, 4, 3);
    InferenceConfig cfg;
    cfg.passes = 16;
    cfg.batch_size = 24;  // the whole training set
    cfg.tau = 1.0;
    const auto preds = mcbn_predict(net, queries, train_x, cfg);
    compute_population_stats(net, train_x);
    const Matrix det = forward(net, queries, DeterministicMode{});
    for (std::size_t q = 0; q < preds.size(); ++q) {
        CHECK(preds[q].variance == 1.0);  // tau^-1 exactly, zero sample spread
        for (double s : preds[q].samples) CHECK(s == det(q, 0));
    }
}

TEST_CASE("moment assembly: samples {0, 2} with tau 1 give mean 1, variance 2") {
    // Assemble through the variance decomposition: tau^-1 + biased var.
    // Exercised via a dropout net crafted to emit exactly {0, 2w}.
    Network net;
    net.input_width = 1;
    net.layers.emplace_back(DropoutLayer{0.5});
    DenseLayer d;
    d.W = Matrix(1, 1);
    d.W(0, 0) = 1.0;
    d.b.assign(1, 0.0);
    net.layers.emplace_back(std::move(d));
    net.validate();

    Matrix query(1, 1);
    query(0, 0) = 1.0;
    InferenceConfig cfg;
    cfg.passes = 4096;
    cfg.tau = 1.0;
    cfg.seed = 3;
    const auto preds = mcdo_predict(net, query, cfg);
    REQUIRE(preds.size() == 1);
    // Outputs are 0 or 2 (inverted dropout at rate 0.5).
    std::size_t twos = 0;
    for (double s : preds[0].samples) {
        const bool valid = s == 0.0 || s == 2.0;
        REQUIRE(valid);
        twos += s == 2.0;
    }
    // Long-run mean approaches w = 1 (exact Bernoulli expectation).
    CHECK(preds[0].mean == doctest::Approx(1.0).epsilon(0.05));
    CHECK(static_cast<double>(twos) / cfg.passes == doctest::Approx(0.5).epsilon(0.05));

    // Hand check of the 2-sample formula on a crafted pair.
    const std::vector<double> two{0.0, 2.0};
    const auto& k = kernels::active();
    const double mean = k.sum(two.data(), 2) / 2.0;
    const double var = 1.0 / 1.0 + k.sumsq_dev(two.data(), 2, mean) / 2.0;
    CHECK(mean == 1.0);
    CHECK(var == 2.0);
}

TEST_CASE("mcdo: dropout rate 0 keeps all passes identical, variance tau^-1") {
    RngStream rng(4, 0);
    MlpSpec spec;
    spec.input_width = 3;
    spec.hidden_widths = {6};
    spec.batch_norm = false;
    spec.dropout_rate = 0.3;
    RngStream init(5, 0);
    Network net = make_mlp(spec, init);
    for (auto& layer : net.layers)
        if (auto* dr = std::get_if<DropoutLayer>(&layer)) dr->rate = 0.0;
    const Matrix queries = random_matrix(rng, 3, 3);
    InferenceConfig cfg;
    cfg.passes = 9;
    cfg.tau = 4.0;
    const auto preds = mcdo_predict(net, queries, cfg);
    for (const auto& pd : preds) {
        CHECK(pd.variance == 0.25);
        for (double s : pd.samples) CHECK(s == pd.samples[0]);
    }
}

TEST_CASE("inference config errors") {
    RngStream rng(30, 0);
    Network net = bn_net(31);
    const Matrix train_x = random_matrix(rng, 20, 3);
    const Matrix q = random_matrix(rng, 2, 3);
    InferenceConfig cfg;
    cfg.batch_size = 21;  // M > |train_X|
    CHECK_THROWS_AS(mcbn_predict(net, q, train_x, cfg), std::domain_error);
    cfg.batch_size = 8;
    cfg.passes = 0;
    CHECK_THROWS_AS(mcbn_predict(net, q, train_x, cfg), std::domain_error);
    cfg.passes = 4;
    cfg.tau = 0.0;
    CHECK_THROWS_AS(mcbn_predict(net, q, train_x, cfg), std::domain_error);
}

TEST_CASE("mcdo rejects networks without dropout layers") {
    Network net = bn_net(6);
    Matrix q(1, 3);
    InferenceConfig cfg;
    CHECK_THROWS_AS(mcdo_predict(net, q, cfg), ContractError);
}

TEST_CASE("query order does not change per-row predictions") {
    RngStream rng(7, 0);
    Network net = bn_net(13);
    const Matrix train_x = random_matrix(rng, 30, 3);
    Matrix queries = random_matrix(rng, 6, 3);
    InferenceConfig cfg;
    cfg.passes = 24;
    cfg.batch_size = 10;
    cfg.seed = 99;
    const auto forwardv = mcbn_predict(net, queries, train_x, cfg);

    // Reverse the query rows and rerun with the same seed.
    Matrix reversed(queries.rows(), queries.cols());
    for (std::size_t r = 0; r < queries.rows(); ++r)
        for (std::size_t c = 0; c < queries.cols(); ++c)
            reversed(r, c) = queries(queries.rows() - 1 - r, c);
    const auto backward = mcbn_predict(net, reversed, train_x, cfg);
    for (std::size_t r = 0; r < queries.rows(); ++r) {
        const auto& a = forwardv[r];
        const auto& b = backward[queries.rows() - 1 - r];
        CHECK(a.mean == b.mean);  // bit identical
        CHECK(a.variance == b.variance);
        CHECK(a.samples == b.samples);
    }
}

TEST_CASE("mcbn is deterministic under a fixed seed") {
    RngStream rng(8, 0);
    Network net = bn_net(14);
    const Matrix train_x = random_matrix(rng, 25, 3);
    const Matrix queries = random_matrix(rng, 4, 3);
    InferenceConfig cfg;
    cfg.passes = 12;
    cfg.batch_size = 8;
    cfg.seed = 31337;
    const auto a = mcbn_predict(net, queries, train_x, cfg);
    const auto b = mcbn_predict(net, queries, train_x, cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mean == b[i].mean);
        CHECK(a[i].variance == b[i].variance);
        CHECK(a[i].samples == b[i].samples);
    }
}

TEST_CASE("variance decomposition: reported variance is tau^-1 plus sample variance") {
    RngStream rng(9, 0);
    Network net = bn_net(15);
    const Matrix train_x = random_matrix(rng, 32, 3);
    const Matrix queries = random_matrix(rng, 5, 3);
    InferenceConfig cfg;
    cfg.passes = 40;
    cfg.batch_size = 8;
    cfg.tau = 3.0;
    const auto preds = mcbn_predict(net, queries, train_x, cfg);
    const auto& k = kernels::active();
    for (const auto& pd : preds) {
        const double mean = k.sum(pd.samples.data(), pd.samples.size()) / cfg.passes;
        const double sv = k.sumsq_dev(pd.samples.data(), pd.samples.size(), mean) / cfg.passes;
        CHECK(pd.variance == 1.0 / 3.0 + sv);  // identical expression, bit exact
        CHECK(pd.variance >= 1.0 / 3.0);
    }
}

TEST_CASE("mcbn sample-mean spread shrinks like 1/sqrt(T)") {
    RngStream rng(10, 0);
    Network net = bn_net(16);
    const Matrix train_x = random_matrix(rng, 48, 3);
    Matrix query(1, 3);
    query(0, 0) = 0.4;
    query(0, 1) = -0.2;
    query(0, 2) = 0.9;

    const auto spread = [&](std::size_t passes) {
        std::vector<double> means;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            InferenceConfig cfg;
            cfg.passes = passes;
            cfg.batch_size = 12;
            cfg.seed = 1000 + seed;
            means.push_back(mcbn_predict(net, query, train_x, cfg)[0].mean);
        }
        double m = 0.0;
        for (double v : means) m += v;
        m /= means.size();
        double var = 0.0;
        for (double v : means) var += (v - m) * (v - m);
        return std::sqrt(var / means.size());
    };
    const double s50 = spread(50);
    const double s200 = spread(200);
    // Quadrupling T should halve the spread, up to Monte Carlo slack.
    CHECK(s50 / s200 > 1.3);
    CHECK(s50 / s200 < 3.2);
}

TEST_CASE("fit_constant_uncertainty: degenerate, constant-residual, and mixed cases") {
    SUBCASE("all residuals zero drives v to the lower edge") {
        const std::vector<double> means{1.0, 2.0, 3.0};
        const auto cv = fit_constant_uncertainty(means, means);
        CHECK(cv.at_edge);
        CHECK(cv.v <= 1e-11);
    }
    SUBCASE("constant residual matches the scalar-minimizer oracle") {
        const double c = 0.8;
        std::vector<double> means{0.0, 1.0, -2.0, 0.5};
        std::vector<double> targets;
        for (double m : means) targets.push_back(m + c);
        const auto cv = fit_constant_uncertainty(means, targets);
        const auto oracle = minimize_scalar(
            [&](double lv) { return metrics::crps_gaussian(0.0, std::exp(lv), c); },
            std::log(1e-10), std::log(1e4), 1e-12);
        CHECK(cv.v == doctest::Approx(std::exp(oracle.argmin)).epsilon(1e-6));
    }
    SUBCASE("mixed residuals beat every dense-grid variance") {
        const std::vector<double> means{0.0, 0.0, 0.0};
        const std::vector<double> targets{0.0, 1.0, 2.0};
        const auto cv = fit_constant_uncertainty(means, targets);
        const auto mean_crps = [&](double v) {
            double acc = 0.0;
            for (std::size_t i = 0; i < means.size(); ++i)
                acc += metrics::crps_gaussian(means[i], v, targets[i]);
            return acc / means.size();
        };
        const double at_fit = mean_crps(cv.v);
        for (int i = 0; i <= 400; ++i) {
            const double v = std::exp(std::log(1e-8) + (std::log(1e4) - std::log(1e-8)) * i / 400.0);
            CHECK(at_fit <= mean_crps(v) + 1e-10);
        }
    }
    CHECK_THROWS_AS(fit_constant_uncertainty(std::vector<double>{}, std::vector<double>{}),
                    std::domain_error);
}

TEST_CASE("cu_predict carries means and one shared variance") {
    const std::vector<double> means{0.5, -1.0, 2.0};
    const auto preds = cu_predict(means, 1.0, 2.0);
    for (std::size_t i = 0; i < means.size(); ++i) {
        CHECK(preds[i].mean == means[i]);
        CHECK(preds[i].variance == 1.0);
        CHECK(preds[i].samples.empty());
    }
    const auto degenerate = cu_predict(means, 0.0, 2.0);
    for (const auto& pd : degenerate) CHECK(pd.variance == 0.0);
    CHECK_THROWS_AS(cu_predict(means, -1.0, 1.0), std::domain_error);
}

TEST_CASE("modeled-omega sampling produces sane moments") {
    RngStream rng(20, 0);
    Network net = bn_net(21);
    const Matrix train_x = random_matrix(rng, 64, 3);
    const Matrix queries = random_matrix(rng, 3, 3);
    InferenceConfig cfg;
    cfg.passes = 64;
    cfg.batch_size = 16;
    cfg.tau = 1.0;
    const auto batch_based = mcbn_predict(net, queries, train_x, cfg);
    const auto modeled = mcbn_predict_modeled_omega(net, queries, train_x, cfg);
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        CHECK(std::isfinite(modeled[i].mean));
        CHECK(modeled[i].variance >= 1.0);
        // Same ballpark as the batch-based sampler.
        CHECK(std::fabs(modeled[i].mean - batch_based[i].mean) < 1.0);
    }
}

}  // TEST_SUITE
