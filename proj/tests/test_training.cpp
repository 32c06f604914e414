#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mcbn/data.hpp"
#include "mcbn/errors.hpp"
#include "mcbn/metrics.hpp"
#include "mcbn/network.hpp"
#include "mcbn/numeric.hpp"
#include "mcbn/serialize.hpp"
#include "mcbn/training.hpp"

using namespace mcbn;
using namespace mcbn::training;

namespace {

Matrix column(const std::vector<double>& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

Network linear_net(double w0) {
    Network net;
    net.input_width = 1;
    DenseLayer d;
    d.W = Matrix(1, 1);
    d.W(0, 0) = w0;
    d.b.assign(1, 0.0);
    net.layers.emplace_back(std::move(d));
    net.validate();
    return net;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("sse_loss values and finite-difference gradient") {
    Matrix y(1, 1), yhat(1, 1);
    yhat(0, 0) = 2.0;
    y(0, 0) = 0.0;
    const auto r = sse_loss(yhat, y);
    CHECK(r.loss == 4.0);
    CHECK(r.dy(0, 0) == 4.0);

    Matrix same(3, 1);
    same(0, 0) = 1.0;
    same(1, 0) = -2.0;
    same(2, 0) = 0.5;
    CHECK(sse_loss(same, same).loss == 0.0);

    RngStream rng(1, 0);
    Matrix a(6, 1), b(6, 1);
    for (std::size_t i = 0; i < 6; ++i) {
        a(i, 0) = rng.next_gaussian();
        b(i, 0) = rng.next_gaussian();
    }
    const auto base = sse_loss(a, b);
    const double h = 1e-6;
    for (std::size_t i = 0; i < 6; ++i) {
        Matrix up = a, down = a;
        up(i, 0) += h;
        down(i, 0) -= h;
        const double fd = (sse_loss(up, b).loss - sse_loss(down, b).loss) / (2.0 * h);
        CHECK(fd == doctest::Approx(base.dy(i, 0)).epsilon(1e-6));
    }

    Matrix wrong(2, 1);
    CHECK_THROWS_AS(sse_loss(a, wrong), DimensionError);
}

TEST_CASE("adam_step: zero gradient leaves parameters unchanged") {
    Network net = linear_net(1.25);
    AdamState st = make_adam_state(net);
    Gradients g;
    g.layers.resize(1);
    g.layers[0].dW = Matrix(1, 1);
    g.layers[0].db.assign(1, 0.0);
    adam_step(net, g, st, 1e-3, 0.0);
    CHECK(std::get<DenseLayer>(net.layers[0]).W(0, 0) == 1.25);
}

TEST_CASE("adam_step: first step with unit gradient moves by about lr") {
    Network net = linear_net(0.0);
    AdamState st = make_adam_state(net);
    Gradients g;
    g.layers.resize(1);
    g.layers[0].dW = Matrix(1, 1);
    g.layers[0].dW(0, 0) = 1.0;
    g.layers[0].db.assign(1, 0.0);
    adam_step(net, g, st, 1e-3, 0.0);
    // Bias-corrected m/sqrt(v) = 1 on the first step.
    CHECK(std::get<DenseLayer>(net.layers[0]).W(0, 0) ==
          doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("adam_step: pure weight decay shrinks W monotonically") {
    Network net = linear_net(2.0);
    AdamState st = make_adam_state(net);
    double prev = 2.0;
    for (int i = 0; i < 50; ++i) {
        Gradients g;
        g.layers.resize(1);
        g.layers[0].dW = Matrix(1, 1);  // zero data gradient
        g.layers[0].db.assign(1, 0.0);
        adam_step(net, g, st, 1e-3, 0.1);
        const double w = std::get<DenseLayer>(net.layers[0]).W(0, 0);
        CHECK(w < prev);
        CHECK(w > 0.0);
        prev = w;
    }
}

TEST_CASE("adam_step rejects non-finite gradients") {
    Network net = linear_net(1.0);
    AdamState st = make_adam_state(net);
    Gradients g;
    g.layers.resize(1);
    g.layers[0].dW = Matrix(1, 1);
    g.layers[0].dW(0, 0) = std::numeric_limits<double>::quiet_NaN();
    g.layers[0].db.assign(1, 0.0);
    CHECK_THROWS_AS(adam_step(net, g, st, 1e-3, 0.0), NumericError);
    CHECK(std::get<DenseLayer>(net.layers[0]).W(0, 0) == 1.0);  // step aborted
}

TEST_CASE("one adam step strictly decreases a quadratic one-parameter loss") {
    // loss(w) = (w x - y)^2 with x = 1, y = 1, w0 = 0.
    Network net = linear_net(0.0);
    AdamState st = make_adam_state(net);
    Matrix x(2, 1), y(2, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 1.0;
    y(0, 0) = 1.0;
    y(1, 0) = 1.0;
    auto [pred, cache] = forward_cached(net, x, TrainMode{});
    const auto before = sse_loss(pred, y);
    const Gradients grads = backward(net, cache, before.dy);
    adam_step(net, grads, st, 1e-3, 0.0);
    const Matrix after = forward(net, x, TrainMode{});
    CHECK(sse_loss(after, y).loss < before.loss);
}

TEST_CASE("train: zero epochs returns the initial network and empty history") {
    Network net = linear_net(0.7);
    const std::string before = network_to_json(net);
    TrainConfig cfg;
    cfg.max_epochs = 0;
    Matrix x(4, 1), y(4, 1);
    const auto res = train(std::move(net), x, y, cfg, x, y);
    CHECK(res.history.empty());
    CHECK(network_to_json(res.net) == before);
}

TEST_CASE("train recovers the OLS slope on 1-D linear data") {
    RngStream rng(42, 0);
    const std::size_t n = 64;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = 2.0 * rng.next_double() - 1.0;
        ys[i] = 2.5 * xs[i];
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += xs[i] * ys[i];
        sxx += xs[i] * xs[i];
    }
    const double ols_slope = sxy / sxx;

    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.max_epochs = 2000;
    cfg.eval_every = 100;
    cfg.seed = 7;
    const auto res = train(linear_net(0.0), column(xs), column(ys), cfg, column(xs),
                           column(ys));
    const double w = std::get<DenseLayer>(res.net.layers[0]).W(0, 0);
    CHECK(w == doctest::Approx(ols_slope).epsilon(1e-2));
    CHECK_FALSE(res.history.empty());
}

TEST_CASE("train is deterministic under a fixed seed") {
    RngStream rng(9, 0);
    MlpSpec spec;
    spec.input_width = 2;
    spec.hidden_widths = {6};
    Matrix x(40, 2), y(40, 1);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.next_gaussian();
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.next_gaussian();
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.max_epochs = 40;
    cfg.eval_every = 20;
    cfg.seed = 77;
    RngStream init_a(5, 0), init_b(5, 0);
    const auto a = train(make_mlp(spec, init_a), x, y, cfg, x, y);
    const auto b = train(make_mlp(spec, init_b), x, y, cfg, x, y);
    CHECK(network_to_json(a.net) == network_to_json(b.net));  // byte identical
    CHECK(a.best_epoch == b.best_epoch);
}

TEST_CASE("grid_search_cv selects sanely and ties break to the first gridpoint") {
    // Learnable 1-D data; huge lambda forces W to 0 and loses.
    RngStream rng(10, 0);
    data::Dataset ds;
    ds.name = "synthetic";
    ds.x = Matrix(60, 1);
    ds.y.resize(60);
    for (std::size_t i = 0; i < 60; ++i) {
        ds.x(i, 0) = 2.0 * rng.next_double() - 1.0;
        ds.y[i] = 3.0 * ds.x(i, 0) + 0.05 * rng.next_gaussian();
    }
    std::vector<std::vector<std::size_t>> folds(3);
    for (std::size_t i = 0; i < 60; ++i) folds[i % 3].push_back(i);

    const NetFactory factory = [](const GridPoint&, RngStream&) { return linear_net(0.0); };
    TrainConfig base;
    base.max_epochs = 300;
    base.eval_every = 50;

    SUBCASE("moderate lambda beats crushing lambda") {
        const std::vector<GridPoint> grid{{50.0, 16, 0.0}, {1e-6, 16, 0.0}};
        const auto sel = grid_search_cv(grid, ds, folds, base, factory, 5, 2);
        CHECK(sel.best_index == 1);
        CHECK(sel.best.lambda == 1e-6);
    }
    SUBCASE("duplicated gridpoints select the first") {
        const std::vector<GridPoint> grid{{1e-6, 16, 0.0}, {1e-6, 16, 0.0}};
        const auto sel = grid_search_cv(grid, ds, folds, base, factory, 5, 1);
        CHECK(sel.best_index == 0);
    }
    SUBCASE("single gridpoint returns it with its best epoch") {
        const std::vector<GridPoint> grid{{1e-6, 16, 0.0}};
        const auto sel = grid_search_cv(grid, ds, folds, base, factory, 5, 1);
        CHECK(sel.best_index == 0);
        CHECK(sel.best_epoch >= 50);
        // The selected epoch has the minimal mean RMSE of the table.
        const auto& eval = sel.table[0];
        for (double v : eval.mean_rmse) CHECK(sel.best_mean_rmse <= v);
    }
    SUBCASE("same seed selects identical hyperparameters") {
        const std::vector<GridPoint> grid{{1e-2, 16, 0.0}, {1e-6, 16, 0.0}};
        const auto s1 = grid_search_cv(grid, ds, folds, base, factory, 5, 2);
        const auto s2 = grid_search_cv(grid, ds, folds, base, factory, 5, 2);
        CHECK(s1.best_index == s2.best_index);
        CHECK(s1.best_epoch == s2.best_epoch);
        CHECK(s1.best_mean_rmse == s2.best_mean_rmse);
    }
}

TEST_CASE("train reports divergence with the epoch index") {
    // Data at overflow scale makes the squared loss non-finite immediately.
    Matrix x(16, 1), y(16, 1);
    for (std::size_t i = 0; i < 16; ++i) {
        x(i, 0) = 1e200;
        y(i, 0) = -1e200;
    }
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.max_epochs = 10;
    try {
        train(linear_net(1.0), x, y, cfg, x, y);
        FAIL("expected divergence");
    } catch (const TrainingError& e) {
        CHECK(e.epoch() == 1);
    }
}

TEST_CASE("a diverging fold scores its gridpoint out of contention") {
    RngStream rng(14, 0);
    data::Dataset ds;
    ds.x = Matrix(30, 1);
    ds.y.resize(30);
    for (std::size_t i = 0; i < 30; ++i) {
        ds.x(i, 0) = rng.next_double();
        ds.y[i] = 2.0 * ds.x(i, 0);
    }
    std::vector<std::vector<std::size_t>> folds(2);
    for (std::size_t i = 0; i < 30; ++i) folds[i % 2].push_back(i);
    // Gridpoint 0 starts from a poisoned network and diverges immediately.
    const NetFactory factory = [](const GridPoint& gp, RngStream&) {
        Network net = linear_net(gp.lambda == 0.5 ? std::numeric_limits<double>::infinity()
                                                  : 0.0);
        return net;
    };
    TrainConfig base;
    base.max_epochs = 60;
    base.eval_every = 20;
    const std::vector<GridPoint> grid{{0.5, 8, 0.0}, {1e-8, 8, 0.0}};
    const auto sel = grid_search_cv(grid, ds, folds, base, factory, 3, 1);
    CHECK(sel.best_index == 1);
    CHECK(std::isinf(sel.table[0].mean_rmse[0]));

    // Every gridpoint diverging is a training error.
    const std::vector<GridPoint> bad{{0.5, 8, 0.0}, {0.5, 8, 0.0}};
    CHECK_THROWS_AS(grid_search_cv(bad, ds, folds, base, factory, 3, 1), TrainingError);
}

TEST_CASE("optimize_tau: degenerate and oracle cases") {
    SUBCASE("zero spread with targets at the mean pushes tau to the upper edge") {
        std::vector<CvPrediction> preds(10);
        for (auto& p : preds) p = {1.0, 0.0, 1.0, 1.0};
        const auto est = optimize_tau(preds);
        CHECK(est.at_edge);
        CHECK(est.tau == doctest::Approx(1e6).epsilon(1e-9));
    }
    SUBCASE("zero spread with constant residual matches the scalar-minimizer oracle") {
        const double c = 0.5;
        std::vector<CvPrediction> preds(10);
        for (auto& p : preds) p = {0.0, 0.0, 1.0, c};
        const auto est = optimize_tau(preds);
        // Oracle: v* = argmin_v CRPS(N(0, v); c) by golden section on log v.
        const auto oracle = minimize_scalar(
            [&](double lv) { return metrics::crps_gaussian(0.0, std::exp(lv), c); },
            std::log(1e-10), std::log(1e4), 1e-12);
        CHECK(1.0 / est.tau == doctest::Approx(std::exp(oracle.argmin)).epsilon(1e-6));
    }
    SUBCASE("refined tau beats every dense-grid value") {
        RngStream rng(12, 0);
        std::vector<CvPrediction> preds;
        for (int i = 0; i < 40; ++i) {
            const double mean = rng.next_gaussian();
            preds.push_back({mean, 0.05 + 0.1 * rng.next_double(), 1.0,
                             mean + 0.4 * rng.next_gaussian()});
        }
        const auto est = optimize_tau(preds);
        const auto objective = [&](double tau) {
            double acc = 0.0;
            for (const auto& p : preds)
                acc += metrics::crps_gaussian(p.sample_mean, p.sample_var + 1.0 / tau, p.target);
            return acc / preds.size();
        };
        const double at_est = objective(est.tau);
        for (int i = 0; i <= 500; ++i) {
            const double tau = std::pow(10.0, -4.0 + 10.0 * i / 500.0);
            CHECK(at_est <= objective(tau) + 1e-10);
        }
    }
    CHECK_THROWS_AS(optimize_tau(std::vector<CvPrediction>{}), std::domain_error);
}

}  // TEST_SUITE
