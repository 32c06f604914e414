#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

#include "mcbn/data.hpp"
#include "mcbn/metrics.hpp"
#include "mcbn/rng.hpp"

using namespace mcbn;
using namespace mcbn::data;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        path = (std::filesystem::temp_directory_path() /
                ("mcbn_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++) + ".csv"))
                   .string();
        std::ofstream(path) << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
    static int counter;
};
int TempCsv::counter = 0;

}  // namespace

TEST_SUITE("data") {

TEST_CASE("load_csv round-trips a hand-written file") {
    TempCsv csv("a,b,target\n1.5,2,3\n-0.25,4,5\n10,20,30\n");
    const Dataset ds = load_csv(csv.path, {{"a", "b"}, "target"}, "tiny");
    REQUIRE(ds.n() == 3);
    REQUIRE(ds.q() == 2);
    CHECK(ds.x(0, 0) == 1.5);
    CHECK(ds.x(1, 0) == -0.25);
    CHECK(ds.x(2, 1) == 20.0);
    CHECK(ds.y[0] == 3.0);
    CHECK(ds.y[2] == 30.0);
}

TEST_CASE("load_csv errors: missing file, bad schema, non-numeric cell") {
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", {{"a"}, "t"}), std::runtime_error);
    TempCsv csv("a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(csv.path, {{"missing"}, "b"}), std::invalid_argument);
    TempCsv bad("a,t\n1,2\nx,3\n");
    try {
        load_csv(bad.path, {{"a"}, "t"});
        FAIL("expected a parse error");
    } catch (const std::invalid_argument& e) {
        // Row-indexed message.
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("normalize: standard data unchanged, constant feature flagged, round-trip") {
    RngStream rng(1, 0);
    Dataset ds;
    ds.x = Matrix(64, 2);
    ds.y.resize(64);
    // First feature already standard up to sampling error; make it exactly so.
    std::vector<double> col(64);
    for (auto& v : col) v = rng.next_gaussian();
    double m = 0.0;
    for (double v : col) m += v;
    m /= 64.0;
    double sd = 0.0;
    for (double v : col) sd += (v - m) * (v - m);
    sd = std::sqrt(sd / 64.0);
    for (std::size_t i = 0; i < 64; ++i) {
        ds.x(i, 0) = (col[i] - m) / sd;
        ds.x(i, 1) = 7.5;  // constant feature
        ds.y[i] = rng.next_gaussian();
    }
    std::vector<std::size_t> all(64);
    for (std::size_t i = 0; i < 64; ++i) all[i] = i;

    NormStats st;
    const Dataset norm = normalize(ds, all, &st);
    for (std::size_t i = 0; i < 64; ++i)
        CHECK(norm.x(i, 0) == doctest::Approx(ds.x(i, 0)).epsilon(1e-12));
    REQUIRE(st.constant_features.size() == 1);
    CHECK(st.constant_features[0] == 1);
    for (std::size_t i = 0; i < 64; ++i) CHECK(norm.x(i, 1) == 0.0);  // centered

    const Dataset back = denormalize(norm, st);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(back.x(i, 0) == doctest::Approx(ds.x(i, 0)).epsilon(1e-12));
        CHECK(back.y[i] == doctest::Approx(ds.y[i]).epsilon(1e-12));
    }
}

TEST_CASE("normalization statistics come from the given indices only") {
    RngStream rng(2, 0);
    Dataset ds;
    ds.x = Matrix(50, 1);
    ds.y.resize(50);
    for (std::size_t i = 0; i < 50; ++i) {
        ds.x(i, 0) = (i < 25 ? 0.0 : 100.0) + rng.next_gaussian();
        ds.y[i] = rng.next_gaussian();
    }
    std::vector<std::size_t> first_half(25), second_half(25);
    for (std::size_t i = 0; i < 25; ++i) {
        first_half[i] = i;
        second_half[i] = 25 + i;
    }
    const auto st_train = compute_norm_stats(ds, first_half);
    const auto st_test = compute_norm_stats(ds, second_half);
    CHECK(std::fabs(st_train.x_mean[0] - st_test.x_mean[0]) > 50.0);
}

TEST_CASE("make_splits: sizes, determinism, partition, leakage") {
    RngStream rng(3, 0);
    Dataset ds;
    ds.x = Matrix(100, 1);
    ds.y.resize(100);
    for (std::size_t i = 0; i < 100; ++i) ds.x(i, 0) = rng.next_gaussian();

    SplitPlan plan;
    plan.split_seeds = {11, 22, 33, 44, 55};
    const auto splits = make_splits(ds, plan);
    REQUIRE(splits.size() == 5);
    for (const auto& split : splits) {
        CHECK(split.test_idx.size() == 20);
        CHECK(split.train_idx.size() == 80);
        REQUIRE(split.folds.size() == 5);
        for (const auto& fold : split.folds) CHECK(fold.size() == 16);

        // Folds partition the CV data; the test set never leaks in.
        std::vector<bool> seen(100, false);
        for (const auto& fold : split.folds)
            for (std::size_t i : fold) {
                CHECK_FALSE(seen[i]);
                seen[i] = true;
            }
        std::size_t covered = 0;
        for (std::size_t i : split.train_idx) covered += seen[i];
        CHECK(covered == 80);
        for (std::size_t i : split.test_idx) CHECK_FALSE(seen[i]);

        // Train and test are disjoint and cover everything.
        std::vector<bool> any(100, false);
        for (std::size_t i : split.train_idx) any[i] = true;
        for (std::size_t i : split.test_idx) {
            CHECK_FALSE(any[i]);
            any[i] = true;
        }
        for (bool b : any) CHECK(b);
    }

    const auto again = make_splits(ds, plan);
    CHECK(again[0].train_idx == splits[0].train_idx);
    CHECK(again[0].test_idx == splits[0].test_idx);

    Dataset small;
    small.x = Matrix(10, 1);
    small.y.resize(10);
    CHECK_THROWS_AS(make_splits(small, plan), std::domain_error);
}

TEST_CASE("denormalize_prediction scales moments, samples, and tau") {
    PredictiveDistribution pd;
    pd.mean = 0.5;
    pd.variance = 2.0;
    pd.samples = {0.0, 1.0};
    pd.tau = 4.0;

    NormStats identity;
    identity.y_mean = 0.0;
    identity.y_std = 1.0;
    const auto same = denormalize_prediction(pd, identity);
    CHECK(same.mean == pd.mean);
    CHECK(same.variance == pd.variance);
    CHECK(same.tau == pd.tau);

    NormStats st;
    st.y_mean = 10.0;
    st.y_std = 2.0;
    const auto out = denormalize_prediction(pd, st);
    CHECK(out.mean == doctest::Approx(11.0));
    CHECK(out.variance == doctest::Approx(8.0));  // x4
    CHECK(out.tau == doctest::Approx(1.0));       // tau / std^2
    CHECK(out.samples[0] == doctest::Approx(10.0));
    CHECK(out.samples[1] == doctest::Approx(12.0));

    // CRPS scale equivariance across denormalization.
    const double y_norm = 1.7;
    const double crps_norm = metrics::crps_gaussian(pd.mean, pd.variance, y_norm);
    const double crps_orig =
        metrics::crps_gaussian(out.mean, out.variance, y_norm * st.y_std + st.y_mean);
    CHECK(crps_orig == doctest::Approx(st.y_std * crps_norm).epsilon(1e-12));
}

TEST_CASE("registry loads and finds entries") {
    const std::string registry_path = std::string(MCBN_SOURCE_DIR) + "/data/registry.json";
    const auto reg = load_registry(registry_path);
    CHECK(reg.size() == 8);
    const auto boston = registry_find(reg, "boston");
    REQUIRE(boston.has_value());
    CHECK(boston->n == 506);
    CHECK(boston->q == 13);
    const auto yacht = registry_find(reg, "yacht");
    REQUIRE(yacht.has_value());
    CHECK(yacht->n == 308);
    CHECK(yacht->q == 6);
    CHECK_FALSE(registry_find(reg, "unknown").has_value());

    // Any registered dataset present on disk must match its registered N/Q.
    for (const auto& entry : reg) {
        const std::string path = std::string(MCBN_SOURCE_DIR) + "/data/" + entry.file;
        if (!std::filesystem::exists(path)) continue;
        const Dataset ds = load_registered(entry, std::string(MCBN_SOURCE_DIR) + "/data");
        CHECK(ds.n() == entry.n);
        CHECK(ds.q() == entry.q);
    }
}

TEST_CASE("toy dataset shape and determinism") {
    const Dataset a = make_toy_dataset(256, 9);
    const Dataset b = make_toy_dataset(256, 9);
    CHECK(a.n() == 256);
    CHECK(a.q() == 1);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    for (std::size_t i = 0; i < a.n(); ++i) {
        CHECK(a.x(i, 0) >= -4.0);
        CHECK(a.x(i, 0) <= 4.0);
    }
    const Matrix grid = toy_query_grid(11, -6.0, 6.0);
    CHECK(grid(0, 0) == -6.0);
    CHECK(grid(10, 0) == 6.0);
    CHECK(grid(5, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
