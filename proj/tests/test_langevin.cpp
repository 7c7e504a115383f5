#include <doctest.h>

#include <cmath>

#include "epf/langevin.hpp"
#include "epf/rng.hpp"
#include "test_helpers.hpp"

using namespace epf;

TEST_CASE("simulate with zero drift and zero sigma is constant") {
    const auto model = testing::diagonal_ou_model(0.0, 0.0, 0.0);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(24, 37.5);
    const auto ens = simulate(model, x0, 5, 8, 1);
    for (const auto& path : ens.paths)
        for (Eigen::Index d = 0; d <= 5; ++d)
            for (int h = 0; h < 24; ++h) CHECK(path(d, h) == 37.5);
}

TEST_CASE("one EM step with identity sigma has standard normal increments") {
    const auto model = testing::diagonal_ou_model(0.0, 0.0, 1.0);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(24);
    const int n = 100000;
    const auto ens = simulate(model, x0, 1, n, 12345);
    for (int h = 0; h < 24; h += 7) {
        double sum = 0.0, sumsq = 0.0;
        for (const auto& path : ens.paths) {
            sum += path(1, h);
            sumsq += path(1, h) * path(1, h);
        }
        const double mean = sum / n;
        const double var = sumsq / n - mean * mean;
        CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
        CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("paper configuration runs to completion") {
    const auto model = testing::diagonal_ou_model(0.5, 50.0, 5.0);
    const auto ens = simulate(model, Eigen::VectorXd::Constant(24, 50.0), 9, 1000, 7);
    CHECK(ens.num_paths() == 1000);
    CHECK(ens.horizon() == 9);
    for (const auto& path : ens.paths) CHECK(path.allFinite());
}

TEST_CASE("simulate is independent of the thread count") {
    const auto model = testing::diagonal_ou_model(0.5, 50.0, 5.0);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(24, 60.0);
    const auto a = simulate(model, x0, 6, 64, 99, Date{2021, 1, 1}, 1);
    const auto b = simulate(model, x0, 6, 64, 99, Date{2021, 1, 1}, 4);
    REQUIRE(a.paths.size() == b.paths.size());
    for (std::size_t k = 0; k < a.paths.size(); ++k)
        CHECK(a.paths[k].cwiseEqual(b.paths[k]).all());
}

TEST_CASE("noiseless ensemble mean reverts monotonically") {
    const auto model = testing::diagonal_ou_model(0.4, 50.0, 0.0);
    const auto ens = simulate(model, Eigen::VectorXd::Constant(24, 90.0), 8, 4, 1);
    const auto mean = ensemble_mean(ens);
    for (Eigen::Index d = 1; d <= 8; ++d) {
        CHECK(mean(d, 0) < mean(d - 1, 0));
        CHECK(mean(d, 0) > 50.0);
    }
}

TEST_CASE("OU ensemble matches AR(1) moments") {
    const double theta = 0.5, m = 50.0, sigma = 5.0, x0v = 80.0;
    const auto model = testing::diagonal_ou_model(theta, m, sigma);
    const int n = 10000, p = 9;
    const auto ens = simulate(model, Eigen::VectorXd::Constant(24, x0v), p, n, 2024);
    const auto mean = ensemble_mean(ens);
    for (int t = 1; t <= p; ++t) {
        double var_closed = 0.0;
        for (int k = 0; k < t; ++k) var_closed += std::pow(1.0 - theta, 2 * k);
        var_closed *= sigma * sigma;
        const double mean_closed = m + (x0v - m) * std::pow(1.0 - theta, t);
        const double se = std::sqrt(var_closed / n);
        double sum = 0.0, sumsq = 0.0;
        for (const auto& path : ens.paths) {
            sum += path(t, 3);
            sumsq += path(t, 3) * path(t, 3);
        }
        const double emp_mean = sum / n;
        const double emp_var = sumsq / n - emp_mean * emp_mean;
        CHECK(std::abs(emp_mean - mean_closed) < 3.0 * se);
        CHECK(emp_var == doctest::Approx(var_closed).epsilon(0.10));
    }
}

TEST_CASE("ensemble_stats percentiles") {
    LangevinEnsemble ens;
    ens.t0 = Date{2021, 1, 1};

    SUBCASE("single path collapses all percentiles") {
        Eigen::MatrixXd path = Eigen::MatrixXd::Random(3, 24);
        ens.paths = {path};
        const auto stats = ensemble_stats(ens);
        for (int q : {10, 25, 75, 90}) CHECK(stats.percentiles.at(q).cwiseEqual(path).all());
        CHECK(stats.mean.cwiseEqual(path).all());
    }

    SUBCASE("values 1..100 under the linear-interpolation convention") {
        for (int k = 1; k <= 100; ++k)
            ens.paths.push_back(Eigen::MatrixXd::Constant(2, 24, static_cast<double>(k)));
        const auto stats = ensemble_stats(ens);
        CHECK(stats.percentiles.at(25)(1, 0) == doctest::Approx(25.75));
        CHECK(stats.percentiles.at(75)(1, 0) == doctest::Approx(75.25));
        CHECK(stats.percentiles.at(10)(1, 0) == doctest::Approx(10.9));
        CHECK(stats.mean(1, 0) == doctest::Approx(50.5));
        // Ordering invariant.
        CHECK(stats.percentiles.at(10)(1, 5) <= stats.percentiles.at(25)(1, 5));
        CHECK(stats.percentiles.at(25)(1, 5) <= stats.percentiles.at(75)(1, 5));
        CHECK(stats.percentiles.at(75)(1, 5) <= stats.percentiles.at(90)(1, 5));
    }

    SUBCASE("empty ensemble rejected") { CHECK_THROWS_AS(ensemble_stats(ens), std::invalid_argument); }
}

TEST_CASE("ensemble_mean matches a naive loop") {
    LangevinEnsemble ens;
    ens.t0 = Date{2021, 1, 1};
    rng::Stream stream(17, 0);
    for (int k = 0; k < 7; ++k) {
        Eigen::MatrixXd path(4, 24);
        for (Eigen::Index r = 0; r < 4; ++r)
            for (int h = 0; h < 24; ++h) path(r, h) = 100.0 * stream.next_u01();
        ens.paths.push_back(path);
    }
    const auto mean = ensemble_mean(ens);
    for (Eigen::Index r = 0; r < 4; ++r)
        for (int h = 0; h < 24; ++h) {
            double s = 0.0;
            for (const auto& path : ens.paths) s += path(r, h);
            CHECK(mean(r, h) == doctest::Approx(s / 7.0).epsilon(1e-12));
        }

    SUBCASE("single path is its own mean") {
        LangevinEnsemble one;
        one.paths = {ens.paths[0]};
        CHECK(ensemble_mean(one).cwiseEqual(ens.paths[0]).all());
    }
    SUBCASE("two paths average") {
        LangevinEnsemble two;
        two.paths = {ens.paths[0], ens.paths[1]};
        const Eigen::MatrixXd expect = 0.5 * (ens.paths[0] + ens.paths[1]);
        CHECK((ensemble_mean(two) - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("simulate validates inputs") {
    const auto model = testing::diagonal_ou_model(0.5, 50.0, 1.0);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(24, 50.0);
    CHECK_THROWS_AS(simulate(model, x0, 0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate(model, x0, 5, 0, 1), std::invalid_argument);
    Eigen::VectorXd bad = x0;
    bad(0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(simulate(model, bad, 5, 10, 1), std::invalid_argument);
}
