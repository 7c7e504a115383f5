#include <doctest.h>

#include <cmath>

#include "epf/km_estimation.hpp"
#include "epf/rng.hpp"

using namespace epf;

namespace {

DailyPriceMatrix matrix_from(const std::vector<std::vector<double>>& rows) {
    DailyPriceMatrix m;
    m.values.resize(static_cast<Eigen::Index>(rows.size()), 24);
    for (std::size_t d = 0; d < rows.size(); ++d) {
        m.days.push_back(Date{2020, 1, 1}.plus_days(static_cast<std::int64_t>(d)));
        for (int h = 0; h < 24; ++h)
            m.values(static_cast<Eigen::Index>(d), h) =
                rows[d].size() == 1 ? rows[d][0] : rows[d][static_cast<std::size_t>(h)];
    }
    return m;
}

}  // namespace

TEST_CASE("build_drift_dataset pairs prices with one-day increments") {
    const auto m = matrix_from({{10.0}, {12.0}});
    const auto pairs = build_drift_dataset(m, 1);
    REQUIRE(pairs.pairs.size() == 1);
    CHECK(pairs.pairs[0].first == 10.0);
    CHECK(pairs.pairs[0].second == 2.0);

    const auto flat = build_drift_dataset(matrix_from({{5.0}, {5.0}, {5.0}}), 3);
    for (const auto& [x, dx] : flat.pairs) CHECK(dx == 0.0);

    CHECK_THROWS_AS(build_drift_dataset(matrix_from({{1.0}}), 1), std::invalid_argument);
}

TEST_CASE("build_drift_dataset matches a direct loop on random data") {
    rng::Stream stream(3, 0);
    std::vector<std::vector<double>> rows(10, std::vector<double>(24));
    for (auto& row : rows)
        for (auto& v : row) v = 100.0 * stream.next_u01();
    const auto m = matrix_from(rows);
    for (int hour : {1, 13, 24}) {
        const auto pairs = build_drift_dataset(m, hour);
        REQUIRE(pairs.pairs.size() == 9);
        for (std::size_t k = 0; k < 9; ++k) {
            CHECK(pairs.pairs[k].first == rows[k][static_cast<std::size_t>(hour - 1)]);
            CHECK(pairs.pairs[k].second == rows[k + 1][static_cast<std::size_t>(hour - 1)] -
                                               rows[k][static_cast<std::size_t>(hour - 1)]);
        }
    }
}

TEST_CASE("build_diffusion_dataset half products") {
    const auto m = matrix_from({{10.0}, {12.0}});
    const auto same = build_diffusion_dataset(m, 1, 1);
    REQUIRE(same.triples.size() == 1);
    CHECK(same.triples[0].half_product == 2.0);  // 0.5 * 2 * 2

    // dx_i = 3, dx_j = -1 across two different hours.
    DailyPriceMatrix m2;
    m2.days = {Date{2020, 1, 1}, Date{2020, 1, 2}};
    m2.values.setZero(2, 24);
    m2.values(1, 0) = 3.0;
    m2.values(0, 1) = 1.0;
    m2.values(1, 1) = 0.0;
    const auto cross = build_diffusion_dataset(m2, 1, 2);
    CHECK(cross.triples[0].half_product == -1.5);

    const auto swapped = build_diffusion_dataset(m2, 2, 1);
    CHECK(swapped.triples[0].half_product == cross.triples[0].half_product);
}

TEST_CASE("scott_bandwidth") {
    CHECK(scott_bandwidth(1, 2).h == 1.0);
    CHECK(scott_bandwidth(1, 3).h == 1.0);
    // Independent evaluation via exp/log.
    CHECK(scott_bandwidth(6210, 2).h == doctest::Approx(std::exp(-std::log(6210.0) / 6.0)).epsilon(1e-12));
    CHECK(scott_bandwidth(6210, 2).h == doctest::Approx(0.2333).epsilon(1e-3));
    CHECK(scott_bandwidth(6210, 3).h == doctest::Approx(std::exp(-std::log(6210.0) / 7.0)).epsilon(1e-12));
    CHECK(scott_bandwidth(6210, 3).h == doctest::Approx(0.2872).epsilon(1e-3));
    CHECK_THROWS_AS(scott_bandwidth(0, 2), std::invalid_argument);

    double prev = scott_bandwidth(1, 2).h;
    for (long n : {2L, 5L, 17L, 100L, 5000L, 100000L}) {
        const double h = scott_bandwidth(n, 2).h;
        CHECK(h < prev);
        prev = h;
    }
}

TEST_CASE("estimate_drift recovers a noiseless linear drift") {
    // Noise-free pairs on the line dx = 0.3*(50-x), sampled on a mesh that is
    // symmetric about 50 so the conditional mean at 50 cancels exactly.
    DriftPairs pairs;
    pairs.hour = 1;
    for (int k = 0; k <= 160; ++k) {
        const double x = 30.0 + 0.25 * k;
        pairs.pairs.emplace_back(x, 0.3 * (50.0 - x));
    }
    const auto field = estimate_drift(pairs);
    CHECK(std::abs(drift_at(field, 50.0)) < 1e-6);
    // Kernel regression bias at an interior point, measured on this oracle run.
    CHECK(drift_at(field, 40.0) == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("estimate_drift degenerate inputs") {
    DriftPairs same;
    same.hour = 1;
    for (int k = 0; k < 20; ++k) same.pairs.emplace_back(5.0, 1.0);
    CHECK_THROWS_WITH_AS(estimate_drift(same), doctest::Contains("degenerate"),
                         std::invalid_argument);

    DriftPairs few;
    few.hour = 1;
    few.pairs.emplace_back(1.0, 0.0);
    CHECK_THROWS_AS(estimate_drift(few), std::invalid_argument);
}

TEST_CASE("estimate_drift of zero increments is zero") {
    DriftPairs pairs;
    pairs.hour = 1;
    rng::Stream stream(5, 0);
    for (int k = 0; k < 100; ++k) pairs.pairs.emplace_back(10.0 + 40.0 * stream.next_u01(), 0.0);
    const auto field = estimate_drift(pairs);
    for (std::size_t g = 0; g < field.grid.size(); ++g)
        if (field.valid[g]) CHECK(std::abs(field.values[g]) < 1e-12);
}

TEST_CASE("estimate_drift is shift-equivariant") {
    rng::Stream stream(8, 0);
    DriftPairs pairs;
    pairs.hour = 1;
    for (int k = 0; k < 200; ++k) {
        const double x = 30.0 + 40.0 * stream.next_u01();
        pairs.pairs.emplace_back(x, 0.3 * (50.0 - x) + stream.next_normal());
    }
    DriftPairs shifted = pairs;
    const double c = 123.0;
    for (auto& [x, dx] : shifted.pairs) x += c;
    const auto f0 = estimate_drift(pairs);
    const auto f1 = estimate_drift(shifted);
    for (double x : {35.0, 45.0, 55.0, 65.0})
        CHECK(drift_at(f1, x + c) == doctest::Approx(drift_at(f0, x)).epsilon(1e-9));
}

TEST_CASE("estimate_diffusion sample mean and KDE cross-check") {
    DiffusionTriples triples;
    triples.hour_i = triples.hour_j = 1;
    triples.triples = {{0.0, 0.0, 1.0}, {0.0, 0.0, 3.0}};
    CHECK(estimate_diffusion(triples) == 2.0);

    DiffusionTriples one;
    one.triples = {{0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(estimate_diffusion(one), std::invalid_argument);

    // Random data: the mesh estimate must agree with the mean within 2%.
    rng::Stream stream(21, 0);
    DiffusionTriples rnd;
    rnd.hour_i = 1;
    rnd.hour_j = 2;
    for (int k = 0; k < 500; ++k)
        rnd.triples.push_back(
            {50.0 + 10.0 * stream.next_normal(), 48.0 + 9.0 * stream.next_normal(),
             12.0 + 3.0 * stream.next_normal()});
    const double mean = estimate_diffusion(rnd);
    const double kde = estimate_diffusion_kde_check(rnd);
    CHECK(kde == doctest::Approx(mean).epsilon(0.02));
}

TEST_CASE("estimate_diffusion on synthetic OU increments") {
    // Daily recursion with sigma = 5: E[0.5 dx^2] at stationarity is
    // 0.5 * (theta^2 var + sigma^2) with var = sigma^2/(1-(1-theta)^2).
    const double theta = 0.5, sigma = 5.0;
    const double var = sigma * sigma / (1.0 - (1.0 - theta) * (1.0 - theta));
    const double expected = 0.5 * (theta * theta * var + sigma * sigma);
    rng::Stream stream(77, 0);
    DiffusionTriples triples;
    triples.hour_i = triples.hour_j = 1;
    double x = 50.0;
    for (int k = 0; k < 20000; ++k) {
        const double nx = x + theta * (50.0 - x) + sigma * stream.next_normal();
        triples.triples.push_back({x, x, 0.5 * (nx - x) * (nx - x)});
        x = nx;
    }
    CHECK(estimate_diffusion(triples) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("assemble_diffusion_matrix square roots") {
    SUBCASE("half identity") {
        const auto out = assemble_diffusion_matrix(0.5 * Eigen::MatrixXd::Identity(24, 24));
        CHECK((out.sigma - Eigen::MatrixXd::Identity(24, 24)).norm() < 1e-12);
        CHECK(out.clamped_eigenvalues == 0);
    }
    SUBCASE("diagonal") {
        Eigen::VectorXd d(24);
        for (int i = 0; i < 24; ++i) d(i) = 2.0 * (i + 1) * (i + 1);
        const auto out = assemble_diffusion_matrix(Eigen::MatrixXd(d.asDiagonal()));
        for (int i = 0; i < 24; ++i)
            CHECK(out.sigma(i, i) == doctest::Approx(2.0 * (i + 1)).epsilon(1e-10));
    }
    SUBCASE("random PSD reconstruction") {
        rng::Stream stream(31, 0);
        Eigen::MatrixXd a(24, 24);
        for (int r = 0; r < 24; ++r)
            for (int c = 0; c < 24; ++c) a(r, c) = stream.next_normal();
        const Eigen::MatrixXd d2 = a * a.transpose();
        const auto out = assemble_diffusion_matrix(d2);
        const double rel =
            (out.sigma * out.sigma.transpose() - 2.0 * out.d2).norm() / (2.0 * out.d2).norm();
        CHECK(rel < 1e-8);
        CHECK((out.sigma - out.sigma.transpose()).norm() < 1e-8 * out.sigma.norm());
    }
    SUBCASE("indefinite input gets clamped") {
        Eigen::MatrixXd d2 = Eigen::MatrixXd::Identity(24, 24);
        d2(0, 0) = -1.0;
        const auto out = assemble_diffusion_matrix(d2);
        CHECK(out.clamped_eigenvalues == 1);
        CHECK(out.sigma(0, 0) == doctest::Approx(0.0));
    }
    SUBCASE("asymmetry rejected") {
        Eigen::MatrixXd d2 = Eigen::MatrixXd::Identity(24, 24);
        d2(0, 1) = 0.5;
        CHECK_THROWS_AS(assemble_diffusion_matrix(d2), std::invalid_argument);
    }
}

TEST_CASE("drift_at interpolation and clamping") {
    DriftField f;
    f.hour = 1;
    f.grid = {0.0, 1.0, 3.0, 4.0};
    f.values = {5.0, 1.0, 3.0, 7.0};
    f.valid = {1, 1, 1, 1};
    CHECK(drift_at(f, 3.0) == 3.0);
    CHECK(drift_at(f, 2.0) == doctest::Approx(2.0));
    CHECK(drift_at(f, -10.0) == 5.0);
    CHECK(drift_at(f, 10.0) == 7.0);

    SUBCASE("invalid points are skipped") {
        f.valid = {0, 1, 1, 0};
        CHECK(drift_at(f, -10.0) == 1.0);
        CHECK(drift_at(f, 10.0) == 3.0);
        CHECK(drift_at(f, 2.0) == doctest::Approx(2.0));
    }
    SUBCASE("no valid points") {
        f.valid = {0, 0, 0, 0};
        CHECK_THROWS_AS(drift_at(f, 1.0), std::invalid_argument);
    }
}
