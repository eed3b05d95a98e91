#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "support/helpers.hpp"
#include "wfh/error.hpp"
#include "wfh/nonclassicality.hpp"
#include "wfh/quantum_model.hpp"
#include "wfh/states.hpp"

using namespace wfh;
using wfh_tests::expected_tally;
using wfh_tests::geometric_pmf;
using wfh_tests::poisson_pmf;
using wfh_tests::product_tally;

TEST_CASE("correlation_matrix of a point tally vanishes under SUBTRACT") {
    EventTally tally;
    tally.add(0, 0, 0, 12345.0);
    const auto m = correlation_matrix(tally, 0);
    for (const auto &row : m) {
        for (double v : row) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
    }
    // The printed plus-sign form keeps both terms: M00 = 4 + 4.
    const auto m_add = correlation_matrix(tally, 0, SignConvention::kAdd);
    CHECK(m_add[0][0] == doctest::Approx(8.0));
    CHECK(submultinomial_witness(tally, 0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("correlation_matrix is symmetric and scale invariant") {
    EventTally tally;
    tally.add(2, 0, 1, 50.0);
    tally.add(2, 1, 0, 75.0);
    tally.add(2, 2, 3, 25.0);
    tally.add(2, 1, 1, 10.0);
    const auto m = correlation_matrix(tally, 2);
    EventTally scaled;
    for (const auto &[key, c] : tally.counts) {
        scaled.add(std::get<0>(key), std::get<1>(key), std::get<2>(key), 11.0 * c);
    }
    const auto ms = correlation_matrix(scaled, 2);
    for (size_t x = 0; x < m.size(); ++x) {
        for (size_t y = 0; y < m.size(); ++y) {
            CHECK(m[x][y] == m[y][x]);
            CHECK(m[x][y] == doctest::Approx(ms[x][y]).epsilon(1e-12));
        }
    }
}

TEST_CASE("multinomial null sits exactly at zero") {
    const auto pois = poisson_pmf(1.2);
    const auto null_tally = product_tally(0, pois, pois);
    CHECK(std::abs(submultinomial_witness(null_tally, 0)) < 1e-10);

    const auto geo = geometric_pmf(0.8);
    const auto thermal_null = product_tally(0, geo, geo);
    CHECK(std::abs(submultinomial_witness(thermal_null, 0)) < 1e-10);
    CHECK(sub_poissonian_witness(thermal_null, 0) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("sampled multinomial stays within three standard errors of zero") {
    const auto pois = poisson_pmf(1.0);
    std::mt19937_64 rng(99);
    EventTally tally;
    const int events = 1000000;
    // Sample two i.i.d. outcomes per event.
    std::discrete_distribution<int> draw(pois.begin(), pois.end());
    for (int e = 0; e < events; ++e) tally.add(0, draw(rng), draw(rng), 1.0);
    const auto report = witness_report(tally, 0, 10, 7);
    CHECK(report.mu_min >= -3.0 * std::max(report.mu_min_sigma, 1e-6));
    CHECK(report.g2 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("model tallies at alpha = 0 witness nonclassicality for j >= 1") {
    const auto params = table1_params(0.0);
    const auto tally = expected_tally(params, {0, 1, 2, 3, 6});
    CHECK(std::abs(submultinomial_witness(tally, 0)) < 1e-9);
    CHECK(sub_poissonian_witness(tally, 0) == doctest::Approx(2.0).epsilon(1e-6));
    for (int j : {1, 2, 3, 6}) {
        CHECK(submultinomial_witness(tally, j) < -1e-3);
        CHECK(sub_poissonian_witness(tally, j) < 1.0);
    }
}

TEST_CASE("combined_stats examples") {
    EventTally single;
    single.add(1, 2, 3, 1.0);
    const auto point = combined_stats(single, 1);
    CHECK(point.prob(5) == doctest::Approx(1.0));

    EventTally uniform;
    uniform.add(0, 1, 0, 5.0);
    uniform.add(0, 0, 1, 5.0);
    const auto one = combined_stats(uniform, 0);
    CHECK(one.prob(1) == doctest::Approx(1.0));
    double total = 0.0;
    for (const auto &[n, p] : one.probs()) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("combined_stats of a model tally equals the thinned signal distribution") {
    auto params = table1_params(0.0);
    const auto tally = expected_tally(params, {2});
    const auto combined = combined_stats(tally, 2);
    const double eta_s = 0.5 * (params.detector.eta_c + params.detector.eta_d);
    const auto expected =
        binomial_loss(heralded_signal_dist(2, params.source, params.trunc), eta_s);
    for (const auto &[n, p] : expected.probs()) {
        if (p > 1e-10) CHECK(combined.prob(n) == doctest::Approx(p).epsilon(1e-6));
    }
}

TEST_CASE("g2 witness is invariant under scaling both arm efficiencies") {
    auto params = table1_params(0.0);
    const auto tally_full = expected_tally(params, {1, 4});
    auto params_half = params;
    params_half.detector.eta_c *= 0.5;
    params_half.detector.eta_d *= 0.5;
    const auto tally_half = expected_tally(params_half, {1, 4});
    for (int j : {1, 4}) {
        const double a = sub_poissonian_witness(tally_full, j);
        const double b = sub_poissonian_witness(tally_half, j);
        CHECK(std::abs(a - b) < 1e-3);
    }
}

TEST_CASE("witness_report bootstrap behaviour") {
    const auto params = table1_params(0.0);
    const auto joint_tally = wfh_tests::sampled_tally(params, 2, 200000, 31);
    const auto report = witness_report(joint_tally, 2, 10, 5);
    CHECK(report.events == doctest::Approx(200000.0));
    CHECK(report.mu_min_sigma > 0.0);
    CHECK(report.g2_sigma > 0.0);
    // Deterministic under the same seed.
    const auto again = witness_report(joint_tally, 2, 10, 5);
    CHECK(report.mu_min_sigma == again.mu_min_sigma);
    CHECK(report.g2_sigma == again.g2_sigma);
    const auto other_seed = witness_report(joint_tally, 2, 10, 6);
    CHECK(other_seed.mu_min == report.mu_min);  // point estimate unaffected
}

TEST_CASE("diff_from_tally") {
    EventTally tally;
    tally.add(1, 3, 1, 2.0);
    tally.add(1, 0, 2, 2.0);
    const auto diff = diff_from_tally(tally, 1);
    CHECK(diff.prob(2) == doctest::Approx(0.5));
    CHECK(diff.prob(-2) == doctest::Approx(0.5));
}

TEST_CASE("missing herald outcomes raise insufficient data") {
    EventTally tally;
    tally.add(0, 0, 0, 5.0);
    CHECK_THROWS_AS(correlation_matrix(tally, 3), Error);
    CHECK_THROWS_AS(combined_stats(tally, 3), Error);
    CHECK_THROWS_AS(diff_from_tally(tally, 3), Error);
}

TEST_CASE("tally validation") {
    EventTally bad;
    bad.counts[{0, -1, 0}] = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    EventTally negative;
    negative.counts[{0, 0, 0}] = -1.0;
    CHECK_THROWS_AS(negative.validate(), Error);
}
