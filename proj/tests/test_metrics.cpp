// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cfsim/metrics.hpp"
#include "test_support.hpp"

using namespace cfsim;

TEST_CASE("single-user SINR is the matched-filter SNR") {
    auto rng = test::test_rng(1);
    const CMatrix h = test::random_cmatrix(4, 1, rng);
    const CVector v = h.col(0) / h.col(0).norm();
    CHECK(actual_ul_sinr(v, h, 2.0, 0) == doctest::Approx(2.0 * h.col(0).squaredNorm()));
    Eigen::VectorXd q(1);
    q << 0.5;
    CHECK(actual_dl_sinr(v, q, h, 2.0, 0) == doctest::Approx(h.col(0).squaredNorm()));
}

TEST_CASE("UL SINR against a covariance oracle") {
    // SINR_k = snr |v^H h_k|^2 / (v^H (I + snr sum_{j != k} h_j h_j^H) v) for unit-norm v.
    auto rng = test::test_rng(2);
    const int N = 6, K = 5;
    const CMatrix h = test::random_cmatrix(N, K, rng);
    CMatrix v = test::random_cmatrix(N, K, rng);
    v.colwise().normalize();
    const double snr = 3.0;
    std::vector<char> active(K, 1);
    active[3] = 0;
    const auto all = actual_ul_sinrs(v, h, snr, active);
    for (int k = 0; k < K; ++k) {
        CMatrix r = CMatrix::Identity(N, N);
        for (int j = 0; j < K; ++j)
            if (j != k && active[j]) r += snr * h.col(j) * h.col(j).adjoint();
        const double ref = snr * std::norm(v.col(k).dot(h.col(k))) / v.col(k).dot(r * v.col(k)).real();
        CHECK(actual_ul_sinr(v.col(k), h, snr, k, active) == doctest::Approx(ref).epsilon(1e-12));
        // Inactive UEs get no rate.
        CHECK(all(k) == (active[k] ? doctest::Approx(ref).epsilon(1e-12) : doctest::Approx(0.0)));
    }
}

TEST_CASE("DL SINR against an explicit sum") {
    auto rng = test::test_rng(3);
    const int N = 5, K = 4;
    const CMatrix h = test::random_cmatrix(N, K, rng);
    CMatrix u = test::random_cmatrix(N, K, rng);
    u.colwise().normalize();
    Eigen::VectorXd q(K);
    q << 0.5, 1.0, 1.5, 2.0;
    const double snr = 0.7;
    const std::vector<char> active(K, 1);
    const auto all = actual_dl_sinrs(u, q, h, snr, active);
    for (int k = 0; k < K; ++k) {
        double interference = 0.0;
        for (int j = 0; j < K; ++j)
            if (j != k) interference += std::norm(h.col(k).dot(u.col(j))) * q(j);
        const double ref = std::norm(h.col(k).dot(u.col(k))) * q(k) / (1.0 / snr + interference);
        CHECK(all(k) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(actual_dl_sinr(u, q, h, snr, k) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("UL and DL SINRs agree for a symmetric cross-gain matrix") {
    // Real symmetric h with u = v = h gives |v_k^H h_j| = |v_j^H h_k|.
    Eigen::MatrixXd a(3, 3);
    a << 2.0, 0.3, 0.1,
         0.3, 1.5, 0.2,
         0.1, 0.2, 1.0;
    const CMatrix h = a.cast<cdouble>();
    const std::vector<char> active(3, 1);
    const auto ul = actual_ul_sinrs(h, h, 4.0, active);
    const auto dl = actual_dl_sinrs(h, Eigen::VectorXd::Ones(3), h, 4.0, active);
    CHECK((ul - dl).norm() < 1e-12);
}

TEST_CASE("SINRs are invariant to per-column phase rotations") {
    auto rng = test::test_rng(4);
    const CMatrix h = test::random_cmatrix(4, 3, rng);
    CMatrix v = test::random_cmatrix(4, 3, rng);
    CMatrix vr = v;
    CMatrix hr = h;
    for (int k = 0; k < 3; ++k) {
        vr.col(k) *= std::polar(1.0, 0.7 * (k + 1));
        hr.col(k) *= std::polar(1.0, -1.3 * (k + 2));
    }
    const std::vector<char> active(3, 1);
    CHECK((actual_ul_sinrs(v, h, 2.0, active) - actual_ul_sinrs(vr, hr, 2.0, active)).norm() < 1e-12);
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(3, 0.5);
    CHECK((actual_dl_sinrs(v, q, h, 2.0, active) - actual_dl_sinrs(vr, q, hr, 2.0, active)).norm() < 1e-12);
}

TEST_CASE("rates and spectral efficiency") {
    const std::vector<double> s{1.0, 3.0};
    CHECK(ergodic_rate(s) == doctest::Approx(1.5));
    CHECK(ergodic_rate({}) == 0.0);
    CHECK(spectral_efficiency(2.0, 40, 200) == doctest::Approx(1.6));
    CHECK(spectral_efficiency(2.0, 0, 200) == doctest::Approx(2.0));
    CHECK_THROWS_AS(spectral_efficiency(1.0, 1, 0), std::invalid_argument);
}

TEST_CASE("empirical CDF and KS distance") {
    const std::vector<double> x{3.0, 1.0, 2.0, 2.0};
    const auto f = empirical_cdf(x);
    REQUIRE(f.size() == 3);
    CHECK(f[1].first == 2.0);
    CHECK(f[1].second == doctest::Approx(0.75));
    CHECK(cdf_at(f, 0.5) == 0.0);
    CHECK(cdf_at(f, 2.0) == doctest::Approx(0.75));
    CHECK(cdf_at(f, 2.5) == doctest::Approx(0.75));
    CHECK(cdf_at(f, 9.0) == doctest::Approx(1.0));

    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{1.0, 2.0, 3.0};
    CHECK(ks_distance(a, b) == 0.0);
    const std::vector<double> c{10.0, 11.0};
    CHECK(ks_distance(a, c) == doctest::Approx(1.0));
    const std::vector<double> d{1.5, 2.5, 3.5};
    CHECK(ks_distance(a, d) == doctest::Approx(1.0 / 3.0));
    CHECK(ks_distance(a, d) == doctest::Approx(ks_distance(d, a)));
    CHECK_THROWS_AS(ks_distance(a, {}), std::invalid_argument);

    // Brute-force sup over every sample point.
    auto rng = test::test_rng(5);
    std::vector<double> p(50), r(70);
    for (auto& v : p) v = rng.normal();
    for (auto& v : r) v = 0.3 + rng.normal();
    const auto fp = empirical_cdf(p);
    const auto fr = empirical_cdf(r);
    double sup = 0.0;
    std::vector<double> points = p;
    points.insert(points.end(), r.begin(), r.end());
    for (double t : points) sup = std::max(sup, std::abs(cdf_at(fp, t) - cdf_at(fr, t)));
    CHECK(ks_distance(p, r) == doctest::Approx(sup));
}

TEST_CASE("quantile and pairwise sum") {
    const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(v, 1.0 / 3.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile(v, 1.5), std::invalid_argument);

    std::vector<double> many(1000);
    std::iota(many.begin(), many.end(), 1.0);
    CHECK(pairwise_sum(many) == 500500.0);
    CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("rate report") {
    RateReport r;
    r.users = {{0, 0, 1.0, 1.0, 0.8}, {0, 2, 3.0, 2.0, 1.6}};
    r.outage = {{0, 1}};
    r.sum_se = {2.4, 3.6};
    CHECK(r.rates() == std::vector<double>{1.0, 2.0});
    CHECK(r.rates_with_outage() == std::vector<double>{1.0, 2.0, 0.0});
    CHECK(r.mean_sum_se() == doctest::Approx(3.0));
    CHECK(RateReport{}.mean_sum_se() == 0.0);
}
