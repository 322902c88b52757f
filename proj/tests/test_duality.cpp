// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cfsim/duality.hpp"
#include "cfsim/metrics.hpp"
#include "cfsim/receivers.hpp"
#include "test_support.hpp"

using namespace cfsim;

namespace {

struct Setup {
    AssociationGraph graph;
    LargeScaleMap lsfc;
    EstimateSet est;
    ChannelMatrix h;
    CMatrix v;
    double snr = 0.0;
};

Setup physical_setup(std::uint64_t seed, int K = 16) {
    Setup s;
    SimConfig c = test::small_config();
    c.num_ues = K;
    c.max_cluster_size = 3;
    auto rng = test::test_rng(seed);
    const auto layout = place_nodes(c, rng);
    s.lsfc = compute_lsfc(layout, c, rng);
    s.snr = derive_constants(c).snr;
    s.graph = form_clusters(s.lsfc, assign_leaders_and_pilots(s.lsfc, c, s.snr, rng), c, s.snr);
    const auto supports = build_supports(layout, c);
    s.h = draw_channel_matrix(s.lsfc, supports, rng);
    s.est = estimate_channels(s.h, s.graph, supports, PilotBook(c.pilot_dim, s.snr), Estimator::subspace_projection,
                              &rng);
    s.v = lmmse_cluster_receivers(s.est, s.graph, s.lsfc, s.snr).set.v;
    return s;
}

// Block-by-block evaluation of the nominal coupling of precoder/receiver k
// and UE j.
double theta_oracle(const Setup& s, int k, int j) {
    const int M = s.est.h.num_antennas();
    cdouble known = 0.0;
    double unknown = 0.0;
    const auto& ck = s.graph.cluster(k);
    for (int l : ck) {
        const CVector vk = s.v.col(k).segment(l * M, M);
        if (s.graph.has_edge(l, j)) known += vk.dot(s.est.h.block(l, j));
        else unknown += s.lsfc.beta(l, j);
    }
    if (j == k) return std::norm(known);
    return std::norm(known) + unknown / static_cast<double>(ck.size());
}

}  // namespace

TEST_CASE("nominal coefficients match a block-wise oracle") {
    const auto s = physical_setup(1);
    const auto c = nominal_coefficients(s.v, s.est, s.lsfc, s.graph);
    for (int k = 0; k < s.graph.num_ues(); ++k) {
        for (int j = 0; j < s.graph.num_ues(); ++j) {
            if (s.graph.outage(k) || s.graph.outage(j)) {
                CHECK(c.theta(j, k) == 0.0);
                continue;
            }
            // UL coupling of UE j into receiver k.
            CHECK(c.ul_interference(j, k) == doctest::Approx(theta_oracle(s, k, j)).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(nominal_coefficients(CMatrix::Zero(3, 3), s.est, s.lsfc, s.graph), std::invalid_argument);
}

TEST_CASE("single user gets unit power") {
    NominalCoefficients c;
    c.theta = Eigen::MatrixXd::Constant(1, 1, 3.0);
    c.active = {0};
    const double snr = 2.0;
    const auto ul = nominal_ul_sinrs(c, snr);
    CHECK(ul(0) == doctest::Approx(6.0));
    const auto p = dual_power_allocation(c, ul, snr);
    CHECK(p.q(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nominal_dl_sinr(c, snr, p.q, 0) == doctest::Approx(6.0));
}

TEST_CASE("symmetric pair gets equal unit powers") {
    NominalCoefficients c;
    c.theta.resize(2, 2);
    c.theta << 2.0, 0.3,
               0.3, 2.0;
    c.active = {0, 1};
    const auto ul = nominal_ul_sinrs(c, 5.0);
    CHECK(ul(0) == doctest::Approx(2.0 / (0.2 + 0.3)));
    const auto p = dual_power_allocation(c, ul, 5.0);
    CHECK(p.q(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.q(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("duality reproduces the UL SINRs with the same total power") {
    auto rng = test::test_rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const int K = 5;
        NominalCoefficients c;
        c.theta = test::random_betas(K, K, rng, 0.0, 0.2);
        for (int k = 0; k < K; ++k) c.theta(k, k) = rng.uniform(0.5, 3.0);
        c.active = {0, 1, 2, 3, 4};
        const double snr = rng.uniform(0.5, 20.0);
        const auto ul = nominal_ul_sinrs(c, snr);
        const auto p = dual_power_allocation(c, ul, snr);
        CHECK(p.q.sum() == doctest::Approx(static_cast<double>(K)).epsilon(1e-10));
        for (int k = 0; k < K; ++k) {
            CHECK(p.q(k) >= 0.0);
            CHECK(nominal_dl_sinr(c, snr, p.q, k) == doctest::Approx(ul(k)).epsilon(1e-10));
            // Fixed point q_k = mu_k (1/snr + sum_j theta(k,j) q_j) including the diagonal term.
            const double mu = ul(k) / ((1.0 + ul(k)) * c.theta(k, k));
            CHECK(p.q(k) == doctest::Approx(mu * (1.0 / snr + c.theta.row(k).dot(p.q))).epsilon(1e-10));
        }
    }
}

TEST_CASE("duality on a physical layout with outage users") {
    for (std::uint64_t seed = 3; seed < 6; ++seed) {
        const auto s = physical_setup(seed, 40);
        const auto c = nominal_coefficients(s.v, s.est, s.lsfc, s.graph);
        const auto ul = nominal_ul_sinrs(c, s.snr);
        const auto p = dual_power_allocation(c, ul, s.snr);
        CHECK(p.q.sum() == doctest::Approx(static_cast<double>(c.active.size())).epsilon(1e-9));
        for (int k = 0; k < s.graph.num_ues(); ++k) {
            if (s.graph.outage(k)) {
                CHECK(p.q(k) == 0.0);
                continue;
            }
            CHECK(nominal_dl_sinr(c, s.snr, p.q, k) == doctest::Approx(ul(k)).epsilon(1e-9));
        }
    }
}

TEST_CASE("disjoint clusters see only the LSFC surrogate") {
    // UE0 served by RU0, UE1 by RU1, no shared RU.
    auto g = test::make_graph(2, 2, 1, {{0, 0, 0}, {1, 1, 0}});
    Eigen::MatrixXd beta(2, 2);
    beta << 1.0, 0.2,
            0.3, 1.0;
    auto rng = test::test_rng(4);
    const auto h = test::iid_channels(beta, 3, rng);
    const PilotBook book(1, 1.0);
    const auto est = estimate_channels(h, g, SupportMap(2, 2, 3), book, Estimator::ideal, nullptr);
    const auto set = clzf_receivers(est, g);
    const auto c = nominal_coefficients(set.v, est, test::lsfc_from(beta), g);
    CHECK(c.ul_interference(1, 0) == doctest::Approx(0.2));
    CHECK(c.ul_interference(0, 1) == doctest::Approx(0.3));
    CHECK(c.diag(0) == doctest::Approx(h.block(0, 0).squaredNorm()));
}

TEST_CASE("nominal equals exact when every RU knows every channel") {
    auto rng = test::test_rng(5);
    const int L = 3, K = 4;
    const auto g = test::full_graph(L, K);
    const auto beta = test::random_betas(L, K, rng);
    const auto h = test::iid_channels(beta, 4, rng);
    const auto est = estimate_channels(h, g, SupportMap(L, K, 4), PilotBook(K, 1.0), Estimator::ideal, nullptr);
    const double snr = 3.0;
    const auto rx = lmmse_cluster_receivers(est, g, test::lsfc_from(beta), snr);
    const auto c = nominal_coefficients(rx.set.v, est, test::lsfc_from(beta), g);
    const std::vector<char> active(K, 1);
    const auto exact_ul = actual_ul_sinrs(rx.set.v, h.matrix(), snr, active);
    const auto nominal_ul = nominal_ul_sinrs(c, snr);
    for (int k = 0; k < K; ++k) {
        CHECK(nominal_ul(k) == doctest::Approx(exact_ul(k)).epsilon(1e-10));
        // Full CSI makes the cluster SINR the exact SINR too.
        CHECK(rx.cluster_sinr[static_cast<std::size_t>(k)] == doctest::Approx(exact_ul(k)).epsilon(1e-8));
    }
    const auto p = dual_power_allocation(c, nominal_ul, snr);
    const auto exact_dl = actual_dl_sinrs(rx.set.v, p.q, h.matrix(), snr, active);
    for (int k = 0; k < K; ++k) CHECK(exact_dl(k) == doctest::Approx(exact_ul(k)).epsilon(1e-9));
}

TEST_CASE("infeasible targets throw") {
    NominalCoefficients c;
    c.theta.resize(2, 2);
    c.theta << 1.0, 1.0,
               1.0, 1.0;
    c.active = {0, 1};
    Eigen::VectorXd targets(2);
    targets << 10.0, 10.0;
    CHECK_THROWS_AS(dual_power_allocation(c, targets, 1.0), std::runtime_error);
    c.theta(1, 1) = 0.0;
    CHECK_THROWS_AS(dual_power_allocation(c, targets, 1.0), std::runtime_error);
}

TEST_CASE("virtual uplink snr") {
    CHECK(virtual_ul_snr(10, 100, 1.0, 0.01) == doctest::Approx(10.0));
    CHECK_THROWS_AS(virtual_ul_snr(10, 0, 1.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(virtual_ul_snr(10, 10, 1.0, 0.0), std::invalid_argument);
}
