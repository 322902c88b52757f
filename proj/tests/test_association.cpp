// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "cfsim/association.hpp"
#include "test_support.hpp"

using namespace cfsim;

namespace {

struct RefResult {
    std::vector<int> pilot;                 // -1 for outage
    std::vector<int> leader;
    std::vector<std::set<int>> cluster;
};

// Independent reference: explicit occupancy sets, candidate lists rebuilt
// with std::sort on (beta desc, index asc).
RefResult reference_association(const Eigen::MatrixXd& beta, int tau_p, int Q, double thr,
                                 const std::vector<int>& order) {
    const int L = static_cast<int>(beta.rows());
    const int K = static_cast<int>(beta.cols());
    RefResult r{std::vector<int>(K, -1), std::vector<int>(K, -1), std::vector<std::set<int>>(K)};
    std::vector<std::set<int>> used(L);
    auto candidates = [&](int k) {
        std::vector<std::pair<double, int>> c;
        for (int l = 0; l < L; ++l)
            if (beta(l, k) >= thr) c.emplace_back(-beta(l, k), l);
        std::sort(c.begin(), c.end());
        std::vector<int> out;
        for (auto& p : c) out.push_back(p.second);
        return out;
    };
    for (int k : order) {
        for (int l : candidates(k)) {
            if (static_cast<int>(used[l].size()) == tau_p) continue;
            int t = 0;
            while (used[l].count(t)) ++t;
            used[l].insert(t);
            r.pilot[k] = t;
            r.leader[k] = l;
            r.cluster[k].insert(l);
            break;
        }
    }
    for (int k : order) {
        if (r.pilot[k] < 0) continue;
        for (int l : candidates(k)) {
            if (static_cast<int>(r.cluster[k].size()) >= Q) break;
            if (r.cluster[k].count(l) || used[l].count(r.pilot[k])) continue;
            used[l].insert(r.pilot[k]);
            r.cluster[k].insert(l);
        }
    }
    return r;
}

SimConfig assoc_config(int L, int K, int tau_p, int Q) {
    SimConfig c;
    c.num_rus = L;
    c.num_ues = K;
    c.pilot_dim = tau_p;
    c.max_cluster_size = Q;
    c.antennas_per_ru = 8;
    return c;
}

AssociationGraph associate(const Eigen::MatrixXd& beta, const SimConfig& c, double snr, std::vector<int> order) {
    const auto lsfc = test::lsfc_from(beta);
    return form_clusters(lsfc, assign_leaders_and_pilots(lsfc, c, snr, std::move(order)), c, snr);
}

}  // namespace

TEST_CASE("association threshold") {
    SimConfig c;
    c.snr_threshold = 2.0;
    c.antennas_per_ru = 16;
    CHECK(association_threshold(c, 10.0) == doctest::Approx(2.0 / 160.0));
}

TEST_CASE("association matches the reference implementation") {
    auto rng = test::test_rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const int L = 1 + static_cast<int>(rng.uniform() * 8);
        const int K = 1 + static_cast<int>(rng.uniform() * 30);
        const int tau_p = 1 + static_cast<int>(rng.uniform() * 6);
        const int Q = 1 + static_cast<int>(rng.uniform() * 5);
        const auto c = assoc_config(L, K, tau_p, Q);
        const auto beta = test::random_betas(L, K, rng, 0.0, 1.0);
        const double snr = 1.0 / (c.antennas_per_ru * rng.uniform(0.0, 0.6));
        std::vector<int> order(K);
        std::iota(order.begin(), order.end(), 0);
        for (int i = K - 1; i > 0; --i) std::swap(order[i], order[static_cast<int>(rng.uniform() * (i + 1))]);

        const auto g = associate(beta, c, snr, order);
        const auto ref = reference_association(beta, tau_p, Q, association_threshold(c, snr), order);
        CHECK(check_invariants(g, Q).empty());
        for (int k = 0; k < K; ++k) {
            CHECK(g.pilot(k) == ref.pilot[k]);
            CHECK(g.leader(k) == ref.leader[k]);
            const std::set<int> got(g.cluster(k).begin(), g.cluster(k).end());
            CHECK(got == ref.cluster[k]);
            CHECK(g.outage(k) == (ref.pilot[k] < 0));
        }
        CHECK(g.order() == order);
    }
}

TEST_CASE("outage below the threshold") {
    Eigen::MatrixXd beta(2, 3);
    beta << 1.0, 1e-9, 0.5,
            0.2, 1e-9, 0.6;
    const auto c = assoc_config(2, 3, 2, 2);
    const double snr = 1.0;  // threshold 1/8
    const auto g = associate(beta, c, snr, {0, 1, 2});
    CHECK(g.outage(1));
    CHECK(g.cluster(1).empty());
    CHECK(g.leader(0) == 0);
    CHECK(g.leader(2) == 1);
    // Both leaders hold pilot 0, which blocks each from the other RU.
    CHECK(g.pilot(0) == 0);
    CHECK(g.pilot(2) == 0);
    CHECK(g.cluster(0) == std::vector<int>{0});
    CHECK(g.cluster(2) == std::vector<int>{1});
    CHECK(g.active_ues() == std::vector<int>{0, 2});
    CHECK(g.cluster_users(0) == std::vector<int>{0});
}

TEST_CASE("pilot exhaustion moves the leader down the ranking") {
    // One pilot, three UEs all preferring RU0.
    Eigen::MatrixXd beta(2, 3);
    beta << 1.0, 0.9, 0.8,
            0.5, 0.4, 0.3;
    const auto c = assoc_config(2, 3, 1, 2);
    const auto g = associate(beta, c, 1.0, {0, 1, 2});
    CHECK(g.leader(0) == 0);
    CHECK(g.leader(1) == 1);
    CHECK(g.outage(2));
    CHECK(check_invariants(g, 2).empty());
}

TEST_CASE("cluster sizes and per-RU load are bounded") {
    SimConfig c = test::small_config();
    c.num_ues = 60;
    c.max_cluster_size = 3;
    auto rng = test::test_rng(2);
    const auto layout = place_nodes(c, rng);
    const auto lsfc = compute_lsfc(layout, c, rng);
    const double snr = derive_constants(c).snr;
    const auto g = form_clusters(lsfc, assign_leaders_and_pilots(lsfc, c, snr, rng), c, snr);
    CHECK(check_invariants(g, 3).empty());
    for (int l = 0; l < c.num_rus; ++l) CHECK(static_cast<int>(g.served(l).size()) <= c.pilot_dim);
    int edges = 0;
    for (int k = 0; k < c.num_ues; ++k) {
        CHECK(static_cast<int>(g.cluster(k).size()) <= 3);
        edges += static_cast<int>(g.cluster(k).size());
    }
    CHECK(edges == g.num_edges());
    CHECK(g.num_edges() <= c.num_rus * c.pilot_dim);
}

TEST_CASE("raising the SNR threshold never grows the edge set") {
    // With pilot k for UE k no UE competes for a pilot slot, so the edges
    // depend only on the threshold.
    auto rng = test::test_rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int L = 6, K = 10;
        auto c = assoc_config(L, K, K, L);
        const auto beta = test::random_betas(L, K, rng, 0.0, 1.0);
        const auto lsfc = test::lsfc_from(beta);
        const double snr = 4.0 / c.antennas_per_ru;
        std::set<std::pair<int, int>> prev;
        bool first = true;
        for (double eta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
            c.snr_threshold = eta;
            const double thr = association_threshold(c, snr);
            AssociationGraph leaders(L, K, K);
            for (int k = 0; k < K; ++k) {
                Eigen::Index best = 0;
                if (beta.col(k).maxCoeff(&best) >= thr) leaders.set_leader(k, static_cast<int>(best), k);
            }
            const auto g = form_clusters(lsfc, leaders, c, snr);
            std::set<std::pair<int, int>> edges;
            for (int k = 0; k < K; ++k)
                for (int l : g.cluster(k)) edges.insert({l, k});
            for (int k = 0; k < K; ++k)
                for (int l = 0; l < L; ++l) CHECK(g.has_edge(l, k) == (beta(l, k) >= thr));
            if (!first) CHECK(std::includes(prev.begin(), prev.end(), edges.begin(), edges.end()));
            prev = edges;
            first = false;
        }
    }
}

TEST_CASE("association is deterministic for a seeded stream") {
    const SimConfig c = test::small_config();
    auto r1 = test::test_rng(4);
    const auto layout = place_nodes(c, r1);
    const auto lsfc = compute_lsfc(layout, c, r1);
    auto o1 = test::test_rng(5);
    auto o2 = test::test_rng(5);
    const auto a = assign_leaders_and_pilots(lsfc, c, 10.0, o1);
    const auto b = assign_leaders_and_pilots(lsfc, c, 10.0, o2);
    CHECK(a.order() == b.order());
    std::vector<int> sorted = a.order();
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> iota(c.num_ues);
    std::iota(iota.begin(), iota.end(), 0);
    CHECK(sorted == iota);
}

TEST_CASE("graph mutation guards and csv") {
    AssociationGraph g(2, 2, 1);
    CHECK_THROWS_AS(g.enroll(0, 0), std::logic_error);
    g.set_leader(0, 1, 0);
    CHECK_THROWS_AS(g.set_leader(0, 0, 0), std::logic_error);
    CHECK_THROWS_AS(g.enroll(1, 0), std::logic_error);
    g.set_leader(1, 0, 0);
    CHECK_THROWS_AS(g.enroll(1, 1), std::logic_error);  // pilot 0 busy at RU1
    std::ostringstream out;
    write_graph_csv(out, g);
    CHECK(out.str() == "ue,ru,pilot,is_leader\n0,1,0,1\n1,0,0,1\n");
    CHECK(g.served_position(1, 0) == 0);
    CHECK(g.served_position(0, 0) == -1);
}
