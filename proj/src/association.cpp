// SPDX-License-Identifier: Apache-2.0

#include "cfsim/association.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

namespace cfsim {

AssociationGraph::AssociationGraph(int num_rus, int num_ues, int pilot_dim)
    : num_rus_(num_rus), num_ues_(num_ues), pilot_dim_(pilot_dim),
      clusters_(static_cast<std::size_t>(num_ues)), served_(static_cast<std::size_t>(num_rus)),
      pilots_(static_cast<std::size_t>(num_ues), -1), leaders_(static_cast<std::size_t>(num_ues), -1),
      position_(Eigen::MatrixXi::Constant(num_rus, num_ues, -1)),
      occupancy_(Eigen::MatrixXi::Zero(num_rus, pilot_dim)) {
    order_.resize(static_cast<std::size_t>(num_ues));
    std::iota(order_.begin(), order_.end(), 0);
}

std::vector<int> AssociationGraph::active_ues() const {
    std::vector<int> out;
    for (int k = 0; k < num_ues_; ++k)
        if (active(k)) out.push_back(k);
    return out;
}

std::vector<int> AssociationGraph::cluster_users(int k) const {
    std::vector<int> out;
    for (int l : clusters_[k]) out.insert(out.end(), served_[l].begin(), served_[l].end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int AssociationGraph::num_edges() const {
    int n = 0;
    for (const auto& c : clusters_) n += static_cast<int>(c.size());
    return n;
}

void AssociationGraph::set_leader(int k, int l, int t) {
    if (pilots_[k] >= 0) throw std::logic_error("set_leader: UE already has a leader");
    if (t < 0 || t >= pilot_dim_) throw std::out_of_range("set_leader: pilot index out of range");
    pilots_[k] = t;
    leaders_[k] = l;
    enroll(l, k);
}

void AssociationGraph::enroll(int l, int k) {
    const int t = pilots_[k];
    if (t < 0) throw std::logic_error("enroll: UE has no pilot");
    if (position_(l, k) >= 0) throw std::logic_error("enroll: edge already present");
    if (occupancy_(l, t) != 0) throw std::logic_error("enroll: pilot already busy at RU");
    occupancy_(l, t) = 1;
    clusters_[k].push_back(l);
    auto& s = served_[l];
    s.insert(std::upper_bound(s.begin(), s.end(), k), k);
    for (std::size_t i = 0; i < s.size(); ++i) position_(l, s[i]) = static_cast<int>(i);
}

double association_threshold(const SimConfig& config, double snr) {
    return config.snr_threshold / (config.antennas_per_ru * snr);
}

namespace {

// RUs by decreasing LSFC for UE k, ties to the lower RU index.
std::vector<int> ranked_rus(const LargeScaleMap& lsfc, int k) {
    std::vector<int> rus(static_cast<std::size_t>(lsfc.num_rus()));
    std::iota(rus.begin(), rus.end(), 0);
    std::stable_sort(rus.begin(), rus.end(), [&](int a, int b) { return lsfc.beta(a, k) > lsfc.beta(b, k); });
    return rus;
}

}  // namespace

AssociationGraph assign_leaders_and_pilots(const LargeScaleMap& lsfc, const SimConfig& config, double snr,
                                           std::vector<int> order) {
    const int L = lsfc.num_rus();
    const int K = lsfc.num_ues();
    if (config.pilot_dim < 1) throw std::invalid_argument("assign_leaders_and_pilots: pilot_dim must be positive");
    if (static_cast<int>(order.size()) != K) throw std::invalid_argument("assign_leaders_and_pilots: order size != K");

    AssociationGraph graph(L, K, config.pilot_dim);
    const double threshold = association_threshold(config, snr);
    for (int k : order) {
        for (int l : ranked_rus(lsfc, k)) {
            if (lsfc.beta(l, k) < threshold) break;
            int free_pilot = -1;
            for (int t = 0; t < config.pilot_dim; ++t) {
                if (!graph.pilot_busy(l, t)) {
                    free_pilot = t;
                    break;
                }
            }
            if (free_pilot < 0) continue;
            graph.set_leader(k, l, free_pilot);
            break;
        }
    }
    graph.set_order(std::move(order));
    return graph;
}

AssociationGraph assign_leaders_and_pilots(const LargeScaleMap& lsfc, const SimConfig& config, double snr,
                                           RngStream& rng) {
    std::vector<int> order(static_cast<std::size_t>(lsfc.num_ues()));
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with our own uniform draws; std::shuffle is not portable
    // across standard libraries.
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    return assign_leaders_and_pilots(lsfc, config, snr, std::move(order));
}

AssociationGraph form_clusters(const LargeScaleMap& lsfc, AssociationGraph graph, const SimConfig& config,
                               double snr) {
    const double threshold = association_threshold(config, snr);
    const auto order = graph.order();
    for (int k : order) {
        if (graph.outage(k)) continue;
        const int t = graph.pilot(k);
        for (int l : ranked_rus(lsfc, k)) {
            if (static_cast<int>(graph.cluster(k).size()) >= config.max_cluster_size) break;
            if (lsfc.beta(l, k) < threshold) break;
            if (graph.has_edge(l, k)) continue;
            if (graph.pilot_busy(l, t)) continue;
            graph.enroll(l, k);
        }
    }
    return graph;
}

std::string check_invariants(const AssociationGraph& graph, int max_cluster_size) {
    for (int k = 0; k < graph.num_ues(); ++k) {
        const auto& c = graph.cluster(k);
        if (graph.outage(k)) {
            if (!c.empty()) return "outage UE " + std::to_string(k) + " has a cluster";
            continue;
        }
        if (static_cast<int>(c.size()) > max_cluster_size) return "cluster of UE " + std::to_string(k) + " exceeds Q";
        if (std::find(c.begin(), c.end(), graph.leader(k)) == c.end()) {
            return "leader of UE " + std::to_string(k) + " not in its cluster";
        }
        for (int l : c) {
            const auto& s = graph.served(l);
            if (!std::binary_search(s.begin(), s.end(), k) || !graph.has_edge(l, k)) {
                return "cluster/served mismatch at (" + std::to_string(l) + "," + std::to_string(k) + ")";
            }
        }
    }
    for (int l = 0; l < graph.num_rus(); ++l) {
        const auto& s = graph.served(l);
        if (static_cast<int>(s.size()) > graph.pilot_dim()) return "RU " + std::to_string(l) + " serves more than tau_p";
        std::set<int> pilots;
        for (int k : s) {
            const auto& c = graph.cluster(k);
            if (std::find(c.begin(), c.end(), l) == c.end()) {
                return "served/cluster mismatch at (" + std::to_string(l) + "," + std::to_string(k) + ")";
            }
            if (!pilots.insert(graph.pilot(k)).second) return "pilot collision at RU " + std::to_string(l);
        }
    }
    return {};
}

void write_graph_csv(std::ostream& out, const AssociationGraph& graph) {
    out << "ue,ru,pilot,is_leader\n";
    for (int k = 0; k < graph.num_ues(); ++k) {
        for (int l : graph.cluster(k)) {
            out << k << ',' << l << ',' << graph.pilot(k) << ',' << (graph.leader(k) == l ? 1 : 0) << '\n';
        }
    }
}

}  // namespace cfsim
