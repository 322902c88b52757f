// SPDX-License-Identifier: Apache-2.0
//
// User-centric cluster formation: leader RU and pilot selection, then
// greedy cluster enrollment under pilot-occupancy and SNR constraints.

#ifndef CFSIM_ASSOCIATION_HPP
#define CFSIM_ASSOCIATION_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfsim/geometry.hpp"
#include "cfsim/scenario.hpp"

namespace cfsim {

/// Bipartite RU/UE association. clusters[k] lists RUs in enrollment order
/// (leader first, then decreasing LSFC); served[l] is kept sorted.
class AssociationGraph {
public:
    AssociationGraph() = default;
    AssociationGraph(int num_rus, int num_ues, int pilot_dim);

    int num_rus() const { return num_rus_; }
    int num_ues() const { return num_ues_; }
    int pilot_dim() const { return pilot_dim_; }

    const std::vector<int>& cluster(int k) const { return clusters_[k]; }
    const std::vector<int>& served(int l) const { return served_[l]; }
    int pilot(int k) const { return pilots_[k]; }
    int leader(int k) const { return leaders_[k]; }
    bool outage(int k) const { return pilots_[k] < 0; }
    bool active(int k) const { return !outage(k); }
    bool has_edge(int l, int k) const { return position_(l, k) >= 0; }
    /// Index of k inside served(l), or -1 when (l, k) is not an edge.
    int served_position(int l, int k) const { return position_(l, k); }
    bool pilot_busy(int l, int t) const { return occupancy_(l, t) != 0; }
    /// Processing order used by both assignment phases.
    const std::vector<int>& order() const { return order_; }

    std::vector<int> active_ues() const;
    /// U(C_k): every UE served by at least one RU of C_k, sorted.
    std::vector<int> cluster_users(int k) const;
    int num_edges() const;

    /// Assigns leader and pilot; the leader becomes the first cluster member.
    void set_leader(int k, int l, int t);
    /// Adds (l, k) to the edge set using pilot(k) at RU l.
    void enroll(int l, int k);
    void set_order(std::vector<int> order) { order_ = std::move(order); }

private:
    int num_rus_ = 0;
    int num_ues_ = 0;
    int pilot_dim_ = 0;
    std::vector<std::vector<int>> clusters_;
    std::vector<std::vector<int>> served_;
    std::vector<int> pilots_;
    std::vector<int> leaders_;
    std::vector<int> order_;
    Eigen::MatrixXi position_;
    Eigen::MatrixXi occupancy_;
};

/// SNR association threshold eta / (M snr) on the LSFC.
double association_threshold(const SimConfig& config, double snr);

/// Leader/pilot phase with the UE order drawn from `rng`.
AssociationGraph assign_leaders_and_pilots(const LargeScaleMap& lsfc, const SimConfig& config,
                                           double snr, RngStream& rng);
/// Same, with an explicit processing order.
AssociationGraph assign_leaders_and_pilots(const LargeScaleMap& lsfc, const SimConfig& config,
                                           double snr, std::vector<int> order);

AssociationGraph form_clusters(const LargeScaleMap& lsfc, AssociationGraph partial,
                               const SimConfig& config, double snr);

/// Checks every structural invariant of the graph; returns a description of
/// the first violation or an empty string.
std::string check_invariants(const AssociationGraph& graph, int max_cluster_size);

// Edge-list CSV: ue,ru,pilot,is_leader (one row per edge, ue-major).
void write_graph_csv(std::ostream& out, const AssociationGraph& graph);

}  // namespace cfsim

#endif
