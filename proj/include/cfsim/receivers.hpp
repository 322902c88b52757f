// SPDX-License-Identifier: Apache-2.0
//
// Uplink receivers under partial CSI: cluster-level zero forcing (CLZF) and
// local LMMSE at each RU followed by max-SINR combining across the cluster.

#ifndef CFSIM_RECEIVERS_HPP
#define CFSIM_RECEIVERS_HPP

#include <span>
#include <vector>

#include "cfsim/association.hpp"
#include "cfsim/channel.hpp"
#include "cfsim/csi.hpp"
#include "cfsim/geometry.hpp"
#include "cfsim/types.hpp"

namespace cfsim {

/// Unit-norm LM-dim receive columns, zero outside each cluster and for
/// outage UEs.
struct ReceiverSet {
    CMatrix v;                      // LM x K
    std::vector<char> degenerate;   // CLZF fell back to MRC for this UE
    int degenerate_count() const;
};

struct ClzfOptions {
    double colinear_tol = 1e-8;   // |<h_j, h_k>| >= (1 - tol) |h_j| |h_k|
    double rank_tol = 1e-10;      // singular values <= rank_tol * s_max dropped
    double residual_tol = 1e-10;  // |P h| <= residual_tol * |h| is degenerate
};

struct ClzfResult {
    CVector v;
    bool degenerate = false;
    int excluded_colinear = 0;
    std::vector<int> retained;   // interferers spanning the nulled subspace
};

/// Throws std::invalid_argument when the visible target channel is zero.
ClzfResult clzf_receiver(const PartialCsiView& view, const ClzfOptions& options = {});
ReceiverSet clzf_receivers(const EstimateSet& est, const AssociationGraph& graph, const ClzfOptions& options = {});

/// sigma^2_l = 1 + snr * sum of beta over active UEs not served by RU l.
double unknown_interference_variance(const LargeScaleMap& lsfc, const AssociationGraph& graph, int l, double snr);
/// Core formula over an explicit list of unknown-link LSFCs.
double unknown_interference_variance(std::span<const double> unknown_betas, double snr);

/// LMMSE vectors of RU l for all of U_l: column i is
/// (sigma2 I + snr sum_{j in U_l} h_j h_j^H)^{-1} h_{served[i]}.
CMatrix lmmse_local_all(const EstimateSet& est, const AssociationGraph& graph, int l, double sigma2, double snr);
CVector lmmse_local(const EstimateSet& est, const AssociationGraph& graph, int l, int k, double sigma2, double snr);

/// Local LMMSE vectors of every RU, indexed [l] with columns in served(l) order.
struct LocalVectors {
    std::vector<CMatrix> per_ru;
    std::vector<double> sigma2;
    CVector at(const AssociationGraph& graph, int l, int k) const;
};

LocalVectors compute_local_lmmse(const EstimateSet& est, const AssociationGraph& graph, const LargeScaleMap& lsfc,
                                 double snr);

/// Cluster-level signal model of UE k after local LMMSE:
/// r = sqrt(snr) (a s_k + G s) + zeta,  zeta ~ CN(0, diag(d)).
struct ClusterCombinerState {
    std::vector<int> cluster;      // rows
    std::vector<int> interferers;  // columns of g: U(C_k) \ {k}
    CVector a;                     // g_{l,k,k}
    CMatrix g;                     // g_{l,k,j}, zero where (l, j) not in E
    Eigen::VectorXd d;             // sigma2_l |v_{l,k}|^2

    /// Gamma = diag(d) + snr G G^H
    CMatrix gamma(double snr) const;
};

ClusterCombinerState build_combiner_state(const LocalVectors& local, const EstimateSet& est,
                                          const AssociationGraph& graph, int k);

struct CombiningResult {
    CVector w;
    double sinr = 0.0;  // snr a^H Gamma^{-1} a
};

CombiningResult cluster_combining(const ClusterCombinerState& state, double snr);
/// Rayleigh quotient snr |w^H a|^2 / (w^H Gamma w) for arbitrary w.
double combining_sinr(const ClusterCombinerState& state, const CVector& w, double snr);

/// Stacks w_l v_{l,k} at the cluster RUs, zero elsewhere, normalized.
/// Throws std::invalid_argument when the stack is all zero.
CVector assemble_receiver(std::span<const CVector> local_blocks, const CVector& w, const std::vector<int>& cluster,
                          int num_rus, int num_antennas);

struct LmmseReceivers {
    ReceiverSet set;
    std::vector<double> cluster_sinr;  // nominal SINR^cl per UE, 0 for outage
};

LmmseReceivers lmmse_cluster_receivers(const EstimateSet& est, const AssociationGraph& graph, const LargeScaleMap& lsfc,
                                       double snr);

/// Assembles cluster receivers from local vectors with externally supplied
/// combining weights (indexed by UE, length |C_k|).
ReceiverSet combine_with_weights(const LocalVectors& local, const AssociationGraph& graph,
                                 const std::vector<CVector>& weights, int num_antennas);

}  // namespace cfsim

#endif
