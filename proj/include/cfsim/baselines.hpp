// SPDX-License-Identifier: Apache-2.0
//
// Comparison schemes: LSFD combining weights (from long-term statistics of the
// local LMMSE outputs) and per-RU local (partial) zero-forcing precoding with
// equal or LSFC-proportional power.

#ifndef CFSIM_BASELINES_HPP
#define CFSIM_BASELINES_HPP

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfsim/association.hpp"
#include "cfsim/csi.hpp"
#include "cfsim/receivers.hpp"
#include "cfsim/types.hpp"

namespace cfsim {

/// Running sample means of E[a_k], E[d_k] and sum_j E[G_k(:,j) G_k(:,j)^H]
/// for every active UE of one layout.
class LsfdStats {
public:
    explicit LsfdStats(const AssociationGraph& graph);

    void accumulate(const ClusterCombinerState& state, int k);
    /// Accumulates one fading draw for all active UEs.
    void accumulate(const LocalVectors& local, const EstimateSet& est, const AssociationGraph& graph);

    int samples(int k) const { return counts_[k]; }
    CVector mean_a(int k) const;
    Eigen::VectorXd mean_d(int k) const;
    CMatrix mean_ggh(int k) const;

    /// Gamma^LSFD_k = E[D_k] + snr sum_j E[G(:,j) G(:,j)^H]
    CMatrix gamma(int k, double snr) const;

private:
    std::vector<int> counts_;
    std::vector<CVector> sum_a_;
    std::vector<Eigen::VectorXd> sum_d_;
    std::vector<CMatrix> sum_ggh_;
};

/// w_k = (Gamma^LSFD_k)^{-1} E[a_k].
CVector lsfd_weights(const LsfdStats& stats, int k, double snr);
std::vector<CVector> lsfd_weights(const LsfdStats& stats, const AssociationGraph& graph, double snr);

/// Normalized columns of H (H^H H)^{-1}. Throws std::invalid_argument when H
/// has more columns than rows or is numerically rank deficient.
CMatrix lzf_precoder(const CMatrix& h);
/// Unnormalized pseudoinverse H (H^H H)^{-1}.
CMatrix pseudo_inverse_columns(const CMatrix& h);

struct LocalPrecoders {
    std::vector<int> users;     // U_l in served order
    CMatrix u;                  // M x |U_l| unit-norm columns
    std::vector<int> zf_users;  // subset using ZF
    std::vector<int> mrt_users; // remaining UEs with normalized MRT
};

/// Greedy selection by decreasing beta (ties: lower UE index) of at most M
/// UEs whose channels stay linearly independent (Gram-Schmidt residual
/// > indep_tol |h|); ZF for those, normalized MRT for the rest.
LocalPrecoders lpzf_precoder(const CMatrix& h, std::span<const int> users, std::span<const double> betas,
                             double indep_tol = 1e-6);

enum class LocalPowerMode { epa, ppa };

/// EPA: P/|U_l| each; PPA: P beta_k / sum beta. Throws on an empty set.
Eigen::VectorXd local_power(std::span<const double> betas, double p_ru, LocalPowerMode mode);

struct NetworkPrecoding {
    CMatrix u;             // LM x K unit-norm columns
    Eigen::VectorXd q;     // K, q_k = sum_l q_{l,k}
    int lzf_fallbacks = 0; // RUs where plain LZF was infeasible and LPZF was used
};

/// Builds per-RU precoders (LZF, or LPZF when `partial` or when LZF is
/// infeasible) and powers, then folds them into unit-norm network columns
/// u_k and per-UE powers so the DL SINR formula applies unchanged.
NetworkPrecoding local_zf_precoding(const EstimateSet& est, const AssociationGraph& graph, const LargeScaleMap& lsfc,
                                    double p_ru, LocalPowerMode mode, bool partial);

}  // namespace cfsim

#endif
