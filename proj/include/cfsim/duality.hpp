// SPDX-License-Identifier: Apache-2.0
//
// Nominal SINRs computable from partial CSI and the uplink-downlink duality
// that turns receive vectors into precoders with matching nominal SINRs.

#ifndef CFSIM_DUALITY_HPP
#define CFSIM_DUALITY_HPP

#include <vector>

#include <Eigen/Dense>

#include "cfsim/association.hpp"
#include "cfsim/csi.hpp"
#include "cfsim/geometry.hpp"
#include "cfsim/types.hpp"

namespace cfsim {

/// theta(k, k) = |v_k^H h_k|^2 on the diagonal and the DL coupling
/// theta(k, j) = theta~_{k,j} (interference of precoder j at UE k) off it.
/// The UL coupling of UE j into receiver k is theta(j, k), i.e. UL uses the
/// transpose. Rows and columns of outage UEs are zero.
struct NominalCoefficients {
    Eigen::MatrixXd theta;
    std::vector<int> active;

    double diag(int k) const { return theta(k, k); }
    double ul_interference(int j, int k) const { return theta(j, k); }  // theta~_{j,k}
    double dl_interference(int k, int j) const { return theta(k, j); }  // theta~_{k,j}
};

/// Built from unit-norm columns `v` (receivers, or precoders u = v) and the
/// estimate set; the unknown part uses the constant 1/|C| block-norm surrogate.
NominalCoefficients nominal_coefficients(const CMatrix& v, const EstimateSet& est, const LargeScaleMap& lsfc,
                                         const AssociationGraph& graph);

double nominal_ul_sinr(const NominalCoefficients& c, double snr, int k);
double nominal_dl_sinr(const NominalCoefficients& c, double snr, const Eigen::VectorXd& q, int k);
/// Nominal UL SINR of every UE (0 for outage).
Eigen::VectorXd nominal_ul_sinrs(const NominalCoefficients& c, double snr);

struct PowerAllocation {
    Eigen::VectorXd q;        // length K, zero for outage UEs
    double snr = 0.0;         // SNR parameter the allocation was solved for
};

/// q* = (1/snr) (I - diag(mu) Theta)^{-1} mu over the active UEs, with
/// mu_k = gamma_k / ((1 + gamma_k) theta_kk). Throws std::runtime_error when
/// the system is singular or the solution has a negative entry.
PowerAllocation dual_power_allocation(const NominalCoefficients& c, const Eigen::VectorXd& targets, double snr);

/// SNR of the virtual uplink with per-UE power (L/K) P_ru: L P_ru / (K N0),
/// powers and noise in linear units.
double virtual_ul_snr(int num_rus, int num_ues, double p_ru, double n0);

}  // namespace cfsim

#endif
