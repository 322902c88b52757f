// SPDX-License-Identifier: Apache-2.0
//
// Uplink pilot field synthesis and the two channel estimators built on it:
// pilot matching and subspace projection onto the known angular support.

#ifndef CFSIM_CSI_HPP
#define CFSIM_CSI_HPP

#include <string>
#include <vector>

#include "cfsim/association.hpp"
#include "cfsim/channel.hpp"
#include "cfsim/types.hpp"

namespace cfsim {

/// tau_p orthogonal pilots with squared norm tau_p * snr, realized as scaled
/// canonical basis vectors.
class PilotBook {
public:
    PilotBook(int pilot_dim, double snr);

    int size() const { return pilot_dim_; }
    double energy() const { return pilot_dim_ * snr_; }
    CVector sequence(int t) const;

private:
    int pilot_dim_;
    double snr_;
};

/// Y_l = sum_i h_{l,i} phi_{t_i}^H + Z_l for every RU, summed over all
/// non-outage UEs. `noise` may be null for a noise-free field.
std::vector<CMatrix> synthesize_pilot_field(const ChannelMatrix& h, const AssociationGraph& graph,
                                            const PilotBook& pilots, RngStream* noise);

CVector pilot_matching_estimate(const CMatrix& field, const PilotBook& pilots, int t);
CVector subspace_project(const CVector& estimate, const Support& support, int num_antennas);

enum class Estimator { ideal, pilot_matching, subspace_projection };

std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& name);  // "ideal" | "pm" | "sp"

/// Channel estimates on the association edge set; blocks outside E are zero.
struct EstimateSet {
    Estimator mode = Estimator::ideal;
    ChannelMatrix h;
};

/// Ideal mode copies true blocks on E. The other modes synthesize the pilot
/// field using `noise` (may be null only for noise-free tests).
EstimateSet estimate_channels(const ChannelMatrix& h, const AssociationGraph& graph, const SupportMap& supports,
                              const PilotBook& pilots, Estimator mode, RngStream* noise);

/// Same, reusing an already synthesized pilot field.
EstimateSet estimate_from_field(const ChannelMatrix& h, const std::vector<CMatrix>& field,
                                const AssociationGraph& graph, const SupportMap& supports,
                                const PilotBook& pilots, Estimator mode);

}  // namespace cfsim

#endif
