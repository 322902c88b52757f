// SPDX-License-Identifier: Apache-2.0

#include "cfsim/csi.hpp"

#include <cmath>
#include <stdexcept>

namespace cfsim {

PilotBook::PilotBook(int pilot_dim, double snr) : pilot_dim_(pilot_dim), snr_(snr) {
    if (pilot_dim < 1) throw std::invalid_argument("PilotBook: pilot_dim must be positive");
    if (!(snr > 0.0)) throw std::invalid_argument("PilotBook: snr must be positive");
}

CVector PilotBook::sequence(int t) const {
    if (t < 0 || t >= pilot_dim_) throw std::out_of_range("PilotBook: pilot index out of range");
    CVector phi = CVector::Zero(pilot_dim_);
    phi(t) = std::sqrt(energy());
    return phi;
}

std::vector<CMatrix> synthesize_pilot_field(const ChannelMatrix& h, const AssociationGraph& graph,
                                            const PilotBook& pilots, RngStream* noise) {
    const int L = h.num_rus();
    const int M = h.num_antennas();
    std::vector<CMatrix> field(static_cast<std::size_t>(L), CMatrix::Zero(M, pilots.size()));
    for (int i = 0; i < h.num_ues(); ++i) {
        if (graph.outage(i)) continue;
        const CVector phi = pilots.sequence(graph.pilot(i));
        for (int l = 0; l < L; ++l) field[static_cast<std::size_t>(l)].noalias() += h.block(l, i) * phi.adjoint();
    }
    if (noise != nullptr) {
        for (auto& y : field) {
            for (Eigen::Index c = 0; c < y.cols(); ++c)
                for (Eigen::Index r = 0; r < y.rows(); ++r) y(r, c) += noise->complex_normal();
        }
    }
    return field;
}

CVector pilot_matching_estimate(const CMatrix& field, const PilotBook& pilots, int t) {
    return field * pilots.sequence(t) / pilots.energy();
}

CVector subspace_project(const CVector& estimate, const Support& support, int num_antennas) {
    const CMatrix f = dft_columns(num_antennas, support);
    return f * (f.adjoint() * estimate);
}

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::ideal: return "ideal";
        case Estimator::pilot_matching: return "pm";
        case Estimator::subspace_projection: return "sp";
    }
    return "ideal";
}

Estimator parse_estimator(const std::string& name) {
    if (name == "ideal") return Estimator::ideal;
    if (name == "pm" || name == "pilot_matching") return Estimator::pilot_matching;
    if (name == "sp" || name == "subspace_projection") return Estimator::subspace_projection;
    throw std::invalid_argument("unknown estimator '" + name + "' (expected ideal|pm|sp)");
}

EstimateSet estimate_from_field(const ChannelMatrix& h, const std::vector<CMatrix>& field,
                                const AssociationGraph& graph, const SupportMap& supports, const PilotBook& pilots,
                                Estimator mode) {
    EstimateSet est{mode, ChannelMatrix(h.num_rus(), h.num_antennas(), h.num_ues())};
    const int M = h.num_antennas();
    for (int l = 0; l < h.num_rus(); ++l) {
        for (int k : graph.served(l)) {
            switch (mode) {
                case Estimator::ideal:
                    est.h.block(l, k) = h.block(l, k);
                    break;
                case Estimator::pilot_matching:
                    est.h.block(l, k) = pilot_matching_estimate(field[static_cast<std::size_t>(l)], pilots, graph.pilot(k));
                    break;
                case Estimator::subspace_projection:
                    est.h.block(l, k) = subspace_project(
                        pilot_matching_estimate(field[static_cast<std::size_t>(l)], pilots, graph.pilot(k)),
                        supports.at(l, k), M);
                    break;
            }
        }
    }
    return est;
}

EstimateSet estimate_channels(const ChannelMatrix& h, const AssociationGraph& graph, const SupportMap& supports,
                              const PilotBook& pilots, Estimator mode, RngStream* noise) {
    if (mode == Estimator::ideal) return estimate_from_field(h, {}, graph, supports, pilots, mode);
    const auto field = synthesize_pilot_field(h, graph, pilots, noise);
    return estimate_from_field(h, field, graph, supports, pilots, mode);
}

}  // namespace cfsim
