// SPDX-License-Identifier: Apache-2.0
//
// Directional single-ring channel in the DFT beam domain:
//
//   h_{l,k} = sqrt(beta_{l,k} M / |S|) F_S nu,   nu ~ CN(0, I_|S|)
//
// where F_S holds the DFT columns whose angles 2 pi m / M fall inside the
// scattering window of width Delta centred on the RU -> UE bearing.

#ifndef CFSIM_CHANNEL_HPP
#define CFSIM_CHANNEL_HPP

#include <iosfwd>
#include <vector>

#include "cfsim/association.hpp"
#include "cfsim/geometry.hpp"
#include "cfsim/scenario.hpp"
#include "cfsim/types.hpp"

namespace cfsim {

/// Sorted DFT beam indices in [0, M).
using Support = std::vector<int>;

struct AngularSupport {
    Support indices;
    double theta = 0.0;
    double spread = 0.0;
};

/// Column m of the unitary M x M DFT matrix: exp(-j 2 pi m n / M) / sqrt(M).
CVector dft_column(int num_antennas, int m);
/// F_S, the M x |S| matrix of selected DFT columns.
CMatrix dft_columns(int num_antennas, const Support& support);

/// Exact window membership, closed on both ends. May be empty when the window
/// is narrower than the beam spacing.
AngularSupport angular_support(double theta, double spread, int num_antennas);
/// The single beam closest in angle to theta.
int nearest_beam(double theta, int num_antennas);

/// Supports for every (RU, UE) link of a layout.
class SupportMap {
public:
    SupportMap() = default;
    SupportMap(int num_rus, int num_ues, int num_antennas);

    const Support& at(int l, int k) const { return supports_[index(l, k)]; }
    void set(int l, int k, Support s) { supports_[index(l, k)] = std::move(s); }
    int num_rus() const { return num_rus_; }
    int num_ues() const { return num_ues_; }
    int num_antennas() const { return num_antennas_; }
    /// Links whose exact window was empty and got the nearest-beam substitute.
    int substituted() const { return substituted_; }
    void count_substitution() { ++substituted_; }

private:
    std::size_t index(int l, int k) const {
        return static_cast<std::size_t>(k) * static_cast<std::size_t>(num_rus_) +
               static_cast<std::size_t>(l);
    }
    int num_rus_ = 0;
    int num_ues_ = 0;
    int num_antennas_ = 0;
    int substituted_ = 0;
    std::vector<Support> supports_;
};

SupportMap build_supports(const NetworkLayout& layout, const SimConfig& config);

/// Throws std::invalid_argument on an empty support or non-positive beta.
CVector draw_channel(double beta, const Support& support, int num_antennas, RngStream& rng);
CMatrix covariance(double beta, const Support& support, int num_antennas);

/// LM x K block matrix; block (l, k) is rows [l M, (l + 1) M) of column k.
class ChannelMatrix {
public:
    ChannelMatrix() = default;
    ChannelMatrix(int num_rus, int num_antennas, int num_ues);

    int num_rus() const { return num_rus_; }
    int num_antennas() const { return num_antennas_; }
    int num_ues() const { return static_cast<int>(h_.cols()); }

    auto block(int l, int k) { return h_.col(k).segment(static_cast<Eigen::Index>(l) * num_antennas_, num_antennas_); }
    auto block(int l, int k) const { return h_.col(k).segment(static_cast<Eigen::Index>(l) * num_antennas_, num_antennas_); }
    CMatrix& matrix() { return h_; }
    const CMatrix& matrix() const { return h_; }

private:
    int num_rus_ = 0;
    int num_antennas_ = 0;
    CMatrix h_;
};

/// Draws every (l, k) block, ue-major, from one stream.
ChannelMatrix draw_channel_matrix(const LargeScaleMap& lsfc, const SupportMap& supports, RngStream& rng);

/// What the processor of cluster C_k sees of a channel (or estimate) matrix:
/// block (l, j) is visible iff l is in C_k and j is in U_l.
class PartialCsiView {
public:
    PartialCsiView(const ChannelMatrix& source, const AssociationGraph& graph, int k);

    int ue() const { return k_; }
    bool visible(int l, int j) const;
    /// Visible block or zeros.
    CVector block(int l, int j) const;
    /// Full LM x K matrix H(C_k) with invisible blocks zeroed.
    ChannelMatrix dense() const;
    const ChannelMatrix& source() const { return *source_; }
    const AssociationGraph& graph() const { return *graph_; }

private:
    const ChannelMatrix* source_;
    const AssociationGraph* graph_;
    int k_;
    std::vector<char> in_cluster_;
};

/// Throws std::invalid_argument when k is in outage.
PartialCsiView partial_view(const ChannelMatrix& h, const AssociationGraph& graph, int k);

// Golden-fixture CSV: ru,ue,beta,support (space separated),re/im pairs of h.
void write_channel_fixture_csv(std::ostream& out, const LargeScaleMap& lsfc, const SupportMap& supports,
                               const ChannelMatrix& h);

}  // namespace cfsim

#endif
