// SPDX-License-Identifier: Apache-2.0

#include "cfsim/channel.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cfsim {

namespace {

constexpr double kWindowEps = 1e-12;

}  // namespace

CVector dft_column(int num_antennas, int m) {
    if (num_antennas < 1 || m < 0 || m >= num_antennas) {
        throw std::out_of_range("dft_column: index out of range");
    }
    CVector f(num_antennas);
    const double scale = 1.0 / std::sqrt(static_cast<double>(num_antennas));
    for (int n = 0; n < num_antennas; ++n) {
        // Reduce m n modulo M before scaling to keep the phase argument small.
        const long long mn = (static_cast<long long>(m) * n) % num_antennas;
        const double phase = -2.0 * kPi * static_cast<double>(mn) / num_antennas;
        f(n) = std::polar(scale, phase);
    }
    return f;
}

CMatrix dft_columns(int num_antennas, const Support& support) {
    CMatrix f(num_antennas, static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) f.col(static_cast<Eigen::Index>(i)) = dft_column(num_antennas, support[i]);
    return f;
}

AngularSupport angular_support(double theta, double spread, int num_antennas) {
    if (!(spread > 0.0 && spread <= 2.0 * kPi + kWindowEps)) {
        throw std::invalid_argument("angular_support: spread must lie in (0, 2 pi]");
    }
    AngularSupport s;
    s.theta = theta;
    s.spread = spread;
    const double half = 0.5 * spread + kWindowEps;
    for (int m = 0; m < num_antennas; ++m) {
        const double angle = 2.0 * kPi * m / num_antennas;
        const double diff = std::remainder(angle - theta, 2.0 * kPi);
        if (std::abs(diff) <= half) s.indices.push_back(m);
    }
    return s;
}

int nearest_beam(double theta, int num_antennas) {
    const double pos = theta * num_antennas / (2.0 * kPi);
    long long m = std::llround(pos) % num_antennas;
    if (m < 0) m += num_antennas;
    return static_cast<int>(m);
}

SupportMap::SupportMap(int num_rus, int num_ues, int num_antennas)
    : num_rus_(num_rus), num_ues_(num_ues), num_antennas_(num_antennas),
      supports_(static_cast<std::size_t>(num_rus) * static_cast<std::size_t>(num_ues)) {}

SupportMap build_supports(const NetworkLayout& layout, const SimConfig& config) {
    const int M = config.antennas_per_ru;
    SupportMap map(layout.num_rus(), layout.num_ues(), M);
    for (int k = 0; k < layout.num_ues(); ++k) {
        for (int l = 0; l < layout.num_rus(); ++l) {
            const double theta = torus_bearing(layout, l, k);
            auto s = angular_support(theta, config.angular_spread, M);
            if (s.indices.empty()) {
                s.indices.push_back(nearest_beam(theta, M));
                map.count_substitution();
            }
            map.set(l, k, std::move(s.indices));
        }
    }
    return map;
}

CVector draw_channel(double beta, const Support& support, int num_antennas, RngStream& rng) {
    if (support.empty()) throw std::invalid_argument("draw_channel: empty angular support");
    if (!(beta > 0.0)) throw std::invalid_argument("draw_channel: beta must be positive");
    const double scale = std::sqrt(beta * num_antennas / static_cast<double>(support.size()));
    CVector h = CVector::Zero(num_antennas);
    for (int m : support) h += (scale * rng.complex_normal()) * dft_column(num_antennas, m);
    return h;
}

CMatrix covariance(double beta, const Support& support, int num_antennas) {
    if (support.empty()) throw std::invalid_argument("covariance: empty angular support");
    if (!(beta > 0.0)) throw std::invalid_argument("covariance: beta must be positive");
    const CMatrix f = dft_columns(num_antennas, support);
    return (beta * num_antennas / static_cast<double>(support.size())) * (f * f.adjoint());
}

ChannelMatrix::ChannelMatrix(int num_rus, int num_antennas, int num_ues)
    : num_rus_(num_rus), num_antennas_(num_antennas),
      h_(CMatrix::Zero(static_cast<Eigen::Index>(num_rus) * num_antennas, num_ues)) {}

ChannelMatrix draw_channel_matrix(const LargeScaleMap& lsfc, const SupportMap& supports, RngStream& rng) {
    const int L = lsfc.num_rus();
    const int K = lsfc.num_ues();
    const int M = supports.num_antennas();
    ChannelMatrix h(L, M, K);
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) h.block(l, k) = draw_channel(lsfc.beta(l, k), supports.at(l, k), M, rng);
    }
    return h;
}

PartialCsiView::PartialCsiView(const ChannelMatrix& source, const AssociationGraph& graph, int k)
    : source_(&source), graph_(&graph), k_(k), in_cluster_(static_cast<std::size_t>(graph.num_rus()), 0) {
    for (int l : graph.cluster(k)) in_cluster_[static_cast<std::size_t>(l)] = 1;
}

bool PartialCsiView::visible(int l, int j) const {
    return in_cluster_[static_cast<std::size_t>(l)] != 0 && graph_->has_edge(l, j);
}

CVector PartialCsiView::block(int l, int j) const {
    if (visible(l, j)) return source_->block(l, j);
    return CVector::Zero(source_->num_antennas());
}

ChannelMatrix PartialCsiView::dense() const {
    ChannelMatrix out(source_->num_rus(), source_->num_antennas(), source_->num_ues());
    for (int l : graph_->cluster(k_)) {
        for (int j : graph_->served(l)) out.block(l, j) = source_->block(l, j);
    }
    return out;
}

PartialCsiView partial_view(const ChannelMatrix& h, const AssociationGraph& graph, int k) {
    if (k < 0 || k >= graph.num_ues()) throw std::out_of_range("partial_view: UE index out of range");
    if (graph.outage(k)) throw std::invalid_argument("partial_view: UE is in outage");
    return PartialCsiView(h, graph, k);
}

void write_channel_fixture_csv(std::ostream& out, const LargeScaleMap& lsfc, const SupportMap& supports,
                               const ChannelMatrix& h) {
    out << "ru,ue,beta,support,h\n";
    out.precision(17);
    for (int k = 0; k < h.num_ues(); ++k) {
        for (int l = 0; l < h.num_rus(); ++l) {
            out << l << ',' << k << ',' << lsfc.beta(l, k) << ',';
            const auto& s = supports.at(l, k);
            for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
            out << ',';
            const auto b = h.block(l, k);
            for (Eigen::Index n = 0; n < b.rows(); ++n) out << (n ? " " : "") << b(n).real() << ' ' << b(n).imag();
            out << '\n';
        }
    }
}

}  // namespace cfsim
