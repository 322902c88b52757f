// SPDX-License-Identifier: Apache-2.0

#include "cfsim/receivers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cfsim {

int ReceiverSet::degenerate_count() const {
    return static_cast<int>(std::count(degenerate.begin(), degenerate.end(), char{1}));
}

namespace {

// Stacks the visible rows of column j over the cluster RUs.
CVector compact_column(const PartialCsiView& view, const std::vector<int>& cluster, int j, int M) {
    CVector out = CVector::Zero(static_cast<Eigen::Index>(cluster.size()) * M);
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        if (view.visible(cluster[i], j)) out.segment(static_cast<Eigen::Index>(i) * M, M) = view.block(cluster[i], j);
    }
    return out;
}

CVector expand_column(const CVector& compact, const std::vector<int>& cluster, int L, int M) {
    CVector out = CVector::Zero(static_cast<Eigen::Index>(L) * M);
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        out.segment(static_cast<Eigen::Index>(cluster[i]) * M, M) = compact.segment(static_cast<Eigen::Index>(i) * M, M);
    }
    return out;
}

CMatrix served_block(const EstimateSet& est, const AssociationGraph& graph, int l) {
    const auto& users = graph.served(l);
    const int M = est.h.num_antennas();
    CMatrix h(M, static_cast<Eigen::Index>(users.size()));
    for (std::size_t i = 0; i < users.size(); ++i) h.col(static_cast<Eigen::Index>(i)) = est.h.block(l, users[i]);
    return h;
}

}  // namespace

ClzfResult clzf_receiver(const PartialCsiView& view, const ClzfOptions& options) {
    const auto& graph = view.graph();
    const int k = view.ue();
    const int L = graph.num_rus();
    const int M = view.source().num_antennas();
    const auto& cluster = graph.cluster(k);

    const CVector target = compact_column(view, cluster, k, M);
    const double target_norm = target.norm();
    if (!(target_norm > 0.0)) throw std::invalid_argument("clzf_receiver: visible target channel is zero");

    ClzfResult result;
    std::vector<CVector> columns;
    for (int j : graph.cluster_users(k)) {
        if (j == k) continue;
        CVector c = compact_column(view, cluster, j, M);
        const double n = c.norm();
        if (!(n > 0.0)) continue;
        if (std::abs(c.dot(target)) >= (1.0 - options.colinear_tol) * n * target_norm) {
            ++result.excluded_colinear;
            continue;
        }
        columns.push_back(std::move(c));
        result.retained.push_back(j);
    }

    CVector v = target;
    if (!columns.empty()) {
        CMatrix interference(target.size(), static_cast<Eigen::Index>(columns.size()));
        for (std::size_t i = 0; i < columns.size(); ++i) interference.col(static_cast<Eigen::Index>(i)) = columns[i];
        Eigen::BDCSVD<CMatrix> svd(interference, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        Eigen::Index rank = 0;
        const double cut = options.rank_tol * s(0);
        while (rank < s.size() && s(rank) > cut) ++rank;
        const CMatrix basis = svd.matrixU().leftCols(rank);
        v = target - basis * (basis.adjoint() * target);
        if (v.norm() <= options.residual_tol * target_norm) {
            result.degenerate = true;
            v = target;
        }
    }
    result.v = expand_column(v / v.norm(), cluster, L, M);
    return result;
}

ReceiverSet clzf_receivers(const EstimateSet& est, const AssociationGraph& graph, const ClzfOptions& options) {
    const int K = graph.num_ues();
    ReceiverSet set;
    set.v = CMatrix::Zero(static_cast<Eigen::Index>(graph.num_rus()) * est.h.num_antennas(), K);
    set.degenerate.assign(static_cast<std::size_t>(K), 0);
    for (int k = 0; k < K; ++k) {
        if (graph.outage(k)) continue;
        const auto r = clzf_receiver(PartialCsiView(est.h, graph, k), options);
        set.v.col(k) = r.v;
        set.degenerate[static_cast<std::size_t>(k)] = r.degenerate ? 1 : 0;
    }
    return set;
}

double unknown_interference_variance(std::span<const double> unknown_betas, double snr) {
    double sum = 0.0;
    for (double b : unknown_betas) sum += b;
    return 1.0 + snr * sum;
}

double unknown_interference_variance(const LargeScaleMap& lsfc, const AssociationGraph& graph, int l, double snr) {
    std::vector<double> unknown;
    for (int j = 0; j < graph.num_ues(); ++j) {
        if (graph.active(j) && !graph.has_edge(l, j)) unknown.push_back(lsfc.beta(l, j));
    }
    return unknown_interference_variance(unknown, snr);
}

CMatrix lmmse_local_all(const EstimateSet& est, const AssociationGraph& graph, int l, double sigma2, double snr) {
    const CMatrix h = served_block(est, graph, l);
    if (h.cols() == 0) return h;
    CMatrix r = snr * h * h.adjoint();
    r.diagonal().array() += sigma2;
    return r.llt().solve(h);
}

CVector lmmse_local(const EstimateSet& est, const AssociationGraph& graph, int l, int k, double sigma2, double snr) {
    const int pos = graph.served_position(l, k);
    if (pos < 0) throw std::invalid_argument("lmmse_local: UE not served by RU");
    return lmmse_local_all(est, graph, l, sigma2, snr).col(pos);
}

CVector LocalVectors::at(const AssociationGraph& graph, int l, int k) const {
    const int pos = graph.served_position(l, k);
    if (pos < 0) throw std::invalid_argument("LocalVectors::at: UE not served by RU");
    return per_ru[static_cast<std::size_t>(l)].col(pos);
}

LocalVectors compute_local_lmmse(const EstimateSet& est, const AssociationGraph& graph, const LargeScaleMap& lsfc,
                                 double snr) {
    LocalVectors out;
    const int L = graph.num_rus();
    out.per_ru.resize(static_cast<std::size_t>(L));
    out.sigma2.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        out.sigma2[static_cast<std::size_t>(l)] = unknown_interference_variance(lsfc, graph, l, snr);
        out.per_ru[static_cast<std::size_t>(l)] = lmmse_local_all(est, graph, l, out.sigma2[static_cast<std::size_t>(l)], snr);
    }
    return out;
}

CMatrix ClusterCombinerState::gamma(double snr) const {
    CMatrix out = snr * g * g.adjoint();
    out.diagonal() += d.cast<cdouble>();
    return out;
}

ClusterCombinerState build_combiner_state(const LocalVectors& local, const EstimateSet& est,
                                          const AssociationGraph& graph, int k) {
    ClusterCombinerState s;
    s.cluster = graph.cluster(k);
    for (int j : graph.cluster_users(k))
        if (j != k) s.interferers.push_back(j);
    const auto n = static_cast<Eigen::Index>(s.cluster.size());
    s.a.resize(n);
    s.d.resize(n);
    s.g = CMatrix::Zero(n, static_cast<Eigen::Index>(s.interferers.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int l = s.cluster[static_cast<std::size_t>(i)];
        const CVector v = local.at(graph, l, k);
        s.a(i) = v.dot(est.h.block(l, k));
        s.d(i) = local.sigma2[static_cast<std::size_t>(l)] * v.squaredNorm();
        for (std::size_t c = 0; c < s.interferers.size(); ++c) {
            const int j = s.interferers[c];
            if (graph.has_edge(l, j)) s.g(i, static_cast<Eigen::Index>(c)) = v.dot(est.h.block(l, j));
        }
    }
    return s;
}

CombiningResult cluster_combining(const ClusterCombinerState& state, double snr) {
    CombiningResult r;
    const CMatrix gamma = state.gamma(snr);
    r.w = gamma.llt().solve(state.a);
    r.sinr = snr * state.a.dot(r.w).real();
    return r;
}

double combining_sinr(const ClusterCombinerState& state, const CVector& w, double snr) {
    const double num = std::norm(w.dot(state.a));
    const double den = w.dot(state.gamma(snr) * w).real();
    return snr * num / den;
}

CVector assemble_receiver(std::span<const CVector> local_blocks, const CVector& w, const std::vector<int>& cluster,
                          int num_rus, int num_antennas) {
    if (local_blocks.size() != cluster.size() || static_cast<std::size_t>(w.size()) != cluster.size()) {
        throw std::invalid_argument("assemble_receiver: size mismatch");
    }
    CVector v = CVector::Zero(static_cast<Eigen::Index>(num_rus) * num_antennas);
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        v.segment(static_cast<Eigen::Index>(cluster[i]) * num_antennas, num_antennas) =
            local_blocks[i] * w(static_cast<Eigen::Index>(i));
    }
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("assemble_receiver: zero receiver");
    return v / n;
}

namespace {

CVector assemble_for(const LocalVectors& local, const AssociationGraph& graph, int k, const CVector& w, int M) {
    const auto& cluster = graph.cluster(k);
    std::vector<CVector> blocks;
    blocks.reserve(cluster.size());
    for (int l : cluster) blocks.push_back(local.at(graph, l, k));
    return assemble_receiver(blocks, w, cluster, graph.num_rus(), M);
}

}  // namespace

LmmseReceivers lmmse_cluster_receivers(const EstimateSet& est, const AssociationGraph& graph, const LargeScaleMap& lsfc,
                                       double snr) {
    const int K = graph.num_ues();
    const int M = est.h.num_antennas();
    const LocalVectors local = compute_local_lmmse(est, graph, lsfc, snr);
    LmmseReceivers out;
    out.set.v = CMatrix::Zero(static_cast<Eigen::Index>(graph.num_rus()) * M, K);
    out.set.degenerate.assign(static_cast<std::size_t>(K), 0);
    out.cluster_sinr.assign(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) {
        if (graph.outage(k)) continue;
        const auto state = build_combiner_state(local, est, graph, k);
        const auto comb = cluster_combining(state, snr);
        out.set.v.col(k) = assemble_for(local, graph, k, comb.w, M);
        out.cluster_sinr[static_cast<std::size_t>(k)] = comb.sinr;
    }
    return out;
}

ReceiverSet combine_with_weights(const LocalVectors& local, const AssociationGraph& graph,
                                 const std::vector<CVector>& weights, int num_antennas) {
    const int K = graph.num_ues();
    ReceiverSet set;
    set.v = CMatrix::Zero(static_cast<Eigen::Index>(graph.num_rus()) * num_antennas, K);
    set.degenerate.assign(static_cast<std::size_t>(K), 0);
    for (int k = 0; k < K; ++k) {
        if (graph.outage(k)) continue;
        set.v.col(k) = assemble_for(local, graph, k, weights.at(static_cast<std::size_t>(k)), num_antennas);
    }
    return set;
}

}  // namespace cfsim
