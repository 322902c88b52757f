// SPDX-License-Identifier: Apache-2.0

#include "cfsim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cfsim {

LsfdStats::LsfdStats(const AssociationGraph& graph)
    : counts_(static_cast<std::size_t>(graph.num_ues()), 0), sum_a_(static_cast<std::size_t>(graph.num_ues())),
      sum_d_(static_cast<std::size_t>(graph.num_ues())), sum_ggh_(static_cast<std::size_t>(graph.num_ues())) {
    for (int k = 0; k < graph.num_ues(); ++k) {
        const auto n = static_cast<Eigen::Index>(graph.cluster(k).size());
        const auto i = static_cast<std::size_t>(k);
        sum_a_[i] = CVector::Zero(n);
        sum_d_[i] = Eigen::VectorXd::Zero(n);
        sum_ggh_[i] = CMatrix::Zero(n, n);
    }
}

void LsfdStats::accumulate(const ClusterCombinerState& state, int k) {
    const auto i = static_cast<std::size_t>(k);
    if (state.a.size() != sum_a_[i].size()) throw std::invalid_argument("LsfdStats: cluster size mismatch");
    sum_a_[i] += state.a;
    sum_d_[i] += state.d;
    sum_ggh_[i].noalias() += state.g * state.g.adjoint();
    ++counts_[i];
}

void LsfdStats::accumulate(const LocalVectors& local, const EstimateSet& est, const AssociationGraph& graph) {
    for (int k = 0; k < graph.num_ues(); ++k) {
        if (graph.outage(k)) continue;
        accumulate(build_combiner_state(local, est, graph, k), k);
    }
}

CVector LsfdStats::mean_a(int k) const {
    const auto i = static_cast<std::size_t>(k);
    if (counts_[i] == 0) throw std::logic_error("LsfdStats: no samples");
    return sum_a_[i] / static_cast<double>(counts_[i]);
}

Eigen::VectorXd LsfdStats::mean_d(int k) const {
    const auto i = static_cast<std::size_t>(k);
    if (counts_[i] == 0) throw std::logic_error("LsfdStats: no samples");
    return sum_d_[i] / static_cast<double>(counts_[i]);
}

CMatrix LsfdStats::mean_ggh(int k) const {
    const auto i = static_cast<std::size_t>(k);
    if (counts_[i] == 0) throw std::logic_error("LsfdStats: no samples");
    return sum_ggh_[i] / static_cast<double>(counts_[i]);
}

CMatrix LsfdStats::gamma(int k, double snr) const {
    CMatrix g = snr * mean_ggh(k);
    g.diagonal() += mean_d(k).cast<cdouble>();
    return g;
}

CVector lsfd_weights(const LsfdStats& stats, int k, double snr) {
    return stats.gamma(k, snr).llt().solve(stats.mean_a(k));
}

std::vector<CVector> lsfd_weights(const LsfdStats& stats, const AssociationGraph& graph, double snr) {
    std::vector<CVector> out(static_cast<std::size_t>(graph.num_ues()));
    for (int k = 0; k < graph.num_ues(); ++k)
        if (graph.active(k)) out[static_cast<std::size_t>(k)] = lsfd_weights(stats, k, snr);
    return out;
}

CMatrix pseudo_inverse_columns(const CMatrix& h) {
    const CMatrix gram = h.adjoint() * h;
    return h * gram.ldlt().solve(CMatrix::Identity(gram.rows(), gram.cols()));
}

CMatrix lzf_precoder(const CMatrix& h) {
    if (h.cols() > h.rows()) throw std::invalid_argument("lzf_precoder: more users than antennas");
    if (h.cols() == 0) return h;
    Eigen::BDCSVD<CMatrix> svd(h);
    const auto& s = svd.singularValues();
    if (!(s(s.size() - 1) > 1e-10 * s(0))) throw std::invalid_argument("lzf_precoder: rank deficient channel");
    CMatrix u = pseudo_inverse_columns(h);
    u.colwise().normalize();
    return u;
}

LocalPrecoders lpzf_precoder(const CMatrix& h, std::span<const int> users, std::span<const double> betas,
                             double indep_tol) {
    const auto n = static_cast<std::size_t>(h.cols());
    if (users.size() != n || betas.size() != n) throw std::invalid_argument("lpzf_precoder: size mismatch");
    LocalPrecoders out;
    out.users.assign(users.begin(), users.end());
    out.u = CMatrix::Zero(h.rows(), h.cols());

    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        if (betas[a] != betas[b]) return betas[a] > betas[b];
        return users[a] < users[b];
    });

    std::vector<std::size_t> zf;
    std::vector<std::size_t> mrt;
    CMatrix basis(h.rows(), 0);
    for (std::size_t i : rank) {
        const CVector col = h.col(static_cast<Eigen::Index>(i));
        if (static_cast<Eigen::Index>(zf.size()) < h.rows()) {
            const CVector r = col - basis * (basis.adjoint() * col);
            const double rn = r.norm();
            if (rn > indep_tol * col.norm()) {
                basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
                basis.col(basis.cols() - 1) = r / rn;
                zf.push_back(i);
                continue;
            }
        }
        mrt.push_back(i);
    }
    std::sort(zf.begin(), zf.end());
    std::sort(mrt.begin(), mrt.end());

    if (!zf.empty()) {
        CMatrix hz(h.rows(), static_cast<Eigen::Index>(zf.size()));
        for (std::size_t c = 0; c < zf.size(); ++c) hz.col(static_cast<Eigen::Index>(c)) = h.col(static_cast<Eigen::Index>(zf[c]));
        CMatrix pz = pseudo_inverse_columns(hz);
        pz.colwise().normalize();
        for (std::size_t c = 0; c < zf.size(); ++c) out.u.col(static_cast<Eigen::Index>(zf[c])) = pz.col(static_cast<Eigen::Index>(c));
    }
    for (std::size_t i : mrt) {
        const CVector col = h.col(static_cast<Eigen::Index>(i));
        const double nn = col.norm();
        if (nn > 0.0) out.u.col(static_cast<Eigen::Index>(i)) = col / nn;
    }
    for (std::size_t i : zf) out.zf_users.push_back(users[i]);
    for (std::size_t i : mrt) out.mrt_users.push_back(users[i]);
    return out;
}

Eigen::VectorXd local_power(std::span<const double> betas, double p_ru, LocalPowerMode mode) {
    if (betas.empty()) throw std::invalid_argument("local_power: empty user set");
    const auto n = static_cast<Eigen::Index>(betas.size());
    Eigen::VectorXd q(n);
    if (mode == LocalPowerMode::epa) {
        q.setConstant(p_ru / static_cast<double>(n));
        return q;
    }
    const double total = std::accumulate(betas.begin(), betas.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("local_power: non-positive LSFC sum");
    for (Eigen::Index i = 0; i < n; ++i) q(i) = p_ru * betas[static_cast<std::size_t>(i)] / total;
    return q;
}

NetworkPrecoding local_zf_precoding(const EstimateSet& est, const AssociationGraph& graph, const LargeScaleMap& lsfc,
                                    double p_ru, LocalPowerMode mode, bool partial) {
    const int L = graph.num_rus();
    const int K = graph.num_ues();
    const int M = est.h.num_antennas();
    CMatrix x = CMatrix::Zero(static_cast<Eigen::Index>(L) * M, K);
    NetworkPrecoding out;

    for (int l = 0; l < L; ++l) {
        const auto& users = graph.served(l);
        if (users.empty()) continue;
        CMatrix h(M, static_cast<Eigen::Index>(users.size()));
        std::vector<double> betas(users.size());
        for (std::size_t i = 0; i < users.size(); ++i) {
            h.col(static_cast<Eigen::Index>(i)) = est.h.block(l, users[i]);
            betas[i] = lsfc.beta(l, users[i]);
        }
        CMatrix u;
        bool use_partial = partial;
        if (!use_partial) {
            try {
                u = lzf_precoder(h);
            } catch (const std::invalid_argument&) {
                use_partial = true;
                ++out.lzf_fallbacks;
            }
        }
        if (use_partial) u = lpzf_precoder(h, users, betas).u;
        const Eigen::VectorXd q = local_power(betas, p_ru, mode);
        for (std::size_t i = 0; i < users.size(); ++i) {
            const auto c = static_cast<Eigen::Index>(i);
            x.block(static_cast<Eigen::Index>(l) * M, users[i], M, 1) = std::sqrt(q(c)) * u.col(c);
        }
    }

    out.u = CMatrix::Zero(x.rows(), K);
    out.q = Eigen::VectorXd::Zero(K);
    for (int k = 0; k < K; ++k) {
        const double p = x.col(k).squaredNorm();
        if (p > 0.0) {
            out.q(k) = p;
            out.u.col(k) = x.col(k) / std::sqrt(p);
        }
    }
    return out;
}

}  // namespace cfsim
