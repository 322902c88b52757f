// SPDX-License-Identifier: Apache-2.0

#include "cfsim/duality.hpp"

#include <cmath>
#include <stdexcept>

namespace cfsim {

NominalCoefficients nominal_coefficients(const CMatrix& v, const EstimateSet& est, const LargeScaleMap& lsfc,
                                         const AssociationGraph& graph) {
    const int K = graph.num_ues();
    if (v.cols() != K || v.rows() != est.h.matrix().rows()) {
        throw std::invalid_argument("nominal_coefficients: receiver matrix has the wrong shape");
    }
    NominalCoefficients c;
    c.active = graph.active_ues();
    c.theta = Eigen::MatrixXd::Zero(K, K);

    // Known overlap: v_k^H h_j summed over the RUs in C_k and C_j.
    const CMatrix x = v.adjoint() * est.h.matrix();

    for (int k : c.active) {
        const auto& ck = graph.cluster(k);
        const double inv_size = 1.0 / static_cast<double>(ck.size());
        for (int j : c.active) {
            if (j == k) {
                c.theta(k, k) = std::norm(x(k, k));
                continue;
            }
            double unknown = 0.0;
            for (int l : ck)
                if (!graph.has_edge(l, j)) unknown += lsfc.beta(l, j);
            // a(k, j) is the UL coupling of UE j into receiver k, i.e. theta~_{j,k}
            c.theta(j, k) = std::norm(x(k, j)) + inv_size * unknown;
        }
    }
    return c;
}

double nominal_ul_sinr(const NominalCoefficients& c, double snr, int k) {
    double interference = 0.0;
    for (int j : c.active)
        if (j != k) interference += c.ul_interference(j, k);
    return c.diag(k) / (1.0 / snr + interference);
}

double nominal_dl_sinr(const NominalCoefficients& c, double snr, const Eigen::VectorXd& q, int k) {
    double interference = 0.0;
    for (int j : c.active)
        if (j != k) interference += c.dl_interference(k, j) * q(j);
    return c.diag(k) * q(k) / (1.0 / snr + interference);
}

Eigen::VectorXd nominal_ul_sinrs(const NominalCoefficients& c, double snr) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(c.theta.rows());
    for (int k : c.active) out(k) = nominal_ul_sinr(c, snr, k);
    return out;
}

PowerAllocation dual_power_allocation(const NominalCoefficients& c, const Eigen::VectorXd& targets, double snr) {
    const auto n = static_cast<Eigen::Index>(c.active.size());
    PowerAllocation out;
    out.snr = snr;
    out.q = Eigen::VectorXd::Zero(c.theta.rows());
    if (n == 0) return out;

    Eigen::VectorXd mu(n);
    Eigen::MatrixXd theta(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const int k = c.active[static_cast<std::size_t>(a)];
        if (!(c.diag(k) > 0.0)) throw std::runtime_error("dual_power_allocation: zero useful gain");
        const double g = targets(k);
        mu(a) = g / ((1.0 + g) * c.diag(k));
        for (Eigen::Index b = 0; b < n; ++b) theta(a, b) = c.theta(k, c.active[static_cast<std::size_t>(b)]);
    }
    Eigen::MatrixXd system = -(mu.asDiagonal() * theta);
    system.diagonal().array() += 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    if (!(lu.rcond() > 1e-14)) throw std::runtime_error("dual_power_allocation: singular system");
    const Eigen::VectorXd rhs = mu / snr;
    Eigen::VectorXd q = lu.solve(rhs);
    q += lu.solve(rhs - system * q);

    for (Eigen::Index a = 0; a < n; ++a) {
        if (!std::isfinite(q(a)) || q(a) < 0.0) throw std::runtime_error("dual_power_allocation: infeasible targets");
        out.q(c.active[static_cast<std::size_t>(a)]) = q(a);
    }
    return out;
}

double virtual_ul_snr(int num_rus, int num_ues, double p_ru, double n0) {
    if (num_ues < 1 || !(n0 > 0.0)) throw std::invalid_argument("virtual_ul_snr: need K >= 1 and n0 > 0");
    return static_cast<double>(num_rus) * p_ru / (static_cast<double>(num_ues) * n0);
}

}  // namespace cfsim
