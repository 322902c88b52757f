// SPDX-License-Identifier: Apache-2.0

#include "cfsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfsim {

namespace {

bool is_active(std::span<const char> active, Eigen::Index j) {
    return active.empty() || active[static_cast<std::size_t>(j)] != 0;
}

}  // namespace

double actual_ul_sinr(const CVector& v, const CMatrix& h, double snr, int k, std::span<const char> active) {
    const Eigen::RowVectorXcd g = v.adjoint() * h;
    double interference = 0.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j)
        if (j != k && is_active(active, j)) interference += std::norm(g(j));
    return std::norm(g(k)) / (1.0 / snr + interference);
}

double actual_dl_sinr(const CMatrix& u, const Eigen::VectorXd& q, const CMatrix& h, double snr, int k) {
    // |h_k^H u_j|^2 for every precoder j
    const Eigen::RowVectorXcd g = h.col(k).adjoint() * u;
    double interference = 0.0;
    for (Eigen::Index j = 0; j < u.cols(); ++j)
        if (j != k) interference += std::norm(g(j)) * q(j);
    return std::norm(g(k)) * q(k) / (1.0 / snr + interference);
}

Eigen::VectorXd actual_ul_sinrs(const CMatrix& v, const CMatrix& h, double snr, std::span<const char> active) {
    const Eigen::Index K = h.cols();
    const Eigen::MatrixXd g = (v.adjoint() * h).cwiseAbs2();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        if (!is_active(active, k)) continue;
        double interference = 0.0;
        for (Eigen::Index j = 0; j < K; ++j)
            if (j != k && is_active(active, j)) interference += g(k, j);
        out(k) = g(k, k) / (1.0 / snr + interference);
    }
    return out;
}

Eigen::VectorXd actual_dl_sinrs(const CMatrix& u, const Eigen::VectorXd& q, const CMatrix& h, double snr,
                                std::span<const char> active) {
    const Eigen::Index K = h.cols();
    // g(j, k) = |u_j^H h_k|^2 = |h_k^H u_j|^2
    const Eigen::MatrixXd g = (u.adjoint() * h).cwiseAbs2();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        if (!is_active(active, k)) continue;
        double interference = 0.0;
        for (Eigen::Index j = 0; j < K; ++j)
            if (j != k && is_active(active, j)) interference += g(j, k) * q(j);
        out(k) = g(k, k) * q(k) / (1.0 / snr + interference);
    }
    return out;
}

double ergodic_rate(std::span<const double> sinr_draws) {
    if (sinr_draws.empty()) return 0.0;
    std::vector<double> r(sinr_draws.size());
    std::transform(sinr_draws.begin(), sinr_draws.end(), r.begin(), [](double s) { return std::log2(1.0 + s); });
    return pairwise_sum(r) / static_cast<double>(r.size());
}

double spectral_efficiency(double rate, int pilot_dim, int coherence_block) {
    if (coherence_block <= 0) throw std::invalid_argument("spectral_efficiency: coherence block must be positive");
    return (1.0 - static_cast<double>(pilot_dim) / coherence_block) * rate;
}

std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> values) {
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    std::vector<std::pair<double, double>> cdf;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i + 1 < x.size() && x[i + 1] == x[i]) continue;
        cdf.emplace_back(x[i], static_cast<double>(i + 1) / n);
    }
    return cdf;
}

double cdf_at(std::span<const std::pair<double, double>> cdf, double x) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), x, [](double v, const auto& p) { return v < p.first; });
    if (it == cdf.begin()) return 0.0;
    return std::prev(it)->second;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    const auto fa = empirical_cdf(a);
    const auto fb = empirical_cdf(b);
    double d = 0.0;
    for (const auto& p : fa) d = std::max(d, std::abs(p.second - cdf_at(fb, p.first)));
    for (const auto& p : fb) d = std::max(d, std::abs(cdf_at(fa, p.first) - p.second));
    return d;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<double> RateReport::rates() const {
    std::vector<double> out;
    out.reserve(users.size());
    for (const auto& u : users) out.push_back(u.rate);
    return out;
}

std::vector<double> RateReport::rates_with_outage() const {
    auto out = rates();
    out.insert(out.end(), outage.size(), 0.0);
    return out;
}

double RateReport::mean_sum_se() const {
    if (sum_se.empty()) return 0.0;
    return pairwise_sum(sum_se) / static_cast<double>(sum_se.size());
}

}  // namespace cfsim
