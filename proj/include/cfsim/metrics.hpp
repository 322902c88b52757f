// SPDX-License-Identifier: Apache-2.0
//
// Exact SINRs against the true channel, optimistic ergodic rates, spectral
// efficiency and distribution summaries.

#ifndef CFSIM_METRICS_HPP
#define CFSIM_METRICS_HPP

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cfsim/types.hpp"

namespace cfsim {

/// |v_k^H h_k|^2 / (1/snr + sum_{j != k, active} |v_k^H h_j|^2).
/// `active` (length K, may be empty for all-active) masks non-transmitting UEs.
double actual_ul_sinr(const CVector& v, const CMatrix& h, double snr, int k, std::span<const char> active = {});
/// |h_k^H u_k|^2 q_k / (1/snr + sum_{j != k} |h_k^H u_j|^2 q_j).
double actual_dl_sinr(const CMatrix& u, const Eigen::VectorXd& q, const CMatrix& h, double snr, int k);

/// All-user versions sharing one K x K cross-gain product.
Eigen::VectorXd actual_ul_sinrs(const CMatrix& v, const CMatrix& h, double snr, std::span<const char> active);
Eigen::VectorXd actual_dl_sinrs(const CMatrix& u, const Eigen::VectorXd& q, const CMatrix& h, double snr,
                                std::span<const char> active);

/// Mean of log2(1 + sinr) over the draws.
double ergodic_rate(std::span<const double> sinr_draws);
double spectral_efficiency(double rate, int pilot_dim, int coherence_block);

/// Right-continuous empirical CDF: (x_i, i/n) for sorted distinct x_i.
std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> values);
double cdf_at(std::span<const std::pair<double, double>> cdf, double x);
/// sup_x |F_a(x) - F_b(x)|.
double ks_distance(std::span<const double> a, std::span<const double> b);
/// Linear-interpolated quantile, p in [0, 1].
double quantile(std::vector<double> values, double p);

/// Pairwise (cascade) summation, order-deterministic.
double pairwise_sum(std::span<const double> values);

struct UserRate {
    int layout = 0;
    int ue = 0;
    double sinr_mean = 0.0;  // linear, mean over draws
    double rate = 0.0;       // optimistic ergodic rate, bit/channel use
    double se = 0.0;         // (1 - tau_p / T) rate
};

/// Per-user results of one (scheme, estimator, direction) over all layouts.
struct RateReport {
    std::vector<UserRate> users;                  // served UEs only
    std::vector<std::pair<int, int>> outage;      // (layout, ue)
    std::vector<double> sum_se;                   // per layout
    long degenerate = 0;                          // CLZF MRC fallbacks, summed over draws
    long lzf_fallbacks = 0;                       // RU-draws where LZF fell back to LPZF

    std::vector<double> rates() const;
    /// Rates with outage users included at 0.
    std::vector<double> rates_with_outage() const;
    double mean_sum_se() const;
};

}  // namespace cfsim

#endif
