// SPDX-License-Identifier: Apache-2.0
//
// End-to-end Monte Carlo driver: layouts, cluster formation, fading draws,
// receivers/precoders per scheme and estimator, and the CSV/JSON reports.

#ifndef CFSIM_EXPERIMENT_HPP
#define CFSIM_EXPERIMENT_HPP

#include <compare>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfsim/association.hpp"
#include "cfsim/channel.hpp"
#include "cfsim/csi.hpp"
#include "cfsim/geometry.hpp"
#include "cfsim/metrics.hpp"
#include "cfsim/scenario.hpp"

namespace cfsim {

enum class Scheme { clzf, lmmse_cluster, lsfd, lzf_epa, lzf_ppa, lpzf_epa, lpzf_ppa };
enum class Direction { ul, dl };

std::string to_string(Scheme s);
std::string to_string(Direction d);
Scheme parse_scheme(const std::string& name);
std::vector<Scheme> all_schemes();
/// Directions a scheme produces: receivers give UL (and DL through duality),
/// LSFD is UL only, the local ZF family is DL only.
std::vector<Direction> directions(Scheme s);

struct ReportKey {
    Scheme scheme;
    Estimator estimator;
    Direction direction;
    auto operator<=>(const ReportKey&) const = default;
};

/// Everything that is fixed for one layout: geometry, LSFCs, supports and
/// the association graph.
struct LayoutContext {
    int index = 0;
    NetworkLayout layout;
    LargeScaleMap lsfc;
    SupportMap supports;
    AssociationGraph graph;
};

LayoutContext prepare_layout(const SimConfig& config, const DerivedConstants& constants, int layout_index);

/// Per-user exact SINRs of one fading draw for every requested combination.
struct DrawOutcome {
    std::map<ReportKey, Eigen::VectorXd> sinr;
    std::map<ReportKey, long> degenerate;
    std::map<ReportKey, long> lzf_fallbacks;
};

/// LSFD weights per estimator, indexed by UE.
using LsfdWeightTable = std::map<Estimator, std::vector<CVector>>;

LsfdWeightTable estimate_lsfd_weights(const SimConfig& config, const DerivedConstants& constants,
                                      const LayoutContext& ctx, const std::vector<Estimator>& estimators);

DrawOutcome evaluate_draw(const SimConfig& config, const DerivedConstants& constants, const LayoutContext& ctx,
                          const std::vector<Scheme>& schemes, const std::vector<Estimator>& estimators, int draw,
                          const LsfdWeightTable* lsfd);

struct PointResult {
    SimConfig config;
    DerivedConstants constants;
    std::map<ReportKey, RateReport> reports;
    long substituted_supports = 0;
};

/// Runs one sweep point over all layouts and draws on `threads` workers.
/// Results do not depend on the worker count.
PointResult run_point(const SimConfig& config, const std::vector<Scheme>& schemes,
                      const std::vector<Estimator>& estimators, int threads = 1);

struct ExperimentPlan {
    SimConfig base;
    std::vector<int> pilot_dims;                 // tau_p sweep
    std::vector<int> ue_counts;                  // K sweep
    std::vector<std::pair<int, int>> ru_arrays;  // (L, M) pairs
    std::vector<Scheme> schemes;
    std::vector<Estimator> estimators;
    std::string output_dir = "results";
    int threads = 1;
    std::optional<int> antenna_budget;           // required L*M when set
};

/// Single-point plan taking every axis from the base config.
ExperimentPlan default_plan(const SimConfig& base);
/// Sweep presets: "fig1" (L=10, M=64), "fig2" (20, 32),
/// "fig3" (40, 16), "fig4" (per-user rate distribution, K=100, tau_p=40).
ExperimentPlan preset_plan(const std::string& name, const SimConfig& base);

struct Diagnostic {
    std::string field;
    std::string message;
};

std::vector<Diagnostic> validate_plan(const ExperimentPlan& plan);
std::vector<SimConfig> expand_plan(const ExperimentPlan& plan);

struct ExperimentResult {
    std::vector<PointResult> points;
    std::vector<std::string> files;
};

/// Validates, runs every sweep point and writes point_NNN.csv files, a
/// sum_se.csv table and summary.json into plan.output_dir. Throws
/// std::invalid_argument on an invalid plan and std::runtime_error on I/O.
ExperimentResult run_experiment(const ExperimentPlan& plan);

void write_point_csv(std::ostream& out, const PointResult& point);
void write_sum_se_csv(std::ostream& out, const std::vector<PointResult>& points);
std::string summary_json(const ExperimentPlan& plan, const std::vector<PointResult>& points);

std::string version_string();

}  // namespace cfsim

#endif
