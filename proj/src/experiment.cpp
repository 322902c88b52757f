// SPDX-License-Identifier: Apache-2.0

#include "cfsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "cfsim/baselines.hpp"
#include "cfsim/duality.hpp"
#include "cfsim/receivers.hpp"

#ifndef CFSIM_VERSION
#define CFSIM_VERSION "0.1.0"
#endif

namespace cfsim {

std::string version_string() { return CFSIM_VERSION; }

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::clzf: return "clzf";
        case Scheme::lmmse_cluster: return "lmmse_cluster";
        case Scheme::lsfd: return "lsfd";
        case Scheme::lzf_epa: return "lzf_epa";
        case Scheme::lzf_ppa: return "lzf_ppa";
        case Scheme::lpzf_epa: return "lpzf_epa";
        case Scheme::lpzf_ppa: return "lpzf_ppa";
    }
    return "clzf";
}

std::string to_string(Direction d) { return d == Direction::ul ? "ul" : "dl"; }

std::vector<Scheme> all_schemes() {
    return {Scheme::clzf, Scheme::lmmse_cluster, Scheme::lsfd, Scheme::lzf_epa,
            Scheme::lzf_ppa, Scheme::lpzf_epa, Scheme::lpzf_ppa};
}

Scheme parse_scheme(const std::string& name) {
    for (Scheme s : all_schemes())
        if (to_string(s) == name) return s;
    if (name == "lmmse") return Scheme::lmmse_cluster;
    throw std::invalid_argument("unknown scheme '" + name +
                                "' (expected clzf|lmmse_cluster|lsfd|lzf_epa|lzf_ppa|lpzf_epa|lpzf_ppa)");
}

std::vector<Direction> directions(Scheme s) {
    switch (s) {
        case Scheme::clzf:
        case Scheme::lmmse_cluster: return {Direction::ul, Direction::dl};
        case Scheme::lsfd: return {Direction::ul};
        default: return {Direction::dl};
    }
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers pulling indices from a
// shared counter. The first exception is rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < n && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

bool wants(const std::vector<Scheme>& schemes, Scheme s) {
    return std::find(schemes.begin(), schemes.end(), s) != schemes.end();
}

bool needs_pilots(const std::vector<Estimator>& estimators) {
    return std::any_of(estimators.begin(), estimators.end(), [](Estimator e) { return e != Estimator::ideal; });
}

// Per-RU DL budget in units of the UE transmit power.
double ru_power_budget(const SimConfig& config, const DerivedConstants& constants) {
    if (config.dl_power_mode == DlPowerMode::balanced) {
        return static_cast<double>(config.num_ues) / static_cast<double>(config.num_rus);
    }
    return dbm_to_mw(config.ru_power_dbm) / dbm_to_mw(constants.p_ue_dbm);
}

double dl_snr(const SimConfig& config, const DerivedConstants& constants) {
    if (config.dl_power_mode == DlPowerMode::balanced) return constants.snr;
    return virtual_ul_snr(config.num_rus, config.num_ues, dbm_to_mw(config.ru_power_dbm), dbm_to_mw(config.noise_dbm));
}

std::vector<char> active_mask(const AssociationGraph& graph) {
    std::vector<char> mask(static_cast<std::size_t>(graph.num_ues()), 0);
    for (int k = 0; k < graph.num_ues(); ++k) mask[static_cast<std::size_t>(k)] = graph.active(k) ? 1 : 0;
    return mask;
}

Eigen::VectorXd dual_dl_sinrs(const CMatrix& v, const EstimateSet& est, const ChannelMatrix& h,
                              const LayoutContext& ctx, double snr, std::span<const char> active) {
    const auto coeffs = nominal_coefficients(v, est, ctx.lsfc, ctx.graph);
    const Eigen::VectorXd targets = nominal_ul_sinrs(coeffs, snr);
    const auto power = dual_power_allocation(coeffs, targets, snr);
    return actual_dl_sinrs(v, power.q, h.matrix(), snr, active);
}

}  // namespace

LayoutContext prepare_layout(const SimConfig& config, const DerivedConstants& constants, int layout_index) {
    const auto idx = static_cast<std::uint64_t>(layout_index);
    LayoutContext ctx;
    ctx.index = layout_index;
    auto placement = stream_for(config.master_seed, {idx, StreamPurpose::placement, 0});
    ctx.layout = place_nodes(config, placement);
    auto link = stream_for(config.master_seed, {idx, StreamPurpose::link_state, 0});
    ctx.lsfc = compute_lsfc(ctx.layout, config, link);
    ctx.supports = build_supports(ctx.layout, config);
    auto order = stream_for(config.master_seed, {idx, StreamPurpose::ue_order, 0});
    ctx.graph = form_clusters(ctx.lsfc, assign_leaders_and_pilots(ctx.lsfc, config, constants.snr, order), config,
                              constants.snr);
    return ctx;
}

LsfdWeightTable estimate_lsfd_weights(const SimConfig& config, const DerivedConstants& constants,
                                      const LayoutContext& ctx, const std::vector<Estimator>& estimators) {
    const auto idx = static_cast<std::uint64_t>(ctx.index);
    const PilotBook pilots(config.pilot_dim, constants.snr);
    std::map<Estimator, LsfdStats> stats;
    for (Estimator e : estimators) stats.emplace(e, LsfdStats(ctx.graph));
    for (int d = 0; d < config.lsfd_stat_draws; ++d) {
        const auto draw = static_cast<std::uint64_t>(d);
        auto fading = stream_for(config.master_seed, {idx, StreamPurpose::lsfd_fading, draw});
        const ChannelMatrix h = draw_channel_matrix(ctx.lsfc, ctx.supports, fading);
        std::vector<CMatrix> field;
        if (needs_pilots(estimators)) {
            auto noise = stream_for(config.master_seed, {idx, StreamPurpose::lsfd_pilot_noise, draw});
            field = synthesize_pilot_field(h, ctx.graph, pilots, &noise);
        }
        for (auto& [e, s] : stats) {
            const EstimateSet est = estimate_from_field(h, field, ctx.graph, ctx.supports, pilots, e);
            s.accumulate(compute_local_lmmse(est, ctx.graph, ctx.lsfc, constants.snr), est, ctx.graph);
        }
    }
    LsfdWeightTable table;
    for (const auto& [e, s] : stats) table.emplace(e, lsfd_weights(s, ctx.graph, constants.snr));
    return table;
}

DrawOutcome evaluate_draw(const SimConfig& config, const DerivedConstants& constants, const LayoutContext& ctx,
                          const std::vector<Scheme>& schemes, const std::vector<Estimator>& estimators, int draw,
                          const LsfdWeightTable* lsfd) {
    const auto idx = static_cast<std::uint64_t>(ctx.index);
    const auto d = static_cast<std::uint64_t>(draw);
    const double snr = constants.snr;
    const double snr_dl = dl_snr(config, constants);
    const double p_ru = ru_power_budget(config, constants);
    const int M = config.antennas_per_ru;
    const auto& graph = ctx.graph;
    const auto active = active_mask(graph);

    auto fading = stream_for(config.master_seed, {idx, StreamPurpose::fading, d});
    const ChannelMatrix h = draw_channel_matrix(ctx.lsfc, ctx.supports, fading);
    const PilotBook pilots(config.pilot_dim, snr);
    std::vector<CMatrix> field;
    if (needs_pilots(estimators)) {
        auto noise = stream_for(config.master_seed, {idx, StreamPurpose::pilot_noise, d});
        field = synthesize_pilot_field(h, graph, pilots, &noise);
    }

    DrawOutcome out;
    for (Estimator e : estimators) {
        const EstimateSet est = estimate_from_field(h, field, graph, ctx.supports, pilots, e);
        const bool local_needed = wants(schemes, Scheme::lmmse_cluster) || wants(schemes, Scheme::lsfd);
        const LocalVectors local = local_needed ? compute_local_lmmse(est, graph, ctx.lsfc, snr) : LocalVectors{};

        for (Scheme s : schemes) {
            const ReportKey ul{s, e, Direction::ul};
            const ReportKey dl{s, e, Direction::dl};
            switch (s) {
                case Scheme::clzf: {
                    const ReceiverSet rx = clzf_receivers(est, graph);
                    out.sinr[ul] = actual_ul_sinrs(rx.v, h.matrix(), snr, active);
                    out.sinr[dl] = dual_dl_sinrs(rx.v, est, h, ctx, snr_dl, active);
                    out.degenerate[ul] = rx.degenerate_count();
                    out.degenerate[dl] = rx.degenerate_count();
                    break;
                }
                case Scheme::lmmse_cluster: {
                    const LmmseReceivers rx = lmmse_cluster_receivers(est, graph, ctx.lsfc, snr);
                    out.sinr[ul] = actual_ul_sinrs(rx.set.v, h.matrix(), snr, active);
                    if (snr_dl == snr) {
                        out.sinr[dl] = dual_dl_sinrs(rx.set.v, est, h, ctx, snr_dl, active);
                    } else {
                        const LmmseReceivers virt = lmmse_cluster_receivers(est, graph, ctx.lsfc, snr_dl);
                        out.sinr[dl] = dual_dl_sinrs(virt.set.v, est, h, ctx, snr_dl, active);
                    }
                    break;
                }
                case Scheme::lsfd: {
                    if (lsfd == nullptr || !lsfd->contains(e)) {
                        throw std::logic_error("evaluate_draw: LSFD weights missing for estimator " + to_string(e));
                    }
                    const ReceiverSet rx = combine_with_weights(local, graph, lsfd->at(e), M);
                    out.sinr[ul] = actual_ul_sinrs(rx.v, h.matrix(), snr, active);
                    break;
                }
                case Scheme::lzf_epa:
                case Scheme::lzf_ppa:
                case Scheme::lpzf_epa:
                case Scheme::lpzf_ppa: {
                    const bool partial = s == Scheme::lpzf_epa || s == Scheme::lpzf_ppa;
                    const auto mode = (s == Scheme::lzf_epa || s == Scheme::lpzf_epa) ? LocalPowerMode::epa
                                                                                       : LocalPowerMode::ppa;
                    const NetworkPrecoding pre = local_zf_precoding(est, graph, ctx.lsfc, p_ru, mode, partial);
                    out.sinr[dl] = actual_dl_sinrs(pre.u, pre.q, h.matrix(), snr, active);
                    out.lzf_fallbacks[dl] = pre.lzf_fallbacks;
                    break;
                }
            }
        }
    }
    return out;
}

PointResult run_point(const SimConfig& config, const std::vector<Scheme>& schemes,
                      const std::vector<Estimator>& estimators, int threads) {
    config.validate();
    if (schemes.empty() || estimators.empty()) throw std::invalid_argument("run_point: empty scheme or estimator list");
    PointResult result;
    result.config = config;
    result.constants = derive_constants(config);
    const int n_layouts = config.num_layouts;
    const int n_draws = config.fading_draws_per_layout;

    std::vector<LayoutContext> layouts(static_cast<std::size_t>(n_layouts));
    parallel_for(n_layouts, threads, [&](int i) {
        layouts[static_cast<std::size_t>(i)] = prepare_layout(config, result.constants, i);
    });

    std::vector<LsfdWeightTable> lsfd(static_cast<std::size_t>(n_layouts));
    if (wants(schemes, Scheme::lsfd)) {
        parallel_for(n_layouts, threads, [&](int i) {
            lsfd[static_cast<std::size_t>(i)] =
                estimate_lsfd_weights(config, result.constants, layouts[static_cast<std::size_t>(i)], estimators);
        });
    }

    std::vector<DrawOutcome> outcomes(static_cast<std::size_t>(n_layouts) * static_cast<std::size_t>(n_draws));
    parallel_for(n_layouts * n_draws, threads, [&](int task) {
        const int i = task / n_draws;
        const int d = task % n_draws;
        outcomes[static_cast<std::size_t>(task)] =
            evaluate_draw(config, result.constants, layouts[static_cast<std::size_t>(i)], schemes, estimators, d,
                          &lsfd[static_cast<std::size_t>(i)]);
    });

    // Reduction in fixed (layout, draw, ue) order.
    std::vector<ReportKey> keys;
    for (Scheme s : schemes)
        for (Estimator e : estimators)
            for (Direction dir : directions(s)) keys.push_back({s, e, dir});
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    for (const auto& key : keys) {
        RateReport& report = result.reports[key];
        for (int i = 0; i < n_layouts; ++i) {
            const auto& graph = layouts[static_cast<std::size_t>(i)].graph;
            std::vector<double> layout_se;
            for (int k = 0; k < graph.num_ues(); ++k) {
                if (graph.outage(k)) {
                    report.outage.emplace_back(i, k);
                    continue;
                }
                std::vector<double> samples(static_cast<std::size_t>(n_draws));
                for (int d = 0; d < n_draws; ++d) {
                    samples[static_cast<std::size_t>(d)] =
                        outcomes[static_cast<std::size_t>(i * n_draws + d)].sinr.at(key)(k);
                }
                UserRate u;
                u.layout = i;
                u.ue = k;
                u.sinr_mean = pairwise_sum(samples) / static_cast<double>(n_draws);
                u.rate = ergodic_rate(samples);
                u.se = spectral_efficiency(u.rate, config.pilot_dim, config.coherence_block);
                layout_se.push_back(u.se);
                report.users.push_back(u);
            }
            report.sum_se.push_back(pairwise_sum(layout_se));
            for (int d = 0; d < n_draws; ++d) {
                const auto& o = outcomes[static_cast<std::size_t>(i * n_draws + d)];
                if (auto it = o.degenerate.find(key); it != o.degenerate.end()) report.degenerate += it->second;
                if (auto it = o.lzf_fallbacks.find(key); it != o.lzf_fallbacks.end()) report.lzf_fallbacks += it->second;
            }
        }
    }
    for (const auto& ctx : layouts) result.substituted_supports += ctx.supports.substituted();
    return result;
}

ExperimentPlan default_plan(const SimConfig& base) {
    ExperimentPlan plan;
    plan.base = base;
    plan.pilot_dims = {base.pilot_dim};
    plan.ue_counts = {base.num_ues};
    plan.ru_arrays = {{base.num_rus, base.antennas_per_ru}};
    plan.schemes = {Scheme::lmmse_cluster, Scheme::lzf_ppa};
    plan.estimators = {Estimator::subspace_projection};
    return plan;
}

ExperimentPlan preset_plan(const std::string& name, const SimConfig& base) {
    ExperimentPlan plan = default_plan(base);
    if (name == "fig1" || name == "fig2" || name == "fig3") {
        const std::pair<int, int> arr = name == "fig1" ? std::pair{10, 64} : name == "fig2" ? std::pair{20, 32}
                                                                                          : std::pair{40, 16};
        plan.ru_arrays = {arr};
        plan.antenna_budget = 640;
        plan.ue_counts = {50, 100, 200};
        plan.pilot_dims = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
        plan.schemes = {Scheme::lmmse_cluster, Scheme::lzf_ppa};
        return plan;
    }
    if (name == "fig4") {
        plan.ru_arrays = {{10, 64}};
        plan.ue_counts = {100};
        plan.pilot_dims = {40};
        plan.schemes = {Scheme::clzf, Scheme::lmmse_cluster};
        return plan;
    }
    throw std::invalid_argument("unknown preset '" + name + "' (expected fig1|fig2|fig3|fig4)");
}

std::vector<SimConfig> expand_plan(const ExperimentPlan& plan) {
    std::vector<std::pair<int, int>> arrays = plan.ru_arrays;
    if (arrays.empty()) arrays = {{plan.base.num_rus, plan.base.antennas_per_ru}};
    std::vector<int> ks = plan.ue_counts.empty() ? std::vector<int>{plan.base.num_ues} : plan.ue_counts;
    std::vector<int> taus = plan.pilot_dims.empty() ? std::vector<int>{plan.base.pilot_dim} : plan.pilot_dims;
    std::vector<SimConfig> out;
    for (const auto& [l, m] : arrays) {
        for (int k : ks) {
            for (int t : taus) {
                SimConfig c = plan.base;
                c.num_rus = l;
                c.antennas_per_ru = m;
                c.num_ues = k;
                c.pilot_dim = t;
                out.push_back(c);
            }
        }
    }
    return out;
}

std::vector<Diagnostic> validate_plan(const ExperimentPlan& plan) {
    std::vector<Diagnostic> out;
    if (plan.schemes.empty()) out.push_back({"schemes", "empty scheme list"});
    if (plan.estimators.empty()) out.push_back({"estimators", "empty estimator list"});
    if (plan.threads < 1) out.push_back({"threads", "parallelism must be at least 1"});
    if (plan.output_dir.empty()) out.push_back({"output_dir", "empty output directory"});
    if (plan.antenna_budget) {
        for (const auto& [l, m] : plan.ru_arrays) {
            if (l * m != *plan.antenna_budget) {
                out.push_back({"ru_arrays", std::to_string(l) + "x" + std::to_string(m) + " breaks the antenna budget " +
                                                std::to_string(*plan.antenna_budget)});
            }
        }
    }
    const auto points = expand_plan(plan);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (const auto& msg : points[i].diagnostics()) out.push_back({"point " + std::to_string(i), msg});
    }
    return out;
}

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

void write_header(std::ostream& out, const SimConfig& config, const DerivedConstants& constants) {
    out << "# cfsim " << version_string() << '\n';
    for (const auto& [k, v] : config_entries(config)) out << "# " << k << " = " << v << '\n';
    out << "# snr = " << fmt(constants.snr) << '\n';
    out << "# p_ue_dbm = " << fmt(constants.p_ue_dbm) << '\n';
    out << "# dl_ru_power = " << fmt(ru_power_budget(config, constants)) << " (units of UE power)\n";
    out << "# dl_snr = " << fmt(dl_snr(config, constants)) << '\n';
}

double to_db(double x) { return x > 0.0 ? 10.0 * std::log10(x) : -INFINITY; }

}  // namespace

void write_point_csv(std::ostream& out, const PointResult& point) {
    write_header(out, point.config, point.constants);
    out << "layout_id,ue_id,direction,scheme,estimator,sinr_mean_db,rate,se\n";
    for (const auto& [key, report] : point.reports) {
        for (const auto& u : report.users) {
            out << u.layout << ',' << u.ue << ',' << to_string(key.direction) << ',' << to_string(key.scheme) << ','
                << to_string(key.estimator) << ',' << fmt(to_db(u.sinr_mean)) << ',' << fmt(u.rate) << ',' << fmt(u.se)
                << '\n';
        }
    }
}

void write_sum_se_csv(std::ostream& out, const std::vector<PointResult>& points) {
    out << "# cfsim " << version_string() << '\n';
    out << "point,num_rus,antennas_per_ru,num_ues,pilot_dim,direction,scheme,estimator,mean_sum_se,layouts,"
           "outage_users\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        for (const auto& [key, report] : p.reports) {
            out << i << ',' << p.config.num_rus << ',' << p.config.antennas_per_ru << ',' << p.config.num_ues << ','
                << p.config.pilot_dim << ',' << to_string(key.direction) << ',' << to_string(key.scheme) << ','
                << to_string(key.estimator) << ',' << fmt(report.mean_sum_se()) << ',' << report.sum_se.size() << ','
                << report.outage.size() << '\n';
        }
    }
}

std::string summary_json(const ExperimentPlan& plan, const std::vector<PointResult>& points) {
    using nlohmann::json;
    json root;
    root["version"] = version_string();
    json base;
    for (const auto& [k, v] : config_entries(plan.base)) base[k] = v;
    root["base_config"] = base;
    json schemes = json::array();
    for (Scheme s : plan.schemes) schemes.push_back(to_string(s));
    root["schemes"] = schemes;
    json estimators = json::array();
    for (Estimator e : plan.estimators) estimators.push_back(to_string(e));
    root["estimators"] = estimators;

    const std::vector<double> probs = {0.05, 0.1, 0.5, 0.9, 0.95};
    auto percentiles = [&](const std::vector<double>& v) {
        json p;
        if (v.empty()) return p;
        for (double pr : probs) p["p" + std::to_string(static_cast<int>(std::lround(pr * 100)))] = quantile(v, pr);
        return p;
    };

    json jpoints = json::array();
    for (const auto& p : points) {
        json jp;
        json cfg;
        for (const auto& [k, v] : config_entries(p.config)) cfg[k] = v;
        jp["config"] = cfg;
        jp["snr"] = p.constants.snr;
        jp["p_ue_dbm"] = p.constants.p_ue_dbm;
        jp["dl_ru_power"] = ru_power_budget(p.config, p.constants);
        jp["dl_snr"] = dl_snr(p.config, p.constants);
        jp["substituted_supports"] = p.substituted_supports;
        json results = json::array();
        for (const auto& [key, report] : p.reports) {
            json r;
            r["scheme"] = to_string(key.scheme);
            r["estimator"] = to_string(key.estimator);
            r["direction"] = to_string(key.direction);
            r["mean_sum_se"] = report.mean_sum_se();
            r["sum_se_per_layout"] = report.sum_se;
            r["served_users"] = report.users.size();
            r["outage_users"] = report.outage.size();
            r["degenerate_clzf"] = report.degenerate;
            r["lzf_fallbacks"] = report.lzf_fallbacks;
            r["rate_percentiles_served"] = percentiles(report.rates());
            r["rate_percentiles_with_outage"] = percentiles(report.rates_with_outage());
            results.push_back(r);
        }
        jp["results"] = results;
        jpoints.push_back(jp);
    }
    root["points"] = jpoints;
    return root.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    const auto diags = validate_plan(plan);
    if (!diags.empty()) throw std::invalid_argument(diags.front().field + ": " + diags.front().message);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(plan.output_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + plan.output_dir + "': " + ec.message());

    ExperimentResult result;
    auto open = [&](const std::string& name) {
        const std::string path = (fs::path(plan.output_dir) / name).string();
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + path + "'");
        result.files.push_back(path);
        return f;
    };

    const auto configs = expand_plan(plan);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        result.points.push_back(run_point(configs[i], plan.schemes, plan.estimators, plan.threads));
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu.csv", i);
        auto f = open(name);
        write_point_csv(f, result.points.back());
        if (!f) throw std::runtime_error("write failed for " + std::string(name));
    }
    {
        auto f = open("sum_se.csv");
        write_sum_se_csv(f, result.points);
    }
    {
        auto f = open("summary.json");
        f << summary_json(plan, result.points);
    }
    return result;
}

}  // namespace cfsim
