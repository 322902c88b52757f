// SPDX-License-Identifier: Apache-2.0
//
// cfsim command line: run sweeps, validate plans, dump layout fixtures.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfsim/association.hpp"
#include "cfsim/experiment.hpp"
#include "cfsim/geometry.hpp"
#include "cfsim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;

struct PlanArgs {
    std::string config_file;
    std::string preset;
    std::map<std::string, std::string> overrides;
    std::vector<int> tau_list;
    std::vector<int> k_list;
    std::vector<std::string> lm_list;
    std::vector<std::string> schemes;
    std::vector<std::string> estimators;
    std::string out_dir = "results";
    int threads = 1;
    int antenna_budget = 0;
};

void add_plan_options(CLI::App& app, PlanArgs& args) {
    app.add_option("--config", args.config_file, "Flat key = value config file");
    app.add_option("--preset", args.preset, "Sweep preset: fig1|fig2|fig3|fig4");
    for (const auto& key : cfsim::config_keys()) {
        app.add_option_function<std::string>(
            "--" + key, [&args, key](const std::string& v) { args.overrides[key] = v; },
            "Override config key " + key);
    }
    app.add_option("--tau-p-list", args.tau_list, "Pilot dimensions to sweep")->delimiter(',');
    app.add_option("--k-list", args.k_list, "UE counts to sweep")->delimiter(',');
    app.add_option("--lm-list", args.lm_list, "(L, M) pairs to sweep, e.g. 10x64,20x32")->delimiter(',');
    app.add_option("--antenna-budget", args.antenna_budget, "Required L*M for every (L, M) pair");
    app.add_option("--schemes", args.schemes, "clzf,lmmse_cluster,lsfd,lzf_epa,lzf_ppa,lpzf_epa,lpzf_ppa")
        ->delimiter(',');
    app.add_option("--estimators", args.estimators, "ideal,pm,sp")->delimiter(',');
    app.add_option("--out", args.out_dir, "Output directory");
    app.add_option("--threads", args.threads, "Worker threads");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

cfsim::SimConfig build_config(const PlanArgs& args) {
    cfsim::SimConfig config;
    if (!args.config_file.empty()) config = cfsim::parse_config_text(read_file(args.config_file));
    for (const auto& [k, v] : args.overrides) cfsim::apply_config_entry(config, k, v);
    return config;
}

cfsim::ExperimentPlan build_plan(const PlanArgs& args) {
    const cfsim::SimConfig base = build_config(args);
    cfsim::ExperimentPlan plan = args.preset.empty() ? cfsim::default_plan(base) : cfsim::preset_plan(args.preset, base);
    if (!args.tau_list.empty()) plan.pilot_dims = args.tau_list;
    if (!args.k_list.empty()) plan.ue_counts = args.k_list;
    if (!args.lm_list.empty()) {
        plan.ru_arrays.clear();
        for (const auto& s : args.lm_list) {
            const auto x = s.find('x');
            if (x == std::string::npos) throw std::invalid_argument("--lm-list entry '" + s + "' is not LxM");
            plan.ru_arrays.emplace_back(std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1)));
        }
    }
    if (args.antenna_budget > 0) plan.antenna_budget = args.antenna_budget;
    if (!args.schemes.empty()) {
        plan.schemes.clear();
        for (const auto& s : args.schemes) plan.schemes.push_back(cfsim::parse_scheme(s));
    }
    if (!args.estimators.empty()) {
        plan.estimators.clear();
        for (const auto& e : args.estimators) plan.estimators.push_back(cfsim::parse_estimator(e));
    }
    plan.output_dir = args.out_dir;
    plan.threads = args.threads;
    return plan;
}

int report_diagnostics(const std::vector<cfsim::Diagnostic>& diags) {
    for (const auto& d : diags) std::cerr << "invalid: " << d.field << ": " << d.message << '\n';
    return diags.empty() ? kExitOk : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cell-free massive MIMO simulator with user-centric clusters"};
    app.set_version_flag("--version", cfsim::version_string());
    app.require_subcommand(1);

    PlanArgs run_args;
    auto* run = app.add_subcommand("run", "Run a sweep and write CSV/JSON results");
    add_plan_options(*run, run_args);

    PlanArgs validate_args;
    auto* validate = app.add_subcommand("validate", "Check a plan without running it");
    add_plan_options(*validate, validate_args);

    PlanArgs dump_args;
    int dump_layout = 0;
    std::string graph_path;
    auto* dump = app.add_subcommand("dump-layout", "Write one layout (and optionally its cluster graph) as CSV");
    add_plan_options(*dump, dump_args);
    dump->add_option("--layout", dump_layout, "Layout index")->check(CLI::NonNegativeNumber);
    dump->add_option("--graph", graph_path, "Also write the association edge list here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (run->parsed()) {
            const auto plan = build_plan(run_args);
            if (const int rc = report_diagnostics(cfsim::validate_plan(plan)); rc != kExitOk) return rc;
            const auto result = cfsim::run_experiment(plan);
            for (const auto& f : result.files) std::cout << f << '\n';
            return kExitOk;
        }
        if (validate->parsed()) {
            const auto plan = build_plan(validate_args);
            const int rc = report_diagnostics(cfsim::validate_plan(plan));
            if (rc == kExitOk) std::cout << "ok: " << cfsim::expand_plan(plan).size() << " sweep point(s)\n";
            return rc;
        }
        if (dump->parsed()) {
            const auto config = build_config(dump_args);
            const auto diags = config.diagnostics();
            if (!diags.empty()) {
                for (const auto& d : diags) std::cerr << "invalid: " << d << '\n';
                return kExitInvalid;
            }
            const auto ctx = cfsim::prepare_layout(config, cfsim::derive_constants(config), dump_layout);
            if (dump_args.out_dir == "results") {
                cfsim::write_layout_csv(std::cout, ctx.layout);
            } else {
                std::ofstream f(dump_args.out_dir);
                if (!f) throw std::runtime_error("cannot write '" + dump_args.out_dir + "'");
                cfsim::write_layout_csv(f, ctx.layout);
            }
            if (!graph_path.empty()) {
                std::ofstream g(graph_path);
                if (!g) throw std::runtime_error("cannot write '" + graph_path + "'");
                cfsim::write_graph_csv(g, ctx.graph);
            }
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
