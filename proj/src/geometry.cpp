// SPDX-License-Identifier: Apache-2.0

#include "cfsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cfsim {

namespace {

double wrap_component(double d, double side) {
    d = std::fmod(d, side);
    if (d > 0.5 * side) d -= side;
    if (d < -0.5 * side) d += side;
    return d;
}

// Lognormal mean factor E[10^(X/10)], X ~ N(0, sigma^2) in dB.
double lognormal_mean(double sigma_db) {
    const double s = sigma_db * std::log(10.0) / 10.0;
    return std::exp(0.5 * s * s);
}

}  // namespace

NetworkLayout place_nodes(const SimConfig& config, RngStream& rng) {
    NetworkLayout layout;
    layout.area_side = config.area_side;
    layout.rus.reserve(config.num_rus);
    layout.ues.reserve(config.num_ues);
    for (int l = 0; l < config.num_rus; ++l) {
        const double x = rng.uniform(0.0, config.area_side);
        const double y = rng.uniform(0.0, config.area_side);
        layout.rus.push_back({x, y});
    }
    for (int k = 0; k < config.num_ues; ++k) {
        const double x = rng.uniform(0.0, config.area_side);
        const double y = rng.uniform(0.0, config.area_side);
        layout.ues.push_back({x, y});
    }
    return layout;
}

Point torus_displacement(Point from, Point to, double side) {
    return {wrap_component(to.x - from.x, side), wrap_component(to.y - from.y, side)};
}

double torus_distance(Point a, Point b, double side) {
    const Point d = torus_displacement(a, b, side);
    return std::hypot(d.x, d.y);
}

double torus_distance(const NetworkLayout& layout, int ru, int ue) {
    return torus_distance(layout.rus.at(ru), layout.ues.at(ue), layout.area_side);
}

double torus_bearing(const NetworkLayout& layout, int ru, int ue) {
    const Point d = torus_displacement(layout.rus.at(ru), layout.ues.at(ue), layout.area_side);
    return std::atan2(d.y, d.x);
}

double distance_3d(double d2d, const UmiParams& umi) {
    const double dh = umi.ru_height - umi.ue_height;
    return std::sqrt(d2d * d2d + dh * dh);
}

double umi_los_probability(double d2d) {
    if (d2d <= 18.0) return 1.0;
    return 18.0 / d2d * (1.0 - std::exp(-d2d / 36.0)) + std::exp(-d2d / 36.0);
}

double umi_los_pathloss_db(double d3d, const UmiParams& umi) {
    if (!(d3d > 0.0)) throw std::invalid_argument("umi_los_pathloss_db: zero 3-D distance");
    return 32.4 + 21.0 * std::log10(d3d) + 20.0 * std::log10(umi.carrier_freq_ghz);
}

double umi_nlos_pathloss_db(double d3d, const UmiParams& umi) {
    const double nlos = 35.3 * std::log10(d3d) + 22.4 + 21.3 * std::log10(umi.carrier_freq_ghz) -
                        0.3 * (umi.ue_height - 1.5);
    return std::max(umi_los_pathloss_db(d3d, umi), nlos);
}

double expected_lsfc(double d2d, const UmiParams& umi) {
    const double d3d = distance_3d(d2d, umi);
    double p_los = umi_los_probability(d2d);
    if (umi.los_mode == LosMode::always_los) p_los = 1.0;
    if (umi.los_mode == LosMode::always_nlos) p_los = 0.0;
    const double g_los = std::pow(10.0, -umi_los_pathloss_db(d3d, umi) / 10.0) *
                         (umi.shadowing ? lognormal_mean(umi.shadow_sigma_los_db) : 1.0);
    const double g_nlos = std::pow(10.0, -umi_nlos_pathloss_db(d3d, umi) / 10.0) *
                          (umi.shadowing ? lognormal_mean(umi.shadow_sigma_nlos_db) : 1.0);
    return p_los * g_los + (1.0 - p_los) * g_nlos;
}

LargeScaleMap compute_lsfc(const NetworkLayout& layout, const SimConfig& config, RngStream& rng) {
    const int L = layout.num_rus();
    const int K = layout.num_ues();
    const UmiParams& umi = config.umi;
    LargeScaleMap map;
    map.beta.resize(L, K);
    map.los.resize(L, K);
    map.shadow_db.resize(L, K);
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            const double d2d = torus_distance(layout, l, k);
            const double d3d = distance_3d(d2d, umi);
            if (!(d3d > 0.0)) throw std::invalid_argument("compute_lsfc: zero 3-D distance");
            bool los = false;
            switch (umi.los_mode) {
                case LosMode::stochastic: los = rng.uniform() < umi_los_probability(d2d); break;
                case LosMode::always_los: los = true; break;
                case LosMode::always_nlos: los = false; break;
            }
            const double sigma = los ? umi.shadow_sigma_los_db : umi.shadow_sigma_nlos_db;
            const double shadow = umi.shadowing ? sigma * rng.normal() : 0.0;
            const double pl = los ? umi_los_pathloss_db(d3d, umi) : umi_nlos_pathloss_db(d3d, umi);
            map.los(l, k) = los;
            map.shadow_db(l, k) = shadow;
            map.beta(l, k) = std::pow(10.0, (shadow - pl) / 10.0);
        }
    }
    return map;
}

void write_layout_csv(std::ostream& out, const NetworkLayout& layout) {
    out << "node_class,index,x,y\n";
    out.precision(17);
    for (int l = 0; l < layout.num_rus(); ++l) out << "ru," << l << ',' << layout.rus[l].x << ',' << layout.rus[l].y << '\n';
    for (int k = 0; k < layout.num_ues(); ++k) out << "ue," << k << ',' << layout.ues[k].x << ',' << layout.ues[k].y << '\n';
}

NetworkLayout read_layout_csv(std::istream& in, double area_side) {
    NetworkLayout layout;
    layout.area_side = area_side;
    std::string line;
    if (!std::getline(in, line) || line.rfind("node_class", 0) != 0) {
        throw std::invalid_argument("layout csv: missing header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cls, idx, xs, ys;
        if (!std::getline(row, cls, ',') || !std::getline(row, idx, ',') || !std::getline(row, xs, ',') ||
            !std::getline(row, ys)) {
            throw std::invalid_argument("layout csv: malformed row '" + line + "'");
        }
        auto& target = cls == "ru" ? layout.rus : layout.ues;
        if (cls != "ru" && cls != "ue") throw std::invalid_argument("layout csv: unknown node class '" + cls + "'");
        const auto i = static_cast<std::size_t>(std::stoul(idx));
        if (i != target.size()) throw std::invalid_argument("layout csv: indices must be consecutive");
        target.push_back({std::stod(xs), std::stod(ys)});
    }
    return layout;
}

}  // namespace cfsim
