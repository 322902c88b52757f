// SPDX-License-Identifier: Apache-2.0
//
// Node placement on a square torus and large-scale fading coefficients from
// the urban-microcell street-canyon pathloss model.

#ifndef CFSIM_GEOMETRY_HPP
#define CFSIM_GEOMETRY_HPP

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "cfsim/scenario.hpp"

namespace cfsim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct NetworkLayout {
    std::vector<Point> rus;
    std::vector<Point> ues;
    double area_side = 0.0;

    int num_rus() const { return static_cast<int>(rus.size()); }
    int num_ues() const { return static_cast<int>(ues.size()); }
};

NetworkLayout place_nodes(const SimConfig& config, RngStream& rng);

/// Shortest signed displacement from `from` to `to` on the torus; each
/// component lies in [-side/2, side/2].
Point torus_displacement(Point from, Point to, double side);
double torus_distance(Point a, Point b, double side);
double torus_distance(const NetworkLayout& layout, int ru, int ue);
/// RU -> UE bearing in radians, (-pi, pi], using the wrapped displacement.
double torus_bearing(const NetworkLayout& layout, int ru, int ue);

double distance_3d(double d2d, const UmiParams& umi);

double umi_los_probability(double d2d);
double umi_los_pathloss_db(double d3d, const UmiParams& umi);
double umi_nlos_pathloss_db(double d3d, const UmiParams& umi);

/// E[beta] at planar distance d2d: LOS/NLOS mixture weighted by the LOS
/// probability, with the lognormal mean factor exp((sigma ln10 / 10)^2 / 2)
/// applied when shadowing is enabled. Honors a forced LOS mode.
double expected_lsfc(double d2d, const UmiParams& umi);

struct LargeScaleMap {
    Eigen::MatrixXd beta;                               // L x K, linear
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> los;
    Eigen::MatrixXd shadow_db;

    int num_rus() const { return static_cast<int>(beta.rows()); }
    int num_ues() const { return static_cast<int>(beta.cols()); }
};

/// Per-link draw of LOS state, pathloss at 3-D distance and shadowing.
/// Links are visited ue-major (k outer, l inner) for a fixed draw order.
LargeScaleMap compute_lsfc(const NetworkLayout& layout, const SimConfig& config, RngStream& rng);

// CSV fixture format: node_class,index,x,y with node_class in {ru, ue}.
void write_layout_csv(std::ostream& out, const NetworkLayout& layout);
NetworkLayout read_layout_csv(std::istream& in, double area_side);

}  // namespace cfsim

#endif
