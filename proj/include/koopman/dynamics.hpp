#pragma once

#include "koopman/types.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace koopman {

// Time-invariant vector field xdot = rhs(x) on R^dim.
struct VectorField {
    std::string name;
    int dim = 0;
    std::function<Vec(const Vec&)> rhs;
    std::map<std::string, double> params;
};

struct Trajectory {
    Mat states;  // (n_steps + 1) rows, one state per row
    double dt = 0.0;
    Vec initial_condition;

    std::int64_t length() const { return states.rows(); }
    int dim() const { return static_cast<int>(states.cols()); }
};

// Paired predecessor/successor states; row i of x_fw is the sample that
// follows row i of x_pr inside its source trajectory.
struct SnapshotSet {
    Mat x_pr;
    Mat x_fw;
    double dt = 0.0;

    std::int64_t size() const { return x_pr.rows(); }
    int dim() const { return static_cast<int>(x_pr.cols()); }
};

namespace dynamics {

// Classical fixed-step RK4. Each of the n_steps recorded samples advances
// time by dt, integrated internally with `substeps` RK4 steps of size
// dt/substeps. Throws NonFiniteState as soon as any stage goes NaN/Inf.
Trajectory integrate(const VectorField& field, const Vec& x0, double dt,
                     int n_steps, int substeps = 1);

// One time-dt flow step (same substep refinement as integrate).
Vec flow_step(const VectorField& field, const Vec& x, double dt, int substeps = 1);

// All trajectories share the field, dt and step counts; parallel over
// initial conditions, result independent of scheduling.
std::vector<Trajectory> integrate_batch(const VectorField& field, const Mat& initial_conditions,
                                        double dt, int n_steps, int substeps = 1);

// Cartesian product of per-axis linspace points, axis 0 slowest
// (lexicographic order). counts[a] == 1 yields the interval's low end.
Mat sample_grid(const Box& box, const std::vector<int>& counts);

SnapshotSet make_snapshots(const std::vector<Trajectory>& trajectories);

// Presets: toggle_switch, bilinear_quadratic, tc_t1, tc_t2.
// Overrides replace the documented default parameters by name.
VectorField preset(const std::string& name,
                   const std::map<std::string, double>& overrides = {});

// Default simulation domain for a preset (the box bracketing its equilibria).
Box default_box(const std::string& preset_name);

} // namespace dynamics
} // namespace koopman
