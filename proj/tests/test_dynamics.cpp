#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "koopman/dynamics.hpp"
#include "koopman/errors.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace koopman;
using testing::vec2;

namespace {
VectorField zero_field(int dim) {
    VectorField f;
    f.name = "zero";
    f.dim = dim;
    f.rhs = [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
    return f;
}

VectorField scalar_decay() {
    VectorField f;
    f.name = "decay";
    f.dim = 1;
    f.rhs = [](const Vec& x) { return Vec(-x); };
    return f;
}
} // namespace

TEST_CASE("zero field keeps the state constant") {
    const Trajectory traj = dynamics::integrate(zero_field(2), vec2(1.0, 2.0), 0.1, 5);
    REQUIRE(traj.length() == 6);
    for (std::int64_t i = 0; i < 6; ++i) {
        CHECK(traj.states(i, 0) == 1.0);
        CHECK(traj.states(i, 1) == 2.0);
    }
    CHECK(traj.states.row(0).transpose() == traj.initial_condition);
}

TEST_CASE("one RK4 step of xdot=-x lands on exp(-0.1) to 1e-7") {
    Vec x0(1);
    x0 << 1.0;
    const Trajectory traj = dynamics::integrate(scalar_decay(), x0, 0.1, 1);
    CHECK(std::abs(traj.states(1, 0) - 0.9048374180) < 1e-7);
}

TEST_CASE("RK4 order: two half steps beat one full step by 14x-18x") {
    Vec x0(1);
    x0 << 1.0;
    const double exact = std::exp(-0.1);
    const double e_full =
        std::abs(dynamics::integrate(scalar_decay(), x0, 0.1, 1).states(1, 0) - exact);
    const double e_half =
        std::abs(dynamics::integrate(scalar_decay(), x0, 0.05, 2).states(2, 0) - exact);
    const double ratio = e_full / e_half;
    CHECK(ratio >= 14.0);
    CHECK(ratio <= 18.0);
}

TEST_CASE("toggle switch holds near its nominal equilibrium") {
    // the nominal (2, 0.16) is rounded to two decimals; the actual fixed
    // point sits about 3e-3 away, which bounds the drift of a run started
    // at the nominal point
    const VectorField f = dynamics::preset("toggle_switch");
    const Trajectory traj = dynamics::integrate(f, vec2(2.0, 0.16), 0.1, 100);
    double max_dev = 0.0;
    for (std::int64_t i = 0; i < traj.length(); ++i)
        max_dev = std::max(max_dev, (traj.states.row(i).transpose() - vec2(2.0, 0.16)).norm());
    CHECK(max_dev < 5e-3);
    // and it converges onto a genuine equilibrium: the field vanishes there
    const Vec tail = traj.states.row(traj.length() - 1).transpose();
    CHECK(f.rhs(tail).norm() < 1e-4);
}

TEST_CASE("sample_grid enumerates the Cartesian product lexicographically") {
    const Mat g1 = dynamics::sample_grid(make_box({{0, 1}, {0, 1}}), {2, 2});
    REQUIRE(g1.rows() == 4);
    CHECK(g1.row(0) == Eigen::RowVector2d(0, 0));
    CHECK(g1.row(1) == Eigen::RowVector2d(0, 1));
    CHECK(g1.row(2) == Eigen::RowVector2d(1, 0));
    CHECK(g1.row(3) == Eigen::RowVector2d(1, 1));

    const Mat g2 = dynamics::sample_grid(make_box({{0, 4}, {0, 4}}), {9, 9});
    REQUIRE(g2.rows() == 81);
    bool has_center = false;
    for (std::int64_t i = 0; i < g2.rows(); ++i)
        if (g2(i, 0) == 2.0 && g2(i, 1) == 2.0) has_center = true;
    CHECK(has_center);

    const Mat g3 = dynamics::sample_grid(make_box({{-2, 2}, {-1, 3}}), {9, 9});
    CHECK(g3.row(0) == Eigen::RowVector2d(-2, -1));
    CHECK(g3.row(80) == Eigen::RowVector2d(2, 3));
}

TEST_CASE("make_snapshots pairs within trajectories only") {
    const VectorField f = zero_field(1);
    Vec a(1), c(1);
    a << 1.0;
    c << 5.0;
    Trajectory t1 = dynamics::integrate(f, a, 0.1, 2);  // states a, a, a
    t1.states(1, 0) = 2.0;                              // a, b, c shape
    t1.states(2, 0) = 3.0;
    Trajectory t2 = dynamics::integrate(f, c, 0.1, 1);
    t2.states(1, 0) = 6.0;

    const SnapshotSet snaps = dynamics::make_snapshots({t1, t2});
    REQUIRE(snaps.size() == 3);
    CHECK(snaps.x_pr(0, 0) == 1.0);
    CHECK(snaps.x_fw(0, 0) == 2.0);
    CHECK(snaps.x_pr(1, 0) == 2.0);
    CHECK(snaps.x_fw(1, 0) == 3.0);
    // no pair (3 -> 5) across the trajectory boundary
    CHECK(snaps.x_pr(2, 0) == 5.0);
    CHECK(snaps.x_fw(2, 0) == 6.0);
}

TEST_CASE("81 trajectories x 21 samples make 1620 snapshot rows") {
    const VectorField f = dynamics::preset("toggle_switch");
    const Mat ics = dynamics::sample_grid(dynamics::default_box("toggle_switch"), {9, 9});
    const auto trajs = dynamics::integrate_batch(f, ics, 0.1, 20);
    const SnapshotSet snaps = dynamics::make_snapshots(trajs);
    CHECK(snaps.size() == 1620);
}

TEST_CASE("presets match their closed-form values") {
    const VectorField bilinear = dynamics::preset("bilinear_quadratic");
    CHECK(bilinear.rhs(vec2(std::sqrt(2.0), 1.0)).norm() < 1e-12);
    CHECK(bilinear.rhs(vec2(0.0, 0.0)).norm() == 0.0);

    const VectorField t2 = dynamics::preset("tc_t2");
    CHECK(t2.rhs(vec2(3.0, -4.0)) == vec2(-3.0, 4.0));

    const VectorField toggle = dynamics::preset("toggle_switch");
    CHECK(toggle.rhs(vec2(0.0, 0.0)) == vec2(1.0, 1.0));

    CHECK_THROWS_AS((void)dynamics::preset("lorenz"), UnknownPreset);
    CHECK_THROWS_AS((void)dynamics::preset("toggle_switch", {{"omega", 1.0}}), UnknownPreset);
}

TEST_CASE("toggle half planes are forward invariant off the diagonal") {
    const VectorField f = dynamics::preset("toggle_switch");
    const Mat ics = dynamics::sample_grid(dynamics::default_box("toggle_switch"), {7, 7});
    for (std::int64_t i = 0; i < ics.rows(); ++i) {
        const Vec x0 = ics.row(i).transpose();
        if (std::abs(x0(0) - x0(1)) < 0.1) continue;
        const bool right = x0(0) > x0(1);
        const Trajectory traj = dynamics::integrate(f, x0, 0.1, 200);
        for (std::int64_t t = 0; t < traj.length(); ++t) {
            if (right)
                CHECK(traj.states(t, 0) > traj.states(t, 1));
            else
                CHECK(traj.states(t, 0) < traj.states(t, 1));
        }
    }
}

TEST_CASE("integration is bit-identical across runs and substeps refine") {
    const VectorField f = dynamics::preset("bilinear_quadratic");
    const Trajectory a = dynamics::integrate(f, vec2(1.0, -0.5), 0.25, 40);
    const Trajectory b = dynamics::integrate(f, vec2(1.0, -0.5), 0.25, 40);
    CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0.0);

    // substeps keep the sampling grid but integrate finer
    const Trajectory c = dynamics::integrate(f, vec2(1.0, -0.5), 0.25, 40, 8);
    CHECK(c.length() == a.length());
    CHECK((a.states - c.states).cwiseAbs().maxCoeff() > 0.0);
    CHECK((a.states - c.states).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("blow-up raises NonFiniteState instead of clamping") {
    const VectorField f = dynamics::preset("bilinear_quadratic");
    // dt far outside the RK4 stability region from a fast corner
    CHECK_THROWS_AS((void)dynamics::integrate(f, vec2(-3.0, -1.0), 5.0, 50), NonFiniteState);
    // negative concentrations exit the toggle's Hill-function domain
    const VectorField toggle = dynamics::preset("toggle_switch");
    CHECK_THROWS_AS((void)dynamics::integrate(toggle, vec2(-1.0, 0.5), 0.1, 10), NonFiniteState);
}

TEST_CASE("precondition violations are loud") {
    CHECK_THROWS_AS((void)dynamics::integrate(zero_field(2), vec2(0, 0), -0.1, 5), ShapeMismatch);
    CHECK_THROWS_AS((void)dynamics::integrate(zero_field(2), vec2(0, 0), 0.1, 0), ShapeMismatch);
    Vec x1(1);
    x1 << 1.0;
    CHECK_THROWS_AS((void)dynamics::integrate(zero_field(2), x1, 0.1, 5), ShapeMismatch);
    CHECK_THROWS_AS((void)dynamics::make_snapshots({}), EmptyInput);
}
