#include "koopman/dynamics.hpp"

#include "koopman/errors.hpp"
#include "koopman/kernels.hpp"

#include <cmath>

namespace koopman::dynamics {

namespace {

void check_finite(const Vec& v, const char* where) {
    for (std::int64_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i)))
            throw NonFiniteState(std::string("non-finite value in ") + where);
}

Vec rk4_step(const VectorField& field, const Vec& x, double h) {
    const Vec k1 = field.rhs(x);
    check_finite(k1, "rhs stage k1");
    const Vec k2 = field.rhs(x + 0.5 * h * k1);
    check_finite(k2, "rhs stage k2");
    const Vec k3 = field.rhs(x + 0.5 * h * k2);
    check_finite(k3, "rhs stage k3");
    const Vec k4 = field.rhs(x + h * k3);
    check_finite(k4, "rhs stage k4");
    Vec next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(next, "state update");
    return next;
}

} // namespace

Vec flow_step(const VectorField& field, const Vec& x, double dt, int substeps) {
    if (substeps < 1) throw ShapeMismatch("substeps must be >= 1");
    const double h = dt / substeps;
    Vec y = x;
    for (int s = 0; s < substeps; ++s) y = rk4_step(field, y, h);
    return y;
}

Trajectory integrate(const VectorField& field, const Vec& x0, double dt,
                     int n_steps, int substeps) {
    if (dt <= 0.0) throw ShapeMismatch("dt must be positive");
    if (n_steps < 1) throw ShapeMismatch("n_steps must be >= 1");
    if (x0.size() != field.dim)
        throw ShapeMismatch("initial condition dimension does not match the field");

    Trajectory traj;
    traj.dt = dt;
    traj.initial_condition = x0;
    traj.states.resize(n_steps + 1, field.dim);
    traj.states.row(0) = x0.transpose();
    Vec x = x0;
    for (int t = 0; t < n_steps; ++t) {
        x = flow_step(field, x, dt, substeps);
        traj.states.row(t + 1) = x.transpose();
    }
    return traj;
}

std::vector<Trajectory> integrate_batch(const VectorField& field, const Mat& initial_conditions,
                                        double dt, int n_steps, int substeps) {
    const std::int64_t m = initial_conditions.rows();
    std::vector<Trajectory> out(static_cast<std::size_t>(m));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));
    kernels::index_apply(m, [&](std::int64_t i) {
        try {
            out[static_cast<std::size_t>(i)] =
                integrate(field, initial_conditions.row(i).transpose(), dt, n_steps, substeps);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

Mat sample_grid(const Box& box, const std::vector<int>& counts) {
    const std::size_t dim = box.dim();
    if (counts.size() != dim) throw ShapeMismatch("counts size does not match box dimension");
    std::int64_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) {
        if (counts[a] < 1) throw ShapeMismatch("grid counts must be >= 1");
        if (box.lo(a) >= box.hi(a)) throw ShapeMismatch("box interval must have lo < hi");
        total *= counts[a];
    }
    Mat pts(total, static_cast<std::int64_t>(dim));
    for (std::int64_t p = 0; p < total; ++p) {
        std::int64_t rem = p;
        for (std::size_t a = dim; a-- > 0;) {
            const std::int64_t idx = rem % counts[a];
            rem /= counts[a];
            const double step = counts[a] > 1
                                    ? (box.hi(a) - box.lo(a)) / (counts[a] - 1)
                                    : 0.0;
            pts(p, static_cast<std::int64_t>(a)) = box.lo(a) + step * static_cast<double>(idx);
        }
    }
    return pts;
}

SnapshotSet make_snapshots(const std::vector<Trajectory>& trajectories) {
    std::int64_t k = 0;
    int dim = -1;
    double dt = 0.0;
    for (const auto& t : trajectories) {
        if (t.length() < 2) continue;
        if (dim < 0) {
            dim = t.dim();
            dt = t.dt;
        } else if (t.dim() != dim) {
            throw ShapeMismatch("trajectories have inconsistent dimensions");
        } else if (t.dt != dt) {
            throw ShapeMismatch("trajectories have inconsistent dt");
        }
        k += t.length() - 1;
    }
    if (k == 0) throw EmptyInput("no trajectory has at least two states");

    SnapshotSet snaps;
    snaps.dt = dt;
    snaps.x_pr.resize(k, dim);
    snaps.x_fw.resize(k, dim);
    std::int64_t row = 0;
    for (const auto& t : trajectories) {
        if (t.length() < 2) continue;
        const std::int64_t m = t.length() - 1;
        snaps.x_pr.middleRows(row, m) = t.states.topRows(m);
        snaps.x_fw.middleRows(row, m) = t.states.bottomRows(m);
        row += m;
    }
    return snaps;
}

namespace {

double param(const std::map<std::string, double>& p, const std::string& key) {
    return p.at(key);
}

VectorField toggle_switch_field(std::map<std::string, double> p) {
    VectorField f;
    f.name = "toggle_switch";
    f.dim = 2;
    f.params = p;
    f.rhs = [p](const Vec& x) {
        Vec dx(2);
        dx(0) = param(p, "alpha1") / (1.0 + std::pow(x(1), param(p, "beta"))) -
                param(p, "kappa1") * x(0);
        dx(1) = param(p, "alpha2") / (1.0 + std::pow(x(0), param(p, "gamma"))) -
                param(p, "kappa2") * x(1);
        return dx;
    };
    return f;
}

VectorField bilinear_quadratic_field() {
    VectorField f;
    f.name = "bilinear_quadratic";
    f.dim = 2;
    f.rhs = [](const Vec& x) {
        Vec dx(2);
        dx(0) = x(0) - x(0) * x(1);
        dx(1) = x(0) * x(0) - 2.0 * x(1);
        return dx;
    };
    return f;
}

VectorField tc_t1_field() {
    VectorField f;
    f.name = "tc_t1";
    f.dim = 2;
    f.rhs = [](const Vec& x) {
        Vec dx(2);
        dx(0) = -x(0);
        dx(1) = -x(1) + x(0) * x(0);
        return dx;
    };
    return f;
}

VectorField tc_t2_field() {
    VectorField f;
    f.name = "tc_t2";
    f.dim = 2;
    f.rhs = [](const Vec& y) { return Vec(-y); };
    return f;
}

} // namespace

VectorField preset(const std::string& name, const std::map<std::string, double>& overrides) {
    if (name == "toggle_switch") {
        std::map<std::string, double> p{{"alpha1", 1.0}, {"alpha2", 1.0},
                                        {"beta", 3.55},  {"gamma", 3.53},
                                        {"kappa1", 0.5}, {"kappa2", 0.5}};
        for (const auto& [k, v] : overrides) {
            if (!p.count(k)) throw UnknownPreset("toggle_switch has no parameter " + k);
            p[k] = v;
        }
        return toggle_switch_field(std::move(p));
    }
    if (!overrides.empty())
        throw UnknownPreset(name + " takes no parameter overrides");
    if (name == "bilinear_quadratic") return bilinear_quadratic_field();
    if (name == "tc_t1") return tc_t1_field();
    if (name == "tc_t2") return tc_t2_field();
    throw UnknownPreset(name);
}

Box default_box(const std::string& preset_name) {
    if (preset_name == "toggle_switch") return make_box({{0.0, 4.0}, {0.0, 4.0}});
    if (preset_name == "bilinear_quadratic") return make_box({{-3.0, 3.0}, {-1.0, 3.0}});
    if (preset_name == "tc_t1" || preset_name == "tc_t2")
        return make_box({{-2.0, 2.0}, {-2.0, 2.0}});
    throw UnknownPreset(preset_name);
}

} // namespace koopman::dynamics
