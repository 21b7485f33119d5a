#include "koopman/edmd.hpp"

#include "koopman/errors.hpp"
#include "koopman/kernels.hpp"
#include "koopman/linalg.hpp"

#include <algorithm>

namespace koopman::edmd {

KoopmanModel fit(const SnapshotSet& snapshots, const Dictionary& dict,
                 const std::string& domain_tag, double rank_tol) {
    if (snapshots.size() < 1) throw EmptyInput("need at least one snapshot pair");
    if (snapshots.x_pr.rows() != snapshots.x_fw.rows() ||
        snapshots.x_pr.cols() != snapshots.x_fw.cols())
        throw ShapeMismatch("x_pr and x_fw shapes differ");
    if (snapshots.dim() != dict.dim)
        throw ShapeMismatch("snapshot dimension does not match the dictionary");

    const Mat y_pr = dict::evaluate(dict, snapshots.x_pr);
    const Mat y_fw = dict::evaluate(dict, snapshots.x_fw);

    const linalg::Pinv p = linalg::pinv(y_pr, rank_tol);

    KoopmanModel model;
    model.k_matrix = p.matrix * y_fw;
    model.dictionary = dict;
    model.domain_tag = domain_tag;
    model.dt = snapshots.dt;
    model.fit_residual = (y_pr * model.k_matrix - y_fw).norm();
    model.rank = p.rank;
    model.rank_deficient = p.rank < dict.n_obs();
    return model;
}

Mat predict(const KoopmanModel& model, const Vec& x0, int n_steps) {
    if (n_steps < 0) throw ShapeMismatch("n_steps must be >= 0");
    const Vec psi0 = model.dictionary.evaluate_one(x0);
    Mat rows(n_steps + 1, psi0.size());
    rows.row(0) = psi0.transpose();
    for (int j = 0; j < n_steps; ++j)
        rows.row(j + 1) = rows.row(j) * model.k_matrix;
    return rows;
}

ErrorCurve error_curve(const KoopmanModel& model, const Mat& test_points,
                       const VectorField& field, int horizon, int substeps) {
    if (horizon < 1) throw ShapeMismatch("horizon must be >= 1");
    const std::int64_t m = test_points.rows();

    // per-point, per-step discrepancy norms; max-reduced serially afterwards
    Mat norms = Mat::Zero(m, horizon + 1);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));
    kernels::index_apply(m, [&](std::int64_t i) {
        try {
            const Trajectory truth = dynamics::integrate(
                field, test_points.row(i).transpose(), model.dt, horizon, substeps);
            const Mat y_true = dict::evaluate(model.dictionary, truth.states);
            Eigen::RowVectorXd pred = y_true.row(0);
            for (int n = 1; n <= horizon; ++n) {
                pred = pred * model.k_matrix;
                norms(i, n) = (y_true.row(n) - pred).norm();
            }
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    ErrorCurve curve;
    curve.horizon.resize(horizon + 1);
    curve.values.assign(horizon + 1, 0.0);
    for (int n = 0; n <= horizon; ++n) {
        curve.horizon[static_cast<std::size_t>(n)] = n;
        for (std::int64_t i = 0; i < m; ++i)
            curve.values[static_cast<std::size_t>(n)] =
                std::max(curve.values[static_cast<std::size_t>(n)], norms(i, n));
    }
    return curve;
}

UpdateDecision subspace_update_decision(const KoopmanModel& model,
                                        const Mat& training_points,
                                        const Mat& new_points,
                                        const VectorField& field, int horizon,
                                        double tol, int substeps) {
    if (new_points.rows() == 0) return UpdateDecision::reuse;  // vacuous max
    const ErrorCurve train = error_curve(model, training_points, field, horizon, substeps);
    const ErrorCurve fresh = error_curve(model, new_points, field, horizon, substeps);
    const double e_train = train.values[static_cast<std::size_t>(horizon)];
    const double e_new = fresh.values[static_cast<std::size_t>(horizon)];
    return e_new <= e_train + tol ? UpdateDecision::reuse : UpdateDecision::refit;
}

} // namespace koopman::edmd
