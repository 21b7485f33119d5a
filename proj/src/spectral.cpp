#include "koopman/spectral.hpp"

#include "koopman/errors.hpp"
#include "koopman/kernels.hpp"
#include "koopman/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace koopman {

Vec KoopmanModes::reconstruct(int n) const {
    CVec acc = CVec::Zero(modes.cols());
    for (std::int64_t j = 0; j < eigenvalues.size(); ++j)
        acc += std::pow(eigenvalues(j), n) * initial_weights(j) * modes.row(j).transpose();
    return acc.real();
}

} // namespace koopman

namespace koopman::spectral {

namespace {

// eigendecomposition sorted by the project convention, columns normalized to
// unit length with the first significant component rotated positive real
void sorted_eig(const Mat& m, CVec& values, CMat& vectors) {
    Eigen::EigenSolver<Mat> solver(m);
    if (solver.info() != Eigen::Success)
        throw EigenSolverFailure("QR iteration did not converge");
    const CVec raw_values = solver.eigenvalues();
    const CMat raw_vectors = solver.eigenvectors();

    std::vector<std::int64_t> order(static_cast<std::size_t>(raw_values.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
        return linalg::eig_less(raw_values(a), raw_values(b));
    });

    values.resize(raw_values.size());
    vectors.resize(raw_vectors.rows(), raw_vectors.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        values(static_cast<std::int64_t>(i)) = raw_values(order[i]);
        CVec v = raw_vectors.col(order[i]);
        v.normalize();
        double vmax = 0.0;
        for (std::int64_t r = 0; r < v.size(); ++r) vmax = std::max(vmax, std::abs(v(r)));
        for (std::int64_t r = 0; r < v.size(); ++r) {
            if (std::abs(v(r)) > 1e-12 * vmax) {
                v *= std::conj(v(r)) / std::abs(v(r));
                break;
            }
        }
        vectors.col(static_cast<std::int64_t>(i)) = v;
    }
}

} // namespace

SpectralReport analyze(const KoopmanModel& model, double unit_tol, double rank_tol) {
    const Mat& k = model.k_matrix;
    if (k.rows() != k.cols()) throw ShapeMismatch("Koopman matrix must be square");
    if (!k.allFinite()) throw NonFiniteState("Koopman matrix has NaN/Inf entries");

    SpectralReport report;
    report.unit_tol = unit_tol;
    report.rank_tol = rank_tol;
    report.k_frobenius = k.norm();

    sorted_eig(k, report.eigenvalues, report.right_eigvecs);
    sorted_eig(k.transpose(), report.adjoint_eigenvalues, report.adjoint_eigvecs);

    for (std::int64_t j = 0; j < report.eigenvalues.size(); ++j) {
        const double residual =
            (k * report.right_eigvecs.col(j) - report.eigenvalues(j) * report.right_eigvecs.col(j))
                .norm();
        report.max_eigenpair_residual = std::max(report.max_eigenpair_residual, residual);
        if (std::abs(report.eigenvalues(j) - Complex(1.0, 0.0)) < unit_tol)
            report.unit_indices.push_back(static_cast<int>(j));
    }
    report.algebraic_multiplicity_at_one = static_cast<int>(report.unit_indices.size());

    const Mat shifted = k - Mat::Identity(k.rows(), k.cols());
    report.geometric_multiplicity_at_one =
        static_cast<int>(k.rows()) - linalg::svd_rank(shifted, rank_tol);
    return report;
}

int rho_norm(const SpectralReport& report) { return report.geometric_multiplicity_at_one; }

EigenfunctionGrid eigenfunction_grid(const KoopmanModel& model, const SpectralReport& report,
                                     int eig_index, const Box& box,
                                     const std::vector<int>& counts, const std::string& side) {
    if (eig_index < 0 || eig_index >= report.eigenvalues.size())
        throw ShapeMismatch("eigenvalue index out of range");
    const bool adjoint = side == "adjoint";
    if (!adjoint && side != "right")
        throw ShapeMismatch("side must be 'right' or 'adjoint'");

    EigenfunctionGrid grid;
    grid.box = box;
    grid.counts = counts;
    grid.eig_index = eig_index;
    grid.side = side;
    grid.eigenvalue = adjoint ? report.adjoint_eigenvalues(eig_index)
                              : report.eigenvalues(eig_index);
    grid.points = dynamics::sample_grid(box, counts);

    const Mat values = dict::evaluate(model.dictionary, grid.points);
    const CVec coeff = adjoint ? report.adjoint_eigvecs.col(eig_index)
                               : report.right_eigvecs.col(eig_index);
    kernels::abs_projection(values, coeff, grid.values);
    return grid;
}

std::vector<AttractorPeak> localize_attractors(const KoopmanModel& model,
                                               const SpectralReport& report, const Box& box,
                                               const std::vector<int>& counts) {
    const Mat points = dynamics::sample_grid(box, counts);
    const Mat values = dict::evaluate(model.dictionary, points);

    std::vector<AttractorPeak> peaks;
    for (std::int64_t j = 0; j < report.adjoint_eigenvalues.size(); ++j) {
        if (std::abs(report.adjoint_eigenvalues(j) - Complex(1.0, 0.0)) >= report.unit_tol)
            continue;
        Vec abs_phi;
        kernels::abs_projection(values, report.adjoint_eigvecs.col(j), abs_phi);
        std::int64_t arg = 0;
        for (std::int64_t p = 1; p < abs_phi.size(); ++p)
            if (abs_phi(p) > abs_phi(arg)) arg = p;

        AttractorPeak peak;
        peak.eig_index = static_cast<int>(j);
        peak.eigenvalue = report.adjoint_eigenvalues(j);
        peak.peak_point = points.row(arg).transpose();
        peak.peak_value = abs_phi(arg);
        std::vector<std::int64_t> hot;
        for (std::int64_t p = 0; p < abs_phi.size(); ++p)
            if (abs_phi(p) >= 0.9 * peak.peak_value) hot.push_back(p);
        peak.cells_within_90pct.resize(static_cast<std::int64_t>(hot.size()), points.cols());
        for (std::size_t r = 0; r < hot.size(); ++r)
            peak.cells_within_90pct.row(static_cast<std::int64_t>(r)) = points.row(hot[r]);
        peaks.push_back(std::move(peak));
    }
    return peaks;
}

KoopmanModes koopman_modes(const KoopmanModel& model, const SpectralReport& report,
                           const Vec& x0, const Mat& projector) {
    const CMat& v = report.right_eigvecs;
    if (projector.rows() != v.rows())
        throw ShapeMismatch("projector rows must equal the observable dimension");
    const double cond = linalg::condition_number(v);
    if (!(cond < 1e8))
        throw NonDiagonalizable("eigenvector matrix condition number " + std::to_string(cond));

    KoopmanModes out;
    out.eigenvalues = report.eigenvalues;
    out.modes = v.partialPivLu().solve(projector.cast<Complex>());
    const Vec psi0 = model.dictionary.evaluate_one(x0);
    out.initial_weights = (psi0.transpose().cast<Complex>() * v).transpose();
    return out;
}

Mat project_to_state(const KoopmanModel& model, const SnapshotSet& snapshots, double rank_tol) {
    if (snapshots.dim() != model.dictionary.dim)
        throw ShapeMismatch("snapshot dimension does not match the model");
    const Mat y_pr = dict::evaluate(model.dictionary, snapshots.x_pr);
    return linalg::pinv(y_pr, rank_tol).matrix * snapshots.x_pr;
}

Mat state_selector(const Dictionary& dict) {
    if (!dict.state_inclusive)
        throw MissingProjector("dictionary is not state inclusive; fit a projector instead");
    Mat b = Mat::Zero(dict.n_obs(), dict.dim);
    b.topRows(dict.dim) = Mat::Identity(dict.dim, dict.dim);
    return b;
}

} // namespace koopman::spectral
