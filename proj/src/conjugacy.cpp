#include "koopman/conjugacy.hpp"

#include "koopman/errors.hpp"
#include "koopman/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace koopman::conjugacy {

ConjugacyCheck check_conjugacy(const VectorField& t1, const VectorField& t2,
                               const Homeomorphism& h, double dt, const Box& box,
                               int samples_per_axis, double tol, int substeps) {
    if (t1.dim != t2.dim || h.dim != t2.dim)
        throw ShapeMismatch("conjugacy check needs matching dimensions");
    const std::vector<int> counts(box.dim(), samples_per_axis);
    const Mat pts = dynamics::sample_grid(box, counts);
    ConjugacyCheck check;
    for (std::int64_t i = 0; i < pts.rows(); ++i) {
        const Vec y = pts.row(i).transpose();
        const Vec lhs = dynamics::flow_step(t1, h.forward(y), dt, substeps);
        const Vec rhs = h.forward(dynamics::flow_step(t2, y, dt, substeps));
        check.max_defect = std::max(check.max_defect, (lhs - rhs).norm());
    }
    check.conjugate = check.max_defect <= tol;
    return check;
}

ConjugatePair conjugate_fit(const SnapshotSet& t2_snapshots, const Dictionary& base_dict,
                            const Homeomorphism& h, const Box& box, double rank_tol) {
    ConjugatePair pair;
    pair.theta = edmd::fit(t2_snapshots, base_dict, "conjugate_N", rank_tol);

    SnapshotSet t1_snapshots;
    t1_snapshots.dt = t2_snapshots.dt;
    t1_snapshots.x_pr = h.map_rows(t2_snapshots.x_pr);
    t1_snapshots.x_fw = h.map_rows(t2_snapshots.x_fw);

    const Dictionary psi_dict = dict::compose_with_inverse_homeo(base_dict, h, box);
    pair.psi = edmd::fit(t1_snapshots, psi_dict, "conjugate_M", rank_tol);
    return pair;
}

namespace {

// cluster the sorted spectrum into degeneracy groups by chained proximity
std::vector<std::vector<int>> degeneracy_groups(const CVec& values, double group_tol) {
    std::vector<std::vector<int>> groups;
    for (int j = 0; j < values.size(); ++j) {
        if (!groups.empty()) {
            const int prev = groups.back().back();
            if (std::abs(values(j) - values(prev)) <= group_tol) {
                groups.back().push_back(j);
                continue;
            }
        }
        groups.push_back({j});
    }
    return groups;
}

CVec phase_normalized(const CVec& samples, const Complex& ref) {
    const double mag = std::abs(ref);
    if (mag < 1e-14) return samples;  // reference degenerate; leave as is
    return samples * (std::conj(ref) / mag);
}

} // namespace

EigCorrespondence eig_correspondence(const KoopmanModel& theta, const KoopmanModel& psi,
                                     const Homeomorphism& h, const Box& box,
                                     int samples_per_axis, double eig_tol, double group_tol) {
    const SpectralReport rep_theta = spectral::analyze(theta);
    const SpectralReport rep_psi = spectral::analyze(psi);

    EigCorrespondence out;
    out.lambda_theta = rep_theta.eigenvalues;
    out.lambda_psi = rep_psi.eigenvalues;
    if (out.lambda_theta.size() != out.lambda_psi.size())
        throw ShapeMismatch("models have different observable dimensions");

    for (int j = 0; j < out.lambda_theta.size(); ++j) {
        const double gap = std::abs(out.lambda_theta(j) - out.lambda_psi(j));
        out.eigenvalue_gaps.push_back(gap);
        out.max_eigenvalue_gap = std::max(out.max_eigenvalue_gap, gap);
    }
    if (out.max_eigenvalue_gap > eig_tol)
        throw EigenvalueMismatch("sorted spectra differ by " +
                                 std::to_string(out.max_eigenvalue_gap));

    // sampled eigenfunction values: phi_theta(y) and phi_psi(h(y))
    const std::vector<int> counts(box.dim(), samples_per_axis);
    const Mat y_pts = dynamics::sample_grid(box, counts);
    const Mat x_pts = h.map_rows(y_pts);
    const CMat phi_theta =
        dict::evaluate(theta.dictionary, y_pts).cast<Complex>() * rep_theta.right_eigvecs;
    const CMat phi_psi =
        dict::evaluate(psi.dictionary, x_pts).cast<Complex>() * rep_psi.right_eigvecs;

    // phase reference: box center offset by +0.5 per axis
    Vec ref_y(static_cast<std::int64_t>(box.dim()));
    for (std::size_t a = 0; a < box.dim(); ++a)
        ref_y(static_cast<std::int64_t>(a)) = 0.5 * (box.lo(a) + box.hi(a)) + 0.5;
    const CVec ref_theta =
        (theta.dictionary.evaluate_one(ref_y).transpose().cast<Complex>() * rep_theta.right_eigvecs)
            .transpose();
    const CVec ref_psi =
        (psi.dictionary.evaluate_one(h.forward(ref_y)).transpose().cast<Complex>() *
         rep_psi.right_eigvecs)
            .transpose();

    out.groups = degeneracy_groups(out.lambda_theta, group_tol);
    for (const auto& group : out.groups) {
        if (group.size() == 1) {
            const int j = group.front();
            const CVec a = phase_normalized(phi_theta.col(j), ref_theta(j));
            const CVec b = phase_normalized(phi_psi.col(j), ref_psi(j));
            const double defect = (a - b).cwiseAbs().maxCoeff();
            out.composition_defects.push_back(defect);
            out.max_composition_defect = std::max(out.max_composition_defect, defect);
        } else {
            CMat a(y_pts.rows(), static_cast<std::int64_t>(group.size()));
            CMat b(y_pts.rows(), static_cast<std::int64_t>(group.size()));
            for (std::size_t g = 0; g < group.size(); ++g) {
                a.col(static_cast<std::int64_t>(g)) = phi_theta.col(group[g]);
                b.col(static_cast<std::int64_t>(g)) = phi_psi.col(group[g]);
            }
            const double angle = linalg::principal_angles(a, b).maxCoeff();
            out.group_subspace_angles.push_back(angle);
            out.max_group_angle = std::max(out.max_group_angle, angle);
        }
    }
    return out;
}

ModeEquality mode_equality(const KoopmanModel& theta, const KoopmanModel& psi, const Vec& y0,
                           const Homeomorphism& h, const Mat& projector, double mode_tol,
                           double angle_tol, double group_tol) {
    const SpectralReport rep_theta = spectral::analyze(theta);
    const SpectralReport rep_psi = spectral::analyze(psi);

    const KoopmanModes modes_theta = spectral::koopman_modes(theta, rep_theta, y0, projector);
    const KoopmanModes modes_psi =
        spectral::koopman_modes(psi, rep_psi, h.forward(y0), projector);

    ModeEquality out;
    const auto groups = degeneracy_groups(rep_theta.eigenvalues, group_tol);
    for (const auto& group : groups) {
        if (group.size() == 1) {
            const int j = group.front();
            const double dev =
                (modes_theta.modes.row(j) - modes_psi.modes.row(j)).cwiseAbs().maxCoeff();
            out.max_mode_deviation = std::max(out.max_mode_deviation, dev);
        } else {
            CMat a(modes_theta.modes.cols(), static_cast<std::int64_t>(group.size()));
            CMat b(modes_theta.modes.cols(), static_cast<std::int64_t>(group.size()));
            CVec term_a = CVec::Zero(modes_theta.modes.cols());
            CVec term_b = CVec::Zero(modes_theta.modes.cols());
            for (std::size_t g = 0; g < group.size(); ++g) {
                const int j = group[g];
                a.col(static_cast<std::int64_t>(g)) = modes_theta.modes.row(j).transpose();
                b.col(static_cast<std::int64_t>(g)) = modes_psi.modes.row(j).transpose();
                term_a += modes_theta.initial_weights(j) * modes_theta.modes.row(j).transpose();
                term_b += modes_psi.initial_weights(j) * modes_psi.modes.row(j).transpose();
            }
            const double angle = linalg::principal_angles(a, b).maxCoeff();
            out.max_group_angle = std::max(out.max_group_angle, angle);
            const double term_dev = (term_a - term_b).cwiseAbs().maxCoeff();
            out.max_group_term_deviation = std::max(out.max_group_term_deviation, term_dev);
        }
    }
    out.equal = out.max_mode_deviation <= mode_tol && out.max_group_angle <= angle_tol &&
                out.max_group_term_deviation <= mode_tol;
    return out;
}

} // namespace koopman::conjugacy
