#include "koopman/equivariance.hpp"

#include "koopman/errors.hpp"
#include "koopman/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace koopman::equivariance {

namespace {
GroupAction linear_action(Mat g, std::string kind, std::string name, int axis = -1) {
    GroupAction action;
    action.kind = std::move(kind);
    action.name = std::move(name);
    action.axis = axis;
    action.state_matrix = std::move(g);
    action.state_map = [m = action.state_matrix](const Vec& x) { return Vec(m * x); };
    return action;
}
} // namespace

GroupAction swap_action() {
    Mat g(2, 2);
    g << 0, 1, 1, 0;
    return linear_action(g, "swap", "swap");
}

GroupAction reflect_axis_action(int axis, int dim) {
    if (axis < 0 || axis >= dim) throw ShapeMismatch("reflection axis out of range");
    Mat g = Mat::Identity(dim, dim);
    g(axis, axis) = -1.0;
    return linear_action(g, "reflect_axis", "reflect_axis" + std::to_string(axis), axis);
}

GroupAction matrix_action(const Mat& g, const std::string& name) {
    if (g.rows() != g.cols()) throw ShapeMismatch("group action matrix must be square");
    return linear_action(g, "matrix", name);
}

GroupAction with_identity_dict_rep(GroupAction action) {
    action.rep = action.state_matrix;
    return action;
}

GroupAction with_rbf_permutation_rep(GroupAction action, const Dictionary& dict, double tol) {
    if (dict.kind != DictKind::rbf || dict.state_inclusive)
        throw NonEquivariantDictionary("permutation representation needs a plain RBF dictionary");
    const Mat& c = dict.centers;
    const std::int64_t n = c.rows();
    Mat perm = Mat::Zero(n, n);
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (std::int64_t i = 0; i < n; ++i) {
        const Vec mapped = action.state_map(c.row(i).transpose());
        std::int64_t match = -1;
        for (std::int64_t j = 0; j < n; ++j) {
            if (taken[static_cast<std::size_t>(j)]) continue;
            if ((mapped - c.row(j).transpose()).norm() <= tol) {
                match = j;
                break;
            }
        }
        if (match < 0)
            throw NonEquivariantDictionary("g maps a center outside the center set");
        taken[static_cast<std::size_t>(match)] = true;
        // g c_i = c_match, so for an isometric g: psi_match(g x) = psi_i(x),
        // which puts the 1 of column `match` in row i
        perm(i, match) = 1.0;
    }
    action.rep = perm;
    return action;
}

double representation_defect(const GroupAction& action, const Dictionary& dict,
                             const Box& box, int samples_per_axis) {
    const std::vector<int> counts(box.dim(), samples_per_axis);
    const Mat pts = dynamics::sample_grid(box, counts);
    double defect = 0.0;
    for (std::int64_t i = 0; i < pts.rows(); ++i) {
        const Vec x = pts.row(i).transpose();
        const Vec lhs = dict.evaluate_one(action.state_map(x));
        const Vec rhs = action.rep.transpose() * dict.evaluate_one(x);
        defect = std::max(defect, (lhs - rhs).norm());
    }
    return defect;
}

EquivarianceCheck check_equivariance(const VectorField& field, const GroupAction& action,
                                     double dt, const Box& box, int samples_per_axis,
                                     double tol, int substeps) {
    if (static_cast<int>(action.state_matrix.rows()) != field.dim)
        throw ShapeMismatch("action dimension does not match the field");
    const std::vector<int> counts(box.dim(), samples_per_axis);
    const Mat pts = dynamics::sample_grid(box, counts);
    EquivarianceCheck check;
    for (std::int64_t i = 0; i < pts.rows(); ++i) {
        const Vec x = pts.row(i).transpose();
        try {
            const Vec lhs = dynamics::flow_step(field, action.state_map(x), dt, substeps);
            const Vec rhs = action.state_map(dynamics::flow_step(field, x, dt, substeps));
            check.max_defect = std::max(check.max_defect, (lhs - rhs).norm());
        } catch (const NonFiniteState&) {
            // the action leaves the field's domain; that is a failed check,
            // not a fatal error
            check.max_defect = std::numeric_limits<double>::infinity();
            break;
        }
    }
    check.equivariant = check.max_defect <= tol;
    return check;
}

KoopmanModel transport(const KoopmanModel& model_q, const Mat& gamma) {
    if (gamma.rows() != gamma.cols() || gamma.rows() != model_q.k_matrix.rows())
        throw ShapeMismatch("representation size does not match the model");
    if (!(linalg::condition_number(gamma) < 1e8))
        throw SingularRepresentation("gamma is singular or near-singular");

    Eigen::PartialPivLU<Mat> lu(gamma);
    KoopmanModel out = model_q;
    // K_p = gamma K_q gamma^{-1}, the right factor applied by solving
    // X gamma = gamma K_q  <=>  gamma^T X^T = (gamma K_q)^T
    const Mat left = gamma * model_q.k_matrix;
    out.k_matrix = gamma.transpose().partialPivLu().solve(left.transpose()).transpose();
    out.domain_tag = "g(" + model_q.domain_tag + ")";
    out.dictionary.note = "coordinates transported through a group action";
    return out;
}

StitchedModel global_from_one(const KoopmanModel& model_p,
                              const std::vector<GroupAction>& actions,
                              const std::vector<SubspacePredicate>& predicates,
                              const Box& box) {
    if (predicates.size() != actions.size() + 1)
        throw ShapeMismatch("need one predicate per subspace (1 + number of actions)");
    std::vector<std::pair<SubspacePredicate, KoopmanModel>> blocks;
    blocks.emplace_back(predicates[0], model_p);
    for (std::size_t i = 0; i < actions.size(); ++i)
        blocks.emplace_back(predicates[i + 1], transport(model_p, actions[i].rep));
    return stitching::stitch(std::move(blocks), box);
}

} // namespace koopman::equivariance
