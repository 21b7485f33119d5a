#pragma once

#include "koopman/edmd.hpp"
#include "koopman/stitching.hpp"
#include "koopman/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace koopman {

// A finite-group element acting on the state space together with its matrix
// representation on the dictionary coordinates.
struct GroupAction {
    std::string kind;  // swap | reflect_axis | matrix
    std::string name;
    int axis = -1;     // reflect_axis
    Mat state_matrix;  // linear action g on states
    std::function<Vec(const Vec&)> state_map;
    Mat rep;  // gamma: Psi(g x) = Psi(x) gamma on the working dictionary
};

struct EquivarianceCheck {
    bool equivariant = false;
    double max_defect = 0.0;  // max ||T(g x) - g T(x)|| over the samples
};

namespace equivariance {

GroupAction swap_action();                       // (x1, x2) -> (x2, x1)
GroupAction reflect_axis_action(int axis, int dim);
GroupAction matrix_action(const Mat& g, const std::string& name = "matrix");

// gamma for a DMD-style identity dictionary is the state matrix itself.
GroupAction with_identity_dict_rep(GroupAction action);

// gamma for an RBF dictionary is the permutation g induces on the centers;
// requires g . centers to coincide with the center set within tol.
GroupAction with_rbf_permutation_rep(GroupAction action, const Dictionary& dict,
                                     double tol = 1e-6);

// max ||Psi(g x) - Psi(x) gamma|| over a deterministic box sample.
double representation_defect(const GroupAction& action, const Dictionary& dict,
                             const Box& box, int samples_per_axis = 11);

// T = one time-dt RK4 flow step; true iff max ||T(g x) - g T(x)|| <= tol.
EquivarianceCheck check_equivariance(const VectorField& field, const GroupAction& action,
                                     double dt, const Box& box, int samples_per_axis = 11,
                                     double tol = 1e-9, int substeps = 1);

// K_p = gamma * K_q * gamma^{-1}. Callers wanting the opposite orientation
// pass gamma^{-1} (identical for the involutive representations used here).
KoopmanModel transport(const KoopmanModel& model_q, const Mat& gamma);

// One measured subspace plus one action per symmetric subspace; the
// transported locals are stitched into the block-diagonal global operator.
StitchedModel global_from_one(const KoopmanModel& model_p,
                              const std::vector<GroupAction>& actions,
                              const std::vector<SubspacePredicate>& predicates,
                              const Box& box);

} // namespace equivariance
} // namespace koopman
