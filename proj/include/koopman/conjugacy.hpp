#pragma once

#include "koopman/edmd.hpp"
#include "koopman/homeomorphism.hpp"
#include "koopman/spectral.hpp"
#include "koopman/types.hpp"

#include <vector>

namespace koopman {

struct ConjugacyCheck {
    bool conjugate = false;
    double max_defect = 0.0;  // max ||flow_{T1,dt}(h(y)) - h(flow_{T2,dt}(y))||
};

struct ConjugatePair {
    KoopmanModel theta;  // fitted on T2 data with the base dictionary
    KoopmanModel psi;    // fitted on h(T2 data) with base o h^{-1}
};

struct EigCorrespondence {
    CVec lambda_theta;
    CVec lambda_psi;
    std::vector<double> eigenvalue_gaps;        // |lambda_theta_j - lambda_psi_j|
    std::vector<std::vector<int>> groups;       // indices clustered by degeneracy
    std::vector<double> composition_defects;    // singleton groups: sup |phi_psi(h(y)) - phi_theta(y)|
    std::vector<double> group_subspace_angles;  // multi groups: max principal angle
    double max_eigenvalue_gap = 0.0;
    double max_composition_defect = 0.0;
    double max_group_angle = 0.0;
};

struct ModeEquality {
    bool equal = false;
    double max_mode_deviation = 0.0;    // singleton groups, after the shared phase convention
    double max_group_angle = 0.0;       // degenerate groups compared as subspaces
    double max_group_term_deviation = 0.0;  // basis-invariant combined spatial terms
};

namespace conjugacy {

// max over sampled y of ||flow_{T1,dt}(h(y)) - h(flow_{T2,dt}(y))||.
ConjugacyCheck check_conjugacy(const VectorField& t1, const VectorField& t2,
                               const Homeomorphism& h, double dt, const Box& box,
                               int samples_per_axis = 11, double tol = 1e-6,
                               int substeps = 1);

// Theta-side fit on the T2 snapshots; Psi-side fit on the same snapshots
// pushed through h with the composed dictionary Theta o h^{-1}.
ConjugatePair conjugate_fit(const SnapshotSet& t2_snapshots, const Dictionary& base_dict,
                            const Homeomorphism& h, const Box& box, double rank_tol = 1e-10);

// Pairs the sorted spectra (throws EigenvalueMismatch beyond eig_tol) and
// checks the eigenfunction composition identity phi_psi o h = phi_theta,
// degenerate eigenspaces compared via principal angles of sampled values.
EigCorrespondence eig_correspondence(const KoopmanModel& theta, const KoopmanModel& psi,
                                     const Homeomorphism& h, const Box& box,
                                     int samples_per_axis = 11, double eig_tol = 1e-8,
                                     double group_tol = 1e-6);

// Koopman modes of both sides for the shared projected observable (selector
// B), theta at y0 and psi at h(y0); modes must agree pairwise, degenerate
// groups as subspaces.
ModeEquality mode_equality(const KoopmanModel& theta, const KoopmanModel& psi, const Vec& y0,
                           const Homeomorphism& h, const Mat& projector,
                           double mode_tol = 1e-8, double angle_tol = 1e-6,
                           double group_tol = 1e-6);

} // namespace conjugacy
} // namespace koopman
