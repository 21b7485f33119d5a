#pragma once

#include "koopman/edmd.hpp"
#include "koopman/types.hpp"

#include <string>
#include <vector>

namespace koopman {

// Eigen-analysis of a Koopman matrix. Right eigenvectors (K v = lambda v)
// generate the Koopman eigenfunctions phi(x) = Psi(x) v; adjoint eigenvectors
// (K^T w = lambda w) generate the density-side modes whose magnitude
// concentrates on the attractor sets, which is what attractor localization
// evaluates on state-space grids.
struct SpectralReport {
    CVec eigenvalues;   // sorted: |lambda| desc, ties by Re desc then Im desc
    CMat right_eigvecs; // columns, unit norm, first significant entry rotated positive real

    CVec adjoint_eigenvalues;  // same sort order (same multiset as eigenvalues)
    CMat adjoint_eigvecs;

    std::vector<int> unit_indices;  // |lambda - 1| < unit_tol, right-side order
    int algebraic_multiplicity_at_one = 0;  // census count
    int geometric_multiplicity_at_one = 0;  // N - rank(K - I)

    double unit_tol = 0.0;
    double rank_tol = 0.0;
    double max_eigenpair_residual = 0.0;  // max_j ||K v_j - lambda_j v_j||
    double k_frobenius = 0.0;
};

struct EigenfunctionGrid {
    Box box;
    std::vector<int> counts;
    Mat points;       // grid points, one per row
    Vec values;       // |phi(x_p)|
    int eig_index = 0;
    Complex eigenvalue;
    std::string side;  // "right" (Koopman eigenfunction) or "adjoint" (density)
};

// argmax cell of a near-unit density mode, plus every cell within 90% of it.
struct AttractorPeak {
    int eig_index = 0;
    Complex eigenvalue;
    Vec peak_point;
    double peak_value = 0.0;
    Mat cells_within_90pct;
};

// KMD data: f(x_n) = sum_j lambda_j^n phi_j(x0) theta_j for the projected
// observable f = Psi * B.
struct KoopmanModes {
    CMat modes;           // row j = theta_j (length m)
    CVec eigenvalues;
    CVec initial_weights; // phi_j(x0)

    // sum_j lambda_j^n w_j theta_j, real part (imaginary parts cancel in pairs)
    Vec reconstruct(int n) const;
};

namespace spectral {

SpectralReport analyze(const KoopmanModel& model, double unit_tol = 0.05,
                       double rank_tol = 1e-6);

// Geometric multiplicity of the unit eigenvalue; the invariant-subspace
// counter behind the discovery monotonicity check.
int rho_norm(const SpectralReport& report);

EigenfunctionGrid eigenfunction_grid(const KoopmanModel& model, const SpectralReport& report,
                                     int eig_index, const Box& box,
                                     const std::vector<int>& counts,
                                     const std::string& side = "right");

// One peak per near-unit eigenvalue, evaluated on the density side.
std::vector<AttractorPeak> localize_attractors(const KoopmanModel& model,
                                               const SpectralReport& report, const Box& box,
                                               const std::vector<int>& counts);

// projector B maps observable rows to state rows (x ~= Psi(x) B).
KoopmanModes koopman_modes(const KoopmanModel& model, const SpectralReport& report,
                           const Vec& x0, const Mat& projector);

// Least-squares B = argmin ||Y_pr B - X_pr||_F with the same pseudoinverse
// policy as the fit.
Mat project_to_state(const KoopmanModel& model, const SnapshotSet& snapshots,
                     double rank_tol = 1e-10);

// The coordinate selector for state-inclusive dictionaries.
Mat state_selector(const Dictionary& dict);

} // namespace spectral
} // namespace koopman
