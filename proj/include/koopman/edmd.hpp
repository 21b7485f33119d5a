#pragma once

#include "koopman/dictionary.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/types.hpp"

#include <string>
#include <vector>

namespace koopman {

// Finite-dimensional Koopman approximation bound to its dictionary.
// k_matrix acts on observable row vectors: Psi(x_{t+1}) ~= Psi(x_t) * K,
// the least-squares solution of min_K ||Y_pr K - Y_fw||_F^2.
struct KoopmanModel {
    Mat k_matrix;
    Dictionary dictionary;
    std::string domain_tag;
    double dt = 0.0;
    double fit_residual = 0.0;  // ||Y_pr K - Y_fw||_F at the solution
    int rank = 0;               // singular values kept by the pseudoinverse
    bool rank_deficient = false;

    int n_obs() const { return static_cast<int>(k_matrix.rows()); }
};

// values[i] = max over test points of the observable-space prediction error
// after horizon[i] steps.
struct ErrorCurve {
    std::vector<int> horizon;
    std::vector<double> values;
};

namespace edmd {

// K = pinv(Y_pr) * Y_fw via SVD; singular values below rank_tol * sigma_max
// are truncated and the truncation is recorded on the model (not fatal).
KoopmanModel fit(const SnapshotSet& snapshots, const Dictionary& dict,
                 const std::string& domain_tag, double rank_tol = 1e-10);

// Rows Psi(x0) * K^j for j = 0..n_steps. Divergence is allowed.
Mat predict(const KoopmanModel& model, const Vec& x0, int n_steps);

// values[n] = max_{x0 in test_points} ||Psi(T^n(x0)) - Psi(x0) K^n||_2 for
// n = 0..horizon, with T^n obtained by RK4 integration of `field` at the
// model's dt. Parallel over test points with a deterministic reduction.
ErrorCurve error_curve(const KoopmanModel& model, const Mat& test_points,
                       const VectorField& field, int horizon, int substeps = 1);

enum class UpdateDecision { reuse, refit };

// The executable form of the spatial-update dichotomy: reuse when the error
// on new_points at the horizon stays within tol of the error on the training
// points, refit otherwise. Empty new_points trivially reuse.
UpdateDecision subspace_update_decision(const KoopmanModel& model,
                                        const Mat& training_points,
                                        const Mat& new_points,
                                        const VectorField& field, int horizon,
                                        double tol, int substeps = 1);

} // namespace edmd
} // namespace koopman
