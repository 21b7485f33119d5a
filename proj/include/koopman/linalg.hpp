#pragma once

#include "koopman/types.hpp"

namespace koopman::linalg {

struct Pinv {
    Mat matrix;       // Moore-Penrose inverse with truncated spectrum
    int rank = 0;     // singular values kept
    double sigma_max = 0.0;
};

// SVD pseudoinverse; singular values below rank_tol * sigma_max are dropped.
Pinv pinv(const Mat& a, double rank_tol);

// Number of singular values above rel_cutoff * sigma_max.
int svd_rank(const Mat& a, double rel_cutoff);

// sigma_max / sigma_min (inf for rank-deficient input).
double condition_number(const Mat& a);
double condition_number(const CMat& a);

// Principal angles (radians, ascending) between the column spans of a and b.
Vec principal_angles(const CMat& a, const CMat& b);

// Eigenvalues sorted by the project-wide convention:
// descending |lambda|, ties broken by descending real then imaginary part.
bool eig_less(const Complex& a, const Complex& b);

} // namespace koopman::linalg
