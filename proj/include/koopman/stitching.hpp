#pragma once

#include "koopman/edmd.hpp"
#include "koopman/spectral.hpp"
#include "koopman/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace koopman {

// Half-plane membership test x . normal > offset (or >= for the closure).
// Measure-zero boundary points are claimed by the first-listed predicate
// whose closure contains them.
struct SubspacePredicate {
    std::string name;
    Vec normal;
    double offset = 0.0;
    bool strict = true;

    bool contains(const Vec& x) const {
        const double s = normal.dot(x);
        return strict ? s > offset : s >= offset;
    }
    bool closure_contains(const Vec& x) const { return normal.dot(x) >= offset; }
};

// Block-diagonal composite of local Koopman operators over a disjoint
// partition, with characteristic-function gated observables.
struct StitchedModel {
    std::vector<std::pair<SubspacePredicate, KoopmanModel>> blocks;
    std::vector<int> offsets;  // start of each block in stitched coordinates
    int total_obs = 0;         // L
    Mat k_s;                   // dense L x L, materialized when L <= 512
    bool dense_available = false;

    // first predicate claiming x (strict test first, then closures in listed
    // order); -1 when no predicate claims the point
    int claim(const Vec& x) const;
    // number of predicates whose strict test passes
    int strict_hits(const Vec& x) const;
};

struct StitchedValidation {
    double unit_tol = 0.0;
    int unit_census = 0;
    std::vector<int> block_of_unit_eig;
    std::vector<AttractorPeak> peaks;  // gated density peaks, one per unit eig
};

namespace stitching {

// Predicates must be pairwise disjoint on a validation grid over `box`
// (>= 1000 points); violations raise OverlappingSubspaces.
StitchedModel stitch(std::vector<std::pair<SubspacePredicate, KoopmanModel>> blocks,
                     const Box& box, int validation_samples_per_axis = 32);

// concat_i chi_i(x) Psi_i(x); exactly one block is active.
Vec stitched_evaluate(const StitchedModel& model, const Vec& x);

// Rows Psi(x0) * K_S^j; block invariance keeps all inactive blocks zero.
Mat stitched_predict(const StitchedModel& model, const Vec& x0, int n_steps);

// Spectrum as the multiset union of the local spectra (sorted).
CVec spectrum_union(const StitchedModel& model);

// Spectrum of the dense K_S, the independent route for the union identity.
CVec spectrum_dense(const StitchedModel& model);

StitchedValidation validate_stitched(const StitchedModel& model, double unit_tol,
                                     const Box& box, const std::vector<int>& counts);

// Integrates `field` from x0 and reports the first step at which the claimed
// block differs from x0's (-1 if confined); the boundary-crossing diagnostic
// for numerically non-invariant partitions.
int check_block_confinement(const StitchedModel& model, const VectorField& field,
                            const Vec& x0, int n_steps, int substeps = 1);

} // namespace stitching
} // namespace koopman
