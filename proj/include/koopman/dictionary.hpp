#pragma once

#include "koopman/homeomorphism.hpp"
#include "koopman/polynomial.hpp"
#include "koopman/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace koopman {

enum class DictKind { identity, rbf, polynomial, custom, composed };

std::string to_string(DictKind kind);
DictKind dict_kind_from_string(const std::string& s);

// An evaluable vector of observable functions Psi: R^dim -> R^n_obs.
// Immutable after construction; evaluation is pure.
struct Dictionary {
    DictKind kind = DictKind::identity;
    int dim = 0;
    // When set, the first `dim` observables are the state coordinates; this
    // positional contract is what project_to_state's selector shortcut uses.
    bool state_inclusive = false;

    Mat centers;        // rbf: n_centers x dim
    double sigma = 0.0; // rbf width (global scalar)

    std::vector<std::vector<int>> exponents;  // polynomial: one tuple per observable

    std::vector<PolyObservable> observables;  // custom

    std::shared_ptr<const Dictionary> base;       // composed: evaluate(x) = base(h^-1(x))
    std::shared_ptr<const Homeomorphism> homeo;   // composed

    std::string note;  // free-form provenance marker (e.g. transported coordinates)

    int n_obs() const;
    Vec evaluate_one(const Vec& x) const;
};

namespace dict {

Dictionary identity(int dim);

Dictionary rbf(Mat centers, double sigma, bool state_inclusive = false);

// Centers are k-means centroids of `states` (k-means++ init from `seed`,
// Lloyd iterations until the max centroid shift drops below 1e-9 or 300
// iterations), sorted lexicographically so downstream fits are reproducible.
Dictionary rbf_from_data(const Mat& states, int n_centers, double sigma,
                         std::uint64_t seed, bool state_inclusive = false);

Dictionary polynomial(int dim, std::vector<std::vector<int>> exponents);

Dictionary custom(int dim, std::vector<PolyObservable> observables);

// Dictionary x -> base(h^-1(x)). h must round-trip on check_box within tol.
Dictionary compose_with_inverse_homeo(const Dictionary& base, const Homeomorphism& h,
                                      const Box& check_box, double tol = 1e-9);

// Row-wise application: out.row(i) = Psi(states.row(i)).
// Throws NonFiniteObservable if any entry is NaN/Inf.
Mat evaluate(const Dictionary& d, const Mat& states);

// Exposed for tests: deterministic seeded k-means, centers sorted
// lexicographically. Throws DegenerateClustering when an emptied cluster
// cannot be reseeded within 10 attempts.
Mat kmeans(const Mat& points, int n_clusters, std::uint64_t seed);

} // namespace dict
} // namespace koopman
