#pragma once

#include "koopman/polynomial.hpp"
#include "koopman/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace koopman {

// Invertible change of coordinates h between two copies of R^dim, with the
// inverse supplied analytically.
struct Homeomorphism {
    std::string kind;  // identity | shear_quadratic | custom_poly
    int dim = 0;
    std::function<Vec(const Vec&)> forward;
    std::function<Vec(const Vec&)> inverse;
    // populated for kind == custom_poly so the map can be serialized
    std::vector<PolyObservable> forward_terms;
    std::vector<PolyObservable> inverse_terms;

    Vec apply(const Vec& y) const { return forward(y); }
    Vec apply_inverse(const Vec& x) const { return inverse(x); }

    // h applied to every row.
    Mat map_rows(const Mat& states) const;
};

namespace homeo {

Homeomorphism identity(int dim);

// h(y) = (y1, y2 - y1^2); its inverse is (x1, x2 + x1^2).
Homeomorphism shear_quadratic();

Homeomorphism custom_poly(std::vector<PolyObservable> forward,
                          std::vector<PolyObservable> inverse);

// Max round-trip defect max(||h_inv(h(y)) - y||, ||h(h_inv(x)) - x||) over a
// deterministic sample of the box.
double round_trip_defect(const Homeomorphism& h, const Box& box, int samples_per_axis = 15);

// Throws InverseRoundTripFailure when the defect exceeds tol.
void require_invertible(const Homeomorphism& h, const Box& box, double tol = 1e-9);

} // namespace homeo
} // namespace koopman
