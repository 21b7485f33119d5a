#pragma once

#include "koopman/types.hpp"

#include <vector>

namespace koopman {

// coeff * prod_d x_d^exponents[d]
struct PolyTerm {
    double coeff = 0.0;
    std::vector<int> exponents;
};

// A scalar observable written as a sum of monomial terms.
using PolyObservable = std::vector<PolyTerm>;

inline double eval_poly(const PolyObservable& obs, const Vec& x) {
    double acc = 0.0;
    for (const auto& term : obs) {
        double t = term.coeff;
        for (std::size_t d = 0; d < term.exponents.size(); ++d) {
            for (int e = 0; e < term.exponents[d]; ++e) t *= x(static_cast<std::int64_t>(d));
        }
        acc += t;
    }
    return acc;
}

} // namespace koopman
