#include "koopman/homeomorphism.hpp"

#include "koopman/dynamics.hpp"
#include "koopman/errors.hpp"

#include <algorithm>

namespace koopman {

Mat Homeomorphism::map_rows(const Mat& states) const {
    Mat out(states.rows(), states.cols());
    for (std::int64_t i = 0; i < states.rows(); ++i)
        out.row(i) = forward(states.row(i).transpose()).transpose();
    return out;
}

namespace homeo {

Homeomorphism identity(int dim) {
    Homeomorphism h;
    h.kind = "identity";
    h.dim = dim;
    h.forward = [](const Vec& y) { return y; };
    h.inverse = [](const Vec& x) { return x; };
    return h;
}

Homeomorphism shear_quadratic() {
    Homeomorphism h;
    h.kind = "shear_quadratic";
    h.dim = 2;
    h.forward = [](const Vec& y) {
        Vec x(2);
        x(0) = y(0);
        x(1) = y(1) - y(0) * y(0);
        return x;
    };
    h.inverse = [](const Vec& x) {
        Vec y(2);
        y(0) = x(0);
        y(1) = x(1) + x(0) * x(0);
        return y;
    };
    return h;
}

Homeomorphism custom_poly(std::vector<PolyObservable> forward,
                          std::vector<PolyObservable> inverse) {
    if (forward.size() != inverse.size() || forward.empty())
        throw ShapeMismatch("custom_poly maps must have matching nonzero dimension");
    Homeomorphism h;
    h.kind = "custom_poly";
    h.dim = static_cast<int>(forward.size());
    h.forward_terms = std::move(forward);
    h.inverse_terms = std::move(inverse);
    const auto eval_all = [](const std::vector<PolyObservable>& obs, const Vec& v) {
        Vec out(static_cast<std::int64_t>(obs.size()));
        for (std::size_t i = 0; i < obs.size(); ++i)
            out(static_cast<std::int64_t>(i)) = eval_poly(obs[i], v);
        return out;
    };
    h.forward = [terms = h.forward_terms, eval_all](const Vec& y) { return eval_all(terms, y); };
    h.inverse = [terms = h.inverse_terms, eval_all](const Vec& x) { return eval_all(terms, x); };
    return h;
}

double round_trip_defect(const Homeomorphism& h, const Box& box, int samples_per_axis) {
    std::vector<int> counts(box.dim(), samples_per_axis);
    const Mat pts = dynamics::sample_grid(box, counts);
    double defect = 0.0;
    for (std::int64_t i = 0; i < pts.rows(); ++i) {
        const Vec y = pts.row(i).transpose();
        defect = std::max(defect, (h.inverse(h.forward(y)) - y).norm());
        defect = std::max(defect, (h.forward(h.inverse(y)) - y).norm());
    }
    return defect;
}

void require_invertible(const Homeomorphism& h, const Box& box, double tol) {
    const double defect = round_trip_defect(h, box);
    if (!(defect <= tol))
        throw InverseRoundTripFailure("round-trip defect " + std::to_string(defect) +
                                      " exceeds tolerance");
}

} // namespace homeo
} // namespace koopman
