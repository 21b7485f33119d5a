#include "koopman/dictionary.hpp"

#include "koopman/errors.hpp"
#include "koopman/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace koopman {

std::string to_string(DictKind kind) {
    switch (kind) {
        case DictKind::identity: return "identity";
        case DictKind::rbf: return "rbf";
        case DictKind::polynomial: return "polynomial";
        case DictKind::custom: return "custom";
        case DictKind::composed: return "composed";
    }
    return "identity";
}

DictKind dict_kind_from_string(const std::string& s) {
    if (s == "identity") return DictKind::identity;
    if (s == "rbf") return DictKind::rbf;
    if (s == "polynomial") return DictKind::polynomial;
    if (s == "custom") return DictKind::custom;
    if (s == "composed") return DictKind::composed;
    throw UnknownPreset("dictionary kind " + s);
}

int Dictionary::n_obs() const {
    switch (kind) {
        case DictKind::identity: return dim;
        // only the rbf factory physically prepends coordinate observables;
        // for polynomial/custom kinds state_inclusive records a detected
        // property of the listed observables
        case DictKind::rbf: return (state_inclusive ? dim : 0) + static_cast<int>(centers.rows());
        case DictKind::polynomial: return static_cast<int>(exponents.size());
        case DictKind::custom: return static_cast<int>(observables.size());
        case DictKind::composed: return base->n_obs();
    }
    return 0;
}

Vec Dictionary::evaluate_one(const Vec& x) const {
    const Mat row = dict::evaluate(*this, x.transpose());
    return row.row(0).transpose();
}

namespace dict {

Dictionary identity(int dim) {
    Dictionary d;
    d.kind = DictKind::identity;
    d.dim = dim;
    d.state_inclusive = true;  // the coordinates are the observables
    return d;
}

Dictionary rbf(Mat centers, double sigma, bool state_inclusive) {
    if (sigma <= 0.0) throw ShapeMismatch("rbf width sigma must be positive");
    if (centers.rows() == 0) throw EmptyInput("rbf dictionary needs at least one center");
    Dictionary d;
    d.kind = DictKind::rbf;
    d.dim = static_cast<int>(centers.cols());
    d.state_inclusive = state_inclusive;
    d.centers = std::move(centers);
    d.sigma = sigma;
    return d;
}

Dictionary polynomial(int dim, std::vector<std::vector<int>> exponents) {
    Dictionary d;
    d.kind = DictKind::polynomial;
    d.dim = dim;
    for (const auto& e : exponents)
        if (static_cast<int>(e.size()) != dim)
            throw ShapeMismatch("exponent tuple size does not match dimension");
    d.exponents = std::move(exponents);
    // detect the first-n-coordinates contract
    d.state_inclusive = static_cast<int>(d.exponents.size()) >= dim;
    for (int i = 0; i < dim && d.state_inclusive; ++i)
        for (int c = 0; c < dim; ++c)
            if (d.exponents[i][c] != (c == i ? 1 : 0)) d.state_inclusive = false;
    return d;
}

namespace {
bool is_coordinate_observable(const PolyObservable& obs, int axis, int dim) {
    if (obs.size() != 1 || obs[0].coeff != 1.0) return false;
    if (static_cast<int>(obs[0].exponents.size()) != dim) return false;
    for (int c = 0; c < dim; ++c)
        if (obs[0].exponents[c] != (c == axis ? 1 : 0)) return false;
    return true;
}
} // namespace

Dictionary custom(int dim, std::vector<PolyObservable> observables) {
    if (observables.empty()) throw EmptyInput("custom dictionary needs observables");
    Dictionary d;
    d.kind = DictKind::custom;
    d.dim = dim;
    d.observables = std::move(observables);
    d.state_inclusive = static_cast<int>(d.observables.size()) >= dim;
    for (int i = 0; i < dim && d.state_inclusive; ++i)
        if (!is_coordinate_observable(d.observables[i], i, dim)) d.state_inclusive = false;
    return d;
}

Dictionary compose_with_inverse_homeo(const Dictionary& base, const Homeomorphism& h,
                                      const Box& check_box, double tol) {
    if (h.dim != base.dim)
        throw ShapeMismatch("homeomorphism dimension does not match the base dictionary");
    homeo::require_invertible(h, check_box, tol);
    Dictionary d;
    d.kind = DictKind::composed;
    d.dim = base.dim;
    d.state_inclusive = false;
    d.base = std::make_shared<Dictionary>(base);
    d.homeo = std::make_shared<Homeomorphism>(h);
    return d;
}

Mat evaluate(const Dictionary& d, const Mat& states) {
    if (static_cast<int>(states.cols()) != d.dim)
        throw ShapeMismatch("state dimension does not match the dictionary");
    const std::int64_t k = states.rows();
    Mat out;
    switch (d.kind) {
        case DictKind::identity:
            out = states;
            break;
        case DictKind::rbf: {
            Mat gauss;
            kernels::rbf_evaluate(states, d.centers, d.sigma, gauss);
            if (d.state_inclusive) {
                out.resize(k, d.dim + gauss.cols());
                out.leftCols(d.dim) = states;
                out.rightCols(gauss.cols()) = gauss;
            } else {
                out = std::move(gauss);
            }
            break;
        }
        case DictKind::polynomial: {
            out.resize(k, static_cast<std::int64_t>(d.exponents.size()));
            kernels::index_apply(k, [&](std::int64_t i) {
                for (std::size_t j = 0; j < d.exponents.size(); ++j) {
                    double v = 1.0;
                    for (int c = 0; c < d.dim; ++c)
                        for (int e = 0; e < d.exponents[j][static_cast<std::size_t>(c)]; ++e)
                            v *= states(i, c);
                    out(i, static_cast<std::int64_t>(j)) = v;
                }
            });
            break;
        }
        case DictKind::custom: {
            out.resize(k, static_cast<std::int64_t>(d.observables.size()));
            kernels::index_apply(k, [&](std::int64_t i) {
                const Vec x = states.row(i).transpose();
                for (std::size_t j = 0; j < d.observables.size(); ++j)
                    out(i, static_cast<std::int64_t>(j)) = eval_poly(d.observables[j], x);
            });
            break;
        }
        case DictKind::composed: {
            Mat mapped(k, d.dim);
            kernels::index_apply(k, [&](std::int64_t i) {
                mapped.row(i) = d.homeo->inverse(states.row(i).transpose()).transpose();
            });
            return evaluate(*d.base, mapped);
        }
    }
    if (!out.allFinite())
        throw NonFiniteObservable("dictionary evaluation produced NaN/Inf");
    return out;
}

namespace {

double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::int64_t count_distinct_rows(const Mat& points) {
    std::vector<std::int64_t> idx(static_cast<std::size_t>(points.rows()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i);
    auto row_less = [&](std::int64_t a, std::int64_t b) {
        for (std::int64_t c = 0; c < points.cols(); ++c) {
            if (points(a, c) < points(b, c)) return true;
            if (points(a, c) > points(b, c)) return false;
        }
        return false;
    };
    std::sort(idx.begin(), idx.end(), row_less);
    std::int64_t distinct = points.rows() > 0 ? 1 : 0;
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (row_less(idx[i - 1], idx[i])) ++distinct;
    return distinct;
}

void sort_rows_lexicographic(Mat& m) {
    std::vector<std::int64_t> idx(static_cast<std::size_t>(m.rows()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i);
    std::sort(idx.begin(), idx.end(), [&](std::int64_t a, std::int64_t b) {
        for (std::int64_t c = 0; c < m.cols(); ++c) {
            if (m(a, c) < m(b, c)) return true;
            if (m(a, c) > m(b, c)) return false;
        }
        return false;
    });
    Mat sorted(m.rows(), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) sorted.row(static_cast<std::int64_t>(i)) = m.row(idx[i]);
    m = std::move(sorted);
}

} // namespace

Mat kmeans(const Mat& points, int n_clusters, std::uint64_t seed) {
    const std::int64_t n = points.rows();
    if (n_clusters < 1) throw ShapeMismatch("n_clusters must be >= 1");
    if (count_distinct_rows(points) < n_clusters)
        throw ShapeMismatch("n_clusters exceeds the number of distinct points");

    std::mt19937_64 rng(seed);
    Mat centers(n_clusters, points.cols());

    // k-means++ seeding: D^2-weighted draws from the data.
    const std::int64_t first = std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(unit_double(rng) * static_cast<double>(n)));
    centers.row(0) = points.row(first);
    Vec min_d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < n_clusters; ++c) {
        double total = 0.0;
        for (std::int64_t i = 0; i < n; ++i) total += min_d2(i);
        const double r = unit_double(rng) * total;
        double cum = 0.0;
        std::int64_t pick = n - 1;
        for (std::int64_t i = 0; i < n; ++i) {
            cum += min_d2(i);
            if (cum > r) {
                pick = i;
                break;
            }
        }
        centers.row(c) = points.row(pick);
        min_d2 = min_d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    // Lloyd iterations; centroid sums accumulated serially in row order so
    // the result does not depend on thread count.
    std::vector<int> assign;
    for (int iter = 0; iter < 300; ++iter) {
        kernels::nearest_center(points, centers, assign);

        int reseeds = 0;
        bool reassign = true;
        while (reassign) {
            reassign = false;
            Mat sums = Mat::Zero(n_clusters, points.cols());
            std::vector<std::int64_t> counts(static_cast<std::size_t>(n_clusters), 0);
            for (std::int64_t i = 0; i < n; ++i) {
                sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
                ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
            }
            int empty = -1;
            for (int c = 0; c < n_clusters; ++c)
                if (counts[static_cast<std::size_t>(c)] == 0) {
                    empty = c;
                    break;
                }
            if (empty >= 0) {
                if (++reseeds > 10)
                    throw DegenerateClustering("cluster stayed empty after 10 reseeds");
                // move the empty cluster onto the point farthest from its center
                std::int64_t far = 0;
                double far_d2 = -1.0;
                for (std::int64_t i = 0; i < n; ++i) {
                    const double d2 =
                        (points.row(i) - centers.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
                    if (d2 > far_d2) {
                        far_d2 = d2;
                        far = i;
                    }
                }
                centers.row(empty) = points.row(far);
                kernels::nearest_center(points, centers, assign);
                reassign = true;
                continue;
            }
            double shift = 0.0;
            for (int c = 0; c < n_clusters; ++c) {
                const Vec mean = sums.row(c).transpose() / static_cast<double>(counts[static_cast<std::size_t>(c)]);
                shift = std::max(shift, (mean - centers.row(c).transpose()).norm());
                centers.row(c) = mean.transpose();
            }
            if (shift < 1e-9) {
                sort_rows_lexicographic(centers);
                return centers;
            }
        }
    }
    sort_rows_lexicographic(centers);
    return centers;
}

Dictionary rbf_from_data(const Mat& states, int n_centers, double sigma,
                         std::uint64_t seed, bool state_inclusive) {
    return rbf(kmeans(states, n_centers, seed), sigma, state_inclusive);
}

} // namespace dict
} // namespace koopman
