#include "koopman/kernels.hpp"

#include <atomic>
#include <cmath>

namespace koopman::kernels {

namespace {
std::atomic<Exec> g_exec{Exec::parallel};

inline double sq_dist_row(const Mat& a, std::int64_t i, const Mat& b, std::int64_t j) {
    double d2 = 0.0;
    for (std::int64_t c = 0; c < a.cols(); ++c) {
        const double d = a(i, c) - b(j, c);
        d2 += d * d;
    }
    return d2;
}
} // namespace

Exec execution() { return g_exec.load(); }
void set_execution(Exec mode) { g_exec.store(mode); }

void rbf_evaluate_serial(const Mat& states, const Mat& centers, double sigma, Mat& out) {
    const std::int64_t k = states.rows(), n = centers.rows();
    const double inv_s2 = 1.0 / (sigma * sigma);
    out.resize(k, n);
    for (std::int64_t i = 0; i < k; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            out(i, j) = std::exp(-sq_dist_row(states, i, centers, j) * inv_s2);
}

void rbf_evaluate_parallel(const Mat& states, const Mat& centers, double sigma, Mat& out) {
    const std::int64_t k = states.rows(), n = centers.rows();
    const double inv_s2 = 1.0 / (sigma * sigma);
    out.resize(k, n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < k; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            out(i, j) = std::exp(-sq_dist_row(states, i, centers, j) * inv_s2);
}

void rbf_evaluate(const Mat& states, const Mat& centers, double sigma, Mat& out) {
    if (execution() == Exec::parallel)
        rbf_evaluate_parallel(states, centers, sigma, out);
    else
        rbf_evaluate_serial(states, centers, sigma, out);
}

namespace {
inline void nearest_one(const Mat& points, const Mat& centers, std::int64_t i,
                        std::vector<int>& assign, Vec* min_d2) {
    double best = sq_dist_row(points, i, centers, 0);
    int best_j = 0;
    for (std::int64_t j = 1; j < centers.rows(); ++j) {
        const double d2 = sq_dist_row(points, i, centers, j);
        if (d2 < best) {
            best = d2;
            best_j = static_cast<int>(j);
        }
    }
    assign[static_cast<std::size_t>(i)] = best_j;
    if (min_d2) (*min_d2)(i) = best;
}
} // namespace

void nearest_center_serial(const Mat& points, const Mat& centers,
                           std::vector<int>& assign, Vec* min_d2) {
    assign.resize(static_cast<std::size_t>(points.rows()));
    if (min_d2) min_d2->resize(points.rows());
    for (std::int64_t i = 0; i < points.rows(); ++i)
        nearest_one(points, centers, i, assign, min_d2);
}

void nearest_center_parallel(const Mat& points, const Mat& centers,
                             std::vector<int>& assign, Vec* min_d2) {
    assign.resize(static_cast<std::size_t>(points.rows()));
    if (min_d2) min_d2->resize(points.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < points.rows(); ++i)
        nearest_one(points, centers, i, assign, min_d2);
}

void nearest_center(const Mat& points, const Mat& centers,
                    std::vector<int>& assign, Vec* min_d2) {
    if (execution() == Exec::parallel)
        nearest_center_parallel(points, centers, assign, min_d2);
    else
        nearest_center_serial(points, centers, assign, min_d2);
}

namespace {
inline double abs_dot(const Mat& values, std::int64_t i, const CVec& coeff) {
    double re = 0.0, im = 0.0;
    for (std::int64_t j = 0; j < values.cols(); ++j) {
        re += values(i, j) * coeff(j).real();
        im += values(i, j) * coeff(j).imag();
    }
    return std::hypot(re, im);
}
} // namespace

void abs_projection_serial(const Mat& values, const CVec& coeff, Vec& out) {
    out.resize(values.rows());
    for (std::int64_t i = 0; i < values.rows(); ++i)
        out(i) = abs_dot(values, i, coeff);
}

void abs_projection_parallel(const Mat& values, const CVec& coeff, Vec& out) {
    out.resize(values.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < values.rows(); ++i)
        out(i) = abs_dot(values, i, coeff);
}

void abs_projection(const Mat& values, const CVec& coeff, Vec& out) {
    if (execution() == Exec::parallel)
        abs_projection_parallel(values, coeff, out);
    else
        abs_projection_serial(values, coeff, out);
}

void index_apply_serial(std::int64_t n, const std::function<void(std::int64_t)>& body) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

void index_apply_parallel(std::int64_t n, const std::function<void(std::int64_t)>& body) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

void index_apply(std::int64_t n, const std::function<void(std::int64_t)>& body) {
    if (execution() == Exec::parallel)
        index_apply_parallel(n, body);
    else
        index_apply_serial(n, body);
}

} // namespace koopman::kernels
