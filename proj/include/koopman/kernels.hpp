#pragma once

#include "koopman/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

// Data-parallel inner loops, each with a serial reference implementation and
// an OpenMP variant. Every kernel writes disjoint output slots per index, so
// the two variants produce bit-identical results for any thread count.
// tools/bench_kernels.cpp compares their throughput.

namespace koopman::kernels {

enum class Exec { serial, parallel };

Exec execution();
void set_execution(Exec mode);

// out(i, j) = exp(-||states.row(i) - centers.row(j)||^2 / sigma^2)
void rbf_evaluate_serial(const Mat& states, const Mat& centers, double sigma, Mat& out);
void rbf_evaluate_parallel(const Mat& states, const Mat& centers, double sigma, Mat& out);
void rbf_evaluate(const Mat& states, const Mat& centers, double sigma, Mat& out);

// assign[i] = argmin_j ||points.row(i) - centers.row(j)||^2 (lowest j on ties);
// min_d2, when non-null, receives the per-point minimum squared distance.
void nearest_center_serial(const Mat& points, const Mat& centers,
                           std::vector<int>& assign, Vec* min_d2 = nullptr);
void nearest_center_parallel(const Mat& points, const Mat& centers,
                             std::vector<int>& assign, Vec* min_d2 = nullptr);
void nearest_center(const Mat& points, const Mat& centers,
                    std::vector<int>& assign, Vec* min_d2 = nullptr);

// out[i] = |sum_j values(i, j) * coeff[j]|
void abs_projection_serial(const Mat& values, const CVec& coeff, Vec& out);
void abs_projection_parallel(const Mat& values, const CVec& coeff, Vec& out);
void abs_projection(const Mat& values, const CVec& coeff, Vec& out);

// Runs body(i) for i in [0, n); body must only touch state owned by index i.
void index_apply_serial(std::int64_t n, const std::function<void(std::int64_t)>& body);
void index_apply_parallel(std::int64_t n, const std::function<void(std::int64_t)>& body);
void index_apply(std::int64_t n, const std::function<void(std::int64_t)>& body);

} // namespace koopman::kernels
