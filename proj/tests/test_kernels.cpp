#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "koopman/kernels.hpp"
#include "test_helpers.hpp"

#include <random>

using namespace koopman;

TEST_CASE("serial and parallel kernels agree bitwise") {
    std::mt19937_64 rng(123);
    const Mat states = testing::random_matrix(500, 2, rng, 4.0);
    const Mat centers = testing::random_matrix(30, 2, rng, 4.0);

    Mat s, p;
    kernels::rbf_evaluate_serial(states, centers, 0.4, s);
    kernels::rbf_evaluate_parallel(states, centers, 0.4, p);
    CHECK((s - p).cwiseAbs().maxCoeff() == 0.0);

    std::vector<int> as, ap;
    Vec ds, dp;
    kernels::nearest_center_serial(states, centers, as, &ds);
    kernels::nearest_center_parallel(states, centers, ap, &dp);
    CHECK(as == ap);
    CHECK((ds - dp).cwiseAbs().maxCoeff() == 0.0);

    CVec coeff(centers.rows());
    for (std::int64_t i = 0; i < coeff.size(); ++i)
        coeff(i) = Complex(testing::unit(rng) - 0.5, testing::unit(rng) - 0.5);
    Vec vs, vp;
    kernels::abs_projection_serial(s, coeff, vs);
    kernels::abs_projection_parallel(s, coeff, vp);
    CHECK((vs - vp).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("index_apply covers every index exactly once") {
    std::vector<int> hits(1000, 0);
    kernels::index_apply_parallel(1000, [&](std::int64_t i) { hits[static_cast<std::size_t>(i)]++; });
    for (int h : hits) CHECK(h == 1);
}

TEST_CASE("execution mode switch routes to the same results") {
    std::mt19937_64 rng(7);
    const Mat states = testing::random_matrix(64, 2, rng);
    const Mat centers = testing::random_matrix(8, 2, rng);
    Mat a, b;
    kernels::set_execution(kernels::Exec::serial);
    kernels::rbf_evaluate(states, centers, 0.7, a);
    kernels::set_execution(kernels::Exec::parallel);
    kernels::rbf_evaluate(states, centers, 0.7, b);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}
