// Serial vs OpenMP throughput comparison for the data-parallel kernels.

#include "koopman/dictionary.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/kernels.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

using namespace koopman;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-22s serial %8.2f ms   parallel %8.2f ms   speedup %5.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    std::mt19937_64 rng(42);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    const std::int64_t n_pts = 20000, n_centers = 64, dim = 2;
    Mat states(n_pts, dim), centers(n_centers, dim);
    for (std::int64_t i = 0; i < n_pts; ++i)
        for (std::int64_t c = 0; c < dim; ++c) states(i, c) = 4.0 * unit();
    for (std::int64_t i = 0; i < n_centers; ++i)
        for (std::int64_t c = 0; c < dim; ++c) centers(i, c) = 4.0 * unit();

    {
        Mat out;
        const double s = time_ms([&] { kernels::rbf_evaluate_serial(states, centers, 0.4, out); }, 9);
        const double p =
            time_ms([&] { kernels::rbf_evaluate_parallel(states, centers, 0.4, out); }, 9);
        report("rbf_evaluate", s, p);
    }
    {
        std::vector<int> assign;
        const double s =
            time_ms([&] { kernels::nearest_center_serial(states, centers, assign); }, 9);
        const double p =
            time_ms([&] { kernels::nearest_center_parallel(states, centers, assign); }, 9);
        report("nearest_center", s, p);
    }
    {
        Mat values;
        kernels::rbf_evaluate_parallel(states, centers, 0.4, values);
        CVec coeff(n_centers);
        for (std::int64_t i = 0; i < n_centers; ++i) coeff(i) = Complex(unit(), unit());
        Vec out;
        const double s = time_ms([&] { kernels::abs_projection_serial(values, coeff, out); }, 9);
        const double p = time_ms([&] { kernels::abs_projection_parallel(values, coeff, out); }, 9);
        report("abs_projection", s, p);
    }
    {
        const VectorField field = dynamics::preset("toggle_switch");
        const Mat ics = dynamics::sample_grid(dynamics::default_box("toggle_switch"), {24, 24});
        auto body = [&](std::int64_t i) {
            (void)dynamics::integrate(field, ics.row(i).transpose(), 0.1, 200);
        };
        const double s = time_ms([&] { kernels::index_apply_serial(ics.rows(), body); }, 5);
        const double p = time_ms([&] { kernels::index_apply_parallel(ics.rows(), body); }, 5);
        report("batch_integrate", s, p);
    }
    return 0;
}
