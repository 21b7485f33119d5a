#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <initializer_list>
#include <vector>

namespace koopman {

using Mat  = Eigen::MatrixXd;
using Vec  = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Axis-aligned box, one [lo, hi] interval per state dimension.
struct Box {
    std::vector<std::array<double, 2>> intervals;

    std::size_t dim() const { return intervals.size(); }
    double lo(std::size_t axis) const { return intervals[axis][0]; }
    double hi(std::size_t axis) const { return intervals[axis][1]; }
};

inline Box make_box(std::initializer_list<std::array<double, 2>> iv) {
    Box b;
    b.intervals.assign(iv);
    return b;
}

} // namespace koopman
