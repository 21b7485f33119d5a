#include "koopman/linalg.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace koopman::linalg {

Pinv pinv(const Mat& a, double rank_tol) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    Pinv out;
    out.sigma_max = s.size() > 0 ? s(0) : 0.0;
    const double cutoff = rank_tol * out.sigma_max;
    Vec inv = Vec::Zero(s.size());
    for (std::int64_t i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff && s(i) > 0.0) {
            inv(i) = 1.0 / s(i);
            ++out.rank;
        }
    }
    out.matrix = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    return out;
}

int svd_rank(const Mat& a, double rel_cutoff) {
    Eigen::JacobiSVD<Mat> svd(a);
    const Vec& s = svd.singularValues();
    const double sigma_max = s.size() > 0 ? s(0) : 0.0;
    int rank = 0;
    for (std::int64_t i = 0; i < s.size(); ++i)
        if (s(i) > rel_cutoff * sigma_max && s(i) > 0.0) ++rank;
    return rank;
}

double condition_number(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    const Vec& s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) <= 0.0)
        return std::numeric_limits<double>::infinity();
    return s(0) / (s(s.size() - 1));
}

double condition_number(const CMat& a) {
    Eigen::JacobiSVD<CMat> svd(a);
    const Vec& s = svd.singularValues();
    if (s.size() == 0 || s(s.size() - 1) <= 0.0)
        return std::numeric_limits<double>::infinity();
    return s(0) / (s(s.size() - 1));
}

Vec principal_angles(const CMat& a, const CMat& b) {
    Eigen::HouseholderQR<CMat> qa(a), qb(b);
    const CMat qa_thin = qa.householderQ() * CMat::Identity(a.rows(), a.cols());
    const CMat qb_thin = qb.householderQ() * CMat::Identity(b.rows(), b.cols());
    Eigen::JacobiSVD<CMat> svd(qa_thin.adjoint() * qb_thin);
    Vec angles(svd.singularValues().size());
    // singular values come out descending, so acos gives ascending angles
    for (std::int64_t i = 0; i < angles.size(); ++i)
        angles(i) = std::acos(std::clamp(svd.singularValues()(i), 0.0, 1.0));
    return angles;
}

bool eig_less(const Complex& a, const Complex& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

} // namespace koopman::linalg
