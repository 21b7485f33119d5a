#include "koopman/stitching.hpp"

#include "koopman/errors.hpp"
#include "koopman/kernels.hpp"
#include "koopman/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace koopman {

int StitchedModel::claim(const Vec& x) const {
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].first.contains(x)) return static_cast<int>(i);
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].first.closure_contains(x)) return static_cast<int>(i);
    return -1;
}

int StitchedModel::strict_hits(const Vec& x) const {
    int hits = 0;
    for (const auto& [pred, model] : blocks)
        if (pred.contains(x)) ++hits;
    return hits;
}

namespace stitching {

StitchedModel stitch(std::vector<std::pair<SubspacePredicate, KoopmanModel>> blocks,
                     const Box& box, int validation_samples_per_axis) {
    if (blocks.empty()) throw EmptyInput("stitch needs at least one local model");

    StitchedModel model;
    model.blocks = std::move(blocks);
    model.offsets.resize(model.blocks.size());
    int total = 0;
    for (std::size_t i = 0; i < model.blocks.size(); ++i) {
        model.offsets[i] = total;
        total += model.blocks[i].second.n_obs();
    }
    model.total_obs = total;

    // disjointness probe over the working box
    const std::vector<int> counts(box.dim(), validation_samples_per_axis);
    const Mat probe = dynamics::sample_grid(box, counts);
    for (std::int64_t p = 0; p < probe.rows(); ++p) {
        const Vec x = probe.row(p).transpose();
        if (model.strict_hits(x) > 1)
            throw OverlappingSubspaces("two predicates claim a validation point");
    }

    if (total <= 512) {
        model.k_s = Mat::Zero(total, total);
        for (std::size_t i = 0; i < model.blocks.size(); ++i) {
            const Mat& k = model.blocks[i].second.k_matrix;
            model.k_s.block(model.offsets[i], model.offsets[i], k.rows(), k.cols()) = k;
        }
        model.dense_available = true;
    }
    return model;
}

Vec stitched_evaluate(const StitchedModel& model, const Vec& x) {
    const int hits = model.strict_hits(x);
    if (hits > 1) throw AmbiguousPoint("point satisfies more than one predicate");
    const int active = model.claim(x);
    if (active < 0) throw UnclaimedPoint("no predicate claims the point");

    Vec out = Vec::Zero(model.total_obs);
    const auto& block = model.blocks[static_cast<std::size_t>(active)];
    out.segment(model.offsets[static_cast<std::size_t>(active)], block.second.n_obs()) =
        block.second.dictionary.evaluate_one(x);
    return out;
}

Mat stitched_predict(const StitchedModel& model, const Vec& x0, int n_steps) {
    if (n_steps < 0) throw ShapeMismatch("n_steps must be >= 0");
    const int active = model.claim(x0);
    if (model.strict_hits(x0) > 1) throw AmbiguousPoint("ambiguous initial point");
    if (active < 0) throw UnclaimedPoint("no predicate claims the initial point");

    // block invariance: only the active block evolves, other blocks stay zero
    const auto& block = model.blocks[static_cast<std::size_t>(active)];
    const Mat local = edmd::predict(block.second, x0, n_steps);
    Mat rows = Mat::Zero(n_steps + 1, model.total_obs);
    rows.middleCols(model.offsets[static_cast<std::size_t>(active)], block.second.n_obs()) = local;
    return rows;
}

namespace {
CVec sorted_spectrum(CVec values) {
    std::sort(values.data(), values.data() + values.size(), linalg::eig_less);
    return values;
}
} // namespace

CVec spectrum_union(const StitchedModel& model) {
    CVec all(model.total_obs);
    std::int64_t at = 0;
    for (const auto& [pred, local] : model.blocks) {
        Eigen::EigenSolver<Mat> solver(local.k_matrix);
        if (solver.info() != Eigen::Success)
            throw EigenSolverFailure("local spectrum did not converge");
        all.segment(at, local.n_obs()) = solver.eigenvalues();
        at += local.n_obs();
    }
    return sorted_spectrum(std::move(all));
}

CVec spectrum_dense(const StitchedModel& model) {
    if (!model.dense_available)
        throw ShapeMismatch("dense stitched operator not materialized");
    Eigen::EigenSolver<Mat> solver(model.k_s);
    if (solver.info() != Eigen::Success)
        throw EigenSolverFailure("stitched spectrum did not converge");
    return sorted_spectrum(solver.eigenvalues());
}

StitchedValidation validate_stitched(const StitchedModel& model, double unit_tol,
                                     const Box& box, const std::vector<int>& counts) {
    StitchedValidation report;
    report.unit_tol = unit_tol;

    const Mat points = dynamics::sample_grid(box, counts);
    // gate each block's dictionary: rows claimed by other blocks are zero
    std::vector<int> claimed(static_cast<std::size_t>(points.rows()));
    kernels::index_apply(points.rows(), [&](std::int64_t p) {
        claimed[static_cast<std::size_t>(p)] = model.claim(points.row(p).transpose());
    });

    for (std::size_t b = 0; b < model.blocks.size(); ++b) {
        const KoopmanModel& local = model.blocks[b].second;
        const SpectralReport spec = spectral::analyze(local, unit_tol);
        Mat values = dict::evaluate(local.dictionary, points);
        for (std::int64_t p = 0; p < points.rows(); ++p)
            if (claimed[static_cast<std::size_t>(p)] != static_cast<int>(b))
                values.row(p).setZero();

        for (std::int64_t j = 0; j < spec.adjoint_eigenvalues.size(); ++j) {
            if (std::abs(spec.adjoint_eigenvalues(j) - Complex(1.0, 0.0)) >= unit_tol) continue;
            ++report.unit_census;
            report.block_of_unit_eig.push_back(static_cast<int>(b));

            Vec abs_phi;
            kernels::abs_projection(values, spec.adjoint_eigvecs.col(j), abs_phi);
            std::int64_t arg = 0;
            for (std::int64_t p = 1; p < abs_phi.size(); ++p)
                if (abs_phi(p) > abs_phi(arg)) arg = p;
            AttractorPeak peak;
            peak.eig_index = static_cast<int>(j);
            peak.eigenvalue = spec.adjoint_eigenvalues(j);
            peak.peak_point = points.row(arg).transpose();
            peak.peak_value = abs_phi(arg);
            std::vector<std::int64_t> hot;
            for (std::int64_t p = 0; p < abs_phi.size(); ++p)
                if (abs_phi(p) >= 0.9 * peak.peak_value) hot.push_back(p);
            peak.cells_within_90pct.resize(static_cast<std::int64_t>(hot.size()), points.cols());
            for (std::size_t r = 0; r < hot.size(); ++r)
                peak.cells_within_90pct.row(static_cast<std::int64_t>(r)) = points.row(hot[r]);
            report.peaks.push_back(std::move(peak));
        }
    }
    return report;
}

int check_block_confinement(const StitchedModel& model, const VectorField& field,
                            const Vec& x0, int n_steps, int substeps) {
    const int home = model.claim(x0);
    if (home < 0) throw UnclaimedPoint("no predicate claims the initial point");
    Vec x = x0;
    for (int t = 1; t <= n_steps; ++t) {
        x = dynamics::flow_step(field, x, model.blocks.front().second.dt, substeps);
        if (model.claim(x) != home) return t;
    }
    return -1;
}

} // namespace stitching
} // namespace koopman
