// Acceptance suite: every criterion pinned to its stated tolerance, one
// PASS/FAIL line each. Returns the number of failed criteria.

#include "koopman/conjugacy.hpp"
#include "koopman/dictionary.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/edmd.hpp"
#include "koopman/equivariance.hpp"
#include "koopman/io.hpp"
#include "koopman/spectral.hpp"
#include "koopman/stitching.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace koopman;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Dictionary theta_dict() {
    return dict::custom(2, {{{1.0, {1, 0}}}, {{1.0, {0, 1}}}, {{1.0, {2, 0}}}});
}

Mat toggle_k_right_reference() {
    Mat k(2, 2);
    k << 0.6039, 0.0313, -0.4784, 1.0375;
    return k;
}
Mat toggle_k_left_reference() {
    Mat k(2, 2);
    k << 1.0375, -0.4784, 0.0313, 0.6039;
    return k;
}
Mat bilinear_k_right_reference() {
    Mat k(2, 2);
    k << 0.9782, 0.0253, 0.7755, -0.0955;
    return k;
}
Mat bilinear_k_left_reference() {
    Mat k(2, 2);
    k << 0.9782, -0.0253, -0.7755, -0.0955;
    return k;
}

// repro sampling configs (kept in lockstep with the CLI `repro` command)
constexpr double kToggleDt = 1.25;
constexpr std::uint64_t kToggleSeed = 8;
constexpr double kBilinearDt = 0.75;
constexpr int kBilinearSubsteps = 15;
constexpr std::uint64_t kBilinearSeed = 11;

Mat all_states(const std::vector<Trajectory>& trajs, const SnapshotSet& snaps) {
    Mat all(snaps.size() + static_cast<std::int64_t>(trajs.size()), snaps.dim());
    all.topRows(snaps.size()) = snaps.x_pr;
    for (std::size_t i = 0; i < trajs.size(); ++i)
        all.row(snaps.size() + static_cast<std::int64_t>(i)) =
            trajs[i].states.row(trajs[i].length() - 1);
    return all;
}

struct CaseData {
    VectorField field;
    Box box;
    std::vector<Trajectory> trajs;
    SnapshotSet snaps;
    std::vector<Trajectory> left, right;
};

CaseData simulate_case(const std::string& preset, double dt, int substeps,
                       const Vec& left_normal) {
    CaseData c;
    c.field = dynamics::preset(preset);
    c.box = dynamics::default_box(preset);
    const Mat ics = dynamics::sample_grid(c.box, {9, 9});
    c.trajs = dynamics::integrate_batch(c.field, ics, dt, 20, substeps);
    c.snaps = dynamics::make_snapshots(c.trajs);
    for (const auto& t : c.trajs) {
        const double s = left_normal.dot(t.initial_condition);
        if (s > 0)
            c.left.push_back(t);
        else if (s < 0)
            c.right.push_back(t);
    }
    return c;
}

KoopmanModel fit_rbf30(const std::vector<Trajectory>& trajs, std::uint64_t seed,
                       const std::string& tag) {
    const SnapshotSet snaps = dynamics::make_snapshots(trajs);
    return edmd::fit(snaps, dict::rbf_from_data(all_states(trajs, snaps), 30, 0.4, seed), tag);
}

Vec nearest_cell(const Box& box, int per_axis, const Vec& target) {
    Vec cell(target.size());
    for (std::int64_t a = 0; a < target.size(); ++a) {
        const double step = (box.hi(a) - box.lo(a)) / (per_axis - 1);
        cell(a) = box.lo(a) + step * std::round((target(a) - box.lo(a)) / step);
    }
    return cell;
}

bool peaks_cover_targets(const std::vector<AttractorPeak>& peaks, const Box& box,
                         const std::vector<Vec>& equilibria, std::string& detail) {
    for (const auto& eq : equilibria) {
        const Vec cell = nearest_cell(box, 41, eq);
        bool found = false;
        for (const auto& p : peaks)
            if ((p.peak_point - cell).norm() < 1e-9) found = true;
        if (!found) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "no peak at cell (%g, %g)", cell(0), cell(1));
            detail += buf;
            return false;
        }
    }
    return true;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// ---------------------------------------------------------------------------

void criterion_1_linear_recovery() {
    const auto t0 = std::chrono::steady_clock::now();
    Mat a(2, 2);
    a << 0.9, 0.1, 0.0, 0.8;
    std::mt19937_64 rng(11);
    SnapshotSet snaps;
    snaps.dt = 0.1;
    snaps.x_pr.resize(50, 2);
    for (std::int64_t i = 0; i < 50; ++i)
        for (std::int64_t j = 0; j < 2; ++j)
            snaps.x_pr(i, j) = 4.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 2.0;
    snaps.x_fw = snaps.x_pr * a;

    const KoopmanModel model = edmd::fit(snaps, dict::identity(2), "linear");
    const double err = (model.k_matrix - a).cwiseAbs().maxCoeff();
    const double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "linear recovery max|K - A| = %.2e (tol 1e-10), %.2fs (limit 1s)", err, secs);
    report(1, err < 1e-10 && secs < 1.0, buf);
}

void criterion_2_analytic_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const VectorField t2 = dynamics::preset("tc_t2");
    const Mat ics = dynamics::sample_grid(dynamics::default_box("tc_t2"), {9, 9});
    const auto trajs = dynamics::integrate_batch(t2, ics, 0.1, 20);
    const KoopmanModel model =
        edmd::fit(dynamics::make_snapshots(trajs), theta_dict(), "t2");

    Mat expected = Mat::Zero(3, 3);
    expected(0, 0) = std::exp(-0.1);
    expected(1, 1) = std::exp(-0.1);
    expected(2, 2) = std::exp(-0.2);
    const double err = (model.k_matrix - expected).cwiseAbs().maxCoeff();
    const double secs = seconds_since(t0);
    char buf[180];
    std::snprintf(buf, sizeof(buf),
                  "K vs diag(e^-0.1, e^-0.1, e^-0.2) max err = %.2e (tol 1e-6), %.2fs (limit 5s)",
                  err, secs);
    report(2, err < 1e-6 && secs < 5.0, buf);
}

void criterion_3_conjugacy_identities() {
    const Homeomorphism h = homeo::shear_quadratic();
    const Box box = dynamics::default_box("tc_t2");
    const VectorField t2 = dynamics::preset("tc_t2");
    const Mat ics = dynamics::sample_grid(box, {9, 9});
    const auto trajs = dynamics::integrate_batch(t2, ics, 0.1, 20);
    const ConjugatePair pair =
        conjugacy::conjugate_fit(dynamics::make_snapshots(trajs), theta_dict(), h, box);

    const double k_gap = (pair.theta.k_matrix - pair.psi.k_matrix).cwiseAbs().maxCoeff();
    const EigCorrespondence corr = conjugacy::eig_correspondence(pair.theta, pair.psi, h, box);
    const Mat selector = spectral::state_selector(pair.theta.dictionary);
    const ModeEquality modes =
        conjugacy::mode_equality(pair.theta, pair.psi, vec2(1.0, 1.0), h, selector);

    const bool pass = k_gap < 1e-10 && corr.max_eigenvalue_gap < 1e-10 &&
                      modes.max_mode_deviation < 1e-8 && modes.max_group_angle < 1e-6 &&
                      modes.max_group_term_deviation < 1e-8;
    char buf[220];
    std::snprintf(buf, sizeof(buf),
                  "|K_psi - K_theta| = %.2e (1e-10), spectrum gap = %.2e (1e-10), mode dev = "
                  "%.2e (1e-8), group angle = %.2e (1e-6)",
                  k_gap, corr.max_eigenvalue_gap, modes.max_mode_deviation,
                  modes.max_group_angle);
    report(3, pass, buf);
}

CaseData g_toggle;    // reused by criteria 4, 6, 7
CaseData g_bilinear;  // reused by criteria 5, 6, 7

void criterion_4_toggle_census() {
    const auto t0 = std::chrono::steady_clock::now();
    g_toggle = simulate_case("toggle_switch", kToggleDt, 1, vec2(-1.0, 1.0));
    const KoopmanModel model = fit_rbf30(g_toggle.trajs, kToggleSeed, "global");
    const SpectralReport spec = spectral::analyze(model, 0.05);
    const auto peaks = spectral::localize_attractors(model, spec, g_toggle.box, {41, 41});

    std::string detail;
    const bool census_ok = spec.algebraic_multiplicity_at_one == 2;
    const bool peaks_ok = peaks_cover_targets(peaks, g_toggle.box,
                                              {vec2(2.0, 0.16), vec2(0.16, 2.0)}, detail);
    const double secs = seconds_since(t0);
    char buf[220];
    std::snprintf(buf, sizeof(buf),
                  "toggle census = %d (want 2), peaks at nearest cells %s%s, %.2fs (limit 30s)",
                  spec.algebraic_multiplicity_at_one, peaks_ok ? "ok" : "MISS ",
                  detail.c_str(), secs);
    report(4, census_ok && peaks_ok && secs < 30.0, buf);
}

void criterion_5_bilinear_census() {
    g_bilinear =
        simulate_case("bilinear_quadratic", kBilinearDt, kBilinearSubsteps, vec2(-1.0, 0.0));
    const KoopmanModel model = fit_rbf30(g_bilinear.trajs, kBilinearSeed, "global");
    const SpectralReport spec = spectral::analyze(model, 0.05);
    const auto peaks = spectral::localize_attractors(model, spec, g_bilinear.box, {41, 41});

    std::string detail;
    const bool census_ok = spec.algebraic_multiplicity_at_one == 3;
    const bool peaks_ok = peaks_cover_targets(
        peaks, g_bilinear.box,
        {vec2(std::sqrt(2.0), 1.0), vec2(-std::sqrt(2.0), 1.0), vec2(0.0, 0.0)}, detail);
    char buf[220];
    std::snprintf(buf, sizeof(buf), "bilinear census = %d (want 3), peaks at nearest cells %s%s",
                  spec.algebraic_multiplicity_at_one, peaks_ok ? "ok" : "MISS ", detail.c_str());
    report(5, census_ok && peaks_ok, buf);
}

void criterion_6_stitching_algebra() {
    bool pass = true;
    std::string detail;

    struct Setup {
        const CaseData* data;
        Vec left_normal;
        std::uint64_t seed;
        const char* name;
    };
    const std::vector<Setup> setups = {
        {&g_toggle, vec2(-1.0, 1.0), kToggleSeed, "toggle"},
        {&g_bilinear, vec2(-1.0, 0.0), kBilinearSeed, "bilinear"}};

    for (const auto& s : setups) {
        const KoopmanModel k_left = fit_rbf30(s.data->left, s.seed, "M_left");
        const KoopmanModel k_right = fit_rbf30(s.data->right, s.seed, "M_right");
        SubspacePredicate pl, pr;
        pl.name = "left";
        pl.normal = s.left_normal;
        pl.offset = 0.0;
        pr.name = "right";
        pr.normal = -s.left_normal;
        pr.offset = 0.0;
        const StitchedModel stitched =
            stitching::stitch({{pl, k_left}, {pr, k_right}}, s.data->box);

        const CVec dense = stitching::spectrum_dense(stitched);
        const CVec unioned = stitching::spectrum_union(stitched);
        const double gap = (dense - unioned).cwiseAbs().maxCoeff();

        double off_block = 0.0;
        const int n0 = k_left.n_obs();
        off_block = std::max(off_block,
                             stitched.k_s.topRightCorner(n0, stitched.total_obs - n0)
                                 .cwiseAbs()
                                 .maxCoeff());
        off_block = std::max(off_block,
                             stitched.k_s.bottomLeftCorner(stitched.total_obs - n0, n0)
                                 .cwiseAbs()
                                 .maxCoeff());

        const bool size_ok = stitched.total_obs == 60;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "[%s union gap %.1e off-block %.1e size %dx%d] ",
                      s.name, gap, off_block, stitched.total_obs, stitched.total_obs);
        detail += buf;
        pass = pass && gap < 1e-10 && off_block == 0.0 && size_ok;
    }
    report(6, pass, "stitched spectra = union of local spectra, 60x60 vs global 30x30: " + detail);
}

void criterion_7_transport() {
    // conjugating the reference right matrices must reproduce the reference
    // left matrices at the tabulated 4-decimal precision
    const GroupAction swap = equivariance::with_identity_dict_rep(equivariance::swap_action());
    const GroupAction reflect =
        equivariance::with_identity_dict_rep(equivariance::reflect_axis_action(0, 2));

    KoopmanModel reference_right;
    reference_right.k_matrix = toggle_k_right_reference();
    reference_right.dictionary = dict::identity(2);
    reference_right.domain_tag = "M_right";
    reference_right.dt = kToggleDt;
    const double toggle_exact =
        (equivariance::transport(reference_right, swap.rep).k_matrix - toggle_k_left_reference())
            .cwiseAbs()
            .maxCoeff();

    reference_right.k_matrix = bilinear_k_right_reference();
    const double bilinear_exact =
        (equivariance::transport(reference_right, reflect.rep).k_matrix - bilinear_k_left_reference())
            .cwiseAbs()
            .maxCoeff();

    // reproducing the reference matrices from simulation, 10% relative
    // Frobenius; the reference toggle pair corresponds to our half-plane fits
    // with the region labels exchanged (documented in the README)
    auto fit_dmd = [](const std::vector<Trajectory>& trajs, const char* tag) {
        return edmd::fit(dynamics::make_snapshots(trajs), dict::identity(2), tag);
    };
    const Mat toggle_left_map =
        fit_dmd(g_toggle.left, "M_left").k_matrix.transpose();  // state-column map
    const Mat toggle_right_map = fit_dmd(g_toggle.right, "M_right").k_matrix.transpose();
    const double toggle_err_a =
        (toggle_left_map - toggle_k_right_reference()).norm() / toggle_k_right_reference().norm();
    const double toggle_err_b =
        (toggle_right_map - toggle_k_left_reference()).norm() / toggle_k_left_reference().norm();

    const Mat bilinear_right_map = fit_dmd(g_bilinear.right, "M_right").k_matrix.transpose();
    const double bilinear_err =
        (bilinear_right_map - bilinear_k_right_reference()).norm() / bilinear_k_right_reference().norm();

    const bool pass = toggle_exact < 5e-5 && bilinear_exact < 5e-5 && toggle_err_a < 0.10 &&
                      toggle_err_b < 0.10 && bilinear_err < 0.10;
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "reference-matrix conjugation err %.1e / %.1e (4-decimal exact); simulated DMD vs "
                  "reference: toggle %.1f%% / %.1f%%, bilinear %.1f%% (limit 10%%)",
                  toggle_exact, bilinear_exact, 100.0 * toggle_err_a, 100.0 * toggle_err_b,
                  100.0 * bilinear_err);
    report(7, pass, buf);
}

void criterion_8_property_suites() {
    bool pass = true;
    std::string detail;

    {  // RK4 order ratio
        VectorField decay;
        decay.name = "decay";
        decay.dim = 1;
        decay.rhs = [](const Vec& x) { return Vec(-x); };
        Vec one(1);
        one << 1.0;
        const double exact = std::exp(-0.1);
        const double e_full =
            std::abs(dynamics::integrate(decay, one, 0.1, 1).states(1, 0) - exact);
        const double e_half =
            std::abs(dynamics::integrate(decay, one, 0.05, 2).states(2, 0) - exact);
        const double ratio = e_full / e_half;
        pass = pass && ratio >= 14.0 && ratio <= 18.0;
        detail += "rk4 ratio " + std::to_string(ratio).substr(0, 5) + "; ";
    }
    {  // least-squares local optimality
        const SnapshotSet snaps = g_toggle.snaps;
        const Dictionary d = dict::rbf_from_data(snaps.x_pr, 20, 0.4, 3);
        const KoopmanModel model = edmd::fit(snaps, d, "toggle");
        const Mat y_pr = dict::evaluate(d, snaps.x_pr);
        const Mat y_fw = dict::evaluate(d, snaps.x_fw);
        const double base = (y_pr * model.k_matrix - y_fw).norm();
        std::mt19937_64 rng(55);
        bool optimal = true;
        for (int trial = 0; trial < 50; ++trial) {
            Mat delta(model.n_obs(), model.n_obs());
            for (std::int64_t i = 0; i < delta.size(); ++i)
                delta.data()[i] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
            delta *= 1e-3 / delta.norm();
            optimal = optimal &&
                      (y_pr * (model.k_matrix + delta) - y_fw).norm() >= base - 1e-12;
        }
        pass = pass && optimal;
        detail += std::string("ls-optimality ") + (optimal ? "ok" : "FAIL") + "; ";

        {  // similarity spectrum invariance
            const SpectralReport base_spec = spectral::analyze(model);
            Mat gamma = Mat::Identity(model.n_obs(), model.n_obs());
            for (std::int64_t i = 0; i < gamma.rows(); ++i)
                for (std::int64_t j = 0; j < gamma.cols(); ++j)
                    gamma(i, j) += 0.3 * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
            KoopmanModel similar = model;
            similar.k_matrix = gamma.partialPivLu().solve(model.k_matrix * gamma);
            const SpectralReport other = spectral::analyze(similar);
            const double gap = (base_spec.eigenvalues - other.eigenvalues).cwiseAbs().maxCoeff();
            pass = pass && gap <= 1e-8;
            detail += "similarity " + std::to_string(gap).substr(0, 8) + "; ";
        }
        {  // eigenpair residuals
            const SpectralReport spec = spectral::analyze(model);
            const bool ok = spec.max_eigenpair_residual <= 1e-8 * spec.k_frobenius;
            pass = pass && ok;
            detail += std::string("eigpair residual ") + (ok ? "ok" : "FAIL") + "; ";
        }
    }
    {  // involution transport round trip
        const GroupAction swap =
            equivariance::with_identity_dict_rep(equivariance::swap_action());
        KoopmanModel m;
        m.k_matrix = toggle_k_right_reference();
        m.dictionary = dict::identity(2);
        m.domain_tag = "M_right";
        m.dt = kToggleDt;
        const KoopmanModel twice =
            equivariance::transport(equivariance::transport(m, swap.rep), swap.rep);
        const double err = (twice.k_matrix - m.k_matrix).cwiseAbs().maxCoeff();
        pass = pass && err <= 1e-12;
        detail += "involution " + std::to_string(err).substr(0, 8) + "; ";
    }
    {  // KMD reconstruction of a diagonalizable fixture
        Mat a(2, 2);
        a << 0.9, 0.1, 0.05, 0.7;
        SnapshotSet snaps;
        snaps.dt = 1.0;
        std::mt19937_64 rng(8);
        snaps.x_pr.resize(40, 2);
        for (std::int64_t i = 0; i < snaps.x_pr.size(); ++i)
            snaps.x_pr.data()[i] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
        snaps.x_fw = snaps.x_pr * a;
        const KoopmanModel model = edmd::fit(snaps, dict::identity(2), "lin");
        const SpectralReport spec = spectral::analyze(model);
        const KoopmanModes modes =
            spectral::koopman_modes(model, spec, vec2(0.8, -0.6), Mat::Identity(2, 2));
        Eigen::RowVector2d truth(0.8, -0.6);
        double worst = 0.0;
        for (int n = 0; n <= 20; ++n) {
            worst = std::max(worst, (modes.reconstruct(n).transpose() - truth).norm());
            truth = truth * a;
        }
        pass = pass && worst <= 1e-8;
        detail += "kmd " + std::to_string(worst).substr(0, 8) + "; ";
    }
    {  // update dichotomy with tol = 1e-3
        std::vector<Trajectory> left_trajs;
        Mat left_pts(static_cast<std::int64_t>(g_toggle.left.size()), 2);
        for (std::size_t i = 0; i < g_toggle.left.size(); ++i) {
            left_trajs.push_back(g_toggle.left[i]);
            left_pts.row(static_cast<std::int64_t>(i)) =
                g_toggle.left[i].initial_condition.transpose();
        }
        Mat right_pts(static_cast<std::int64_t>(g_toggle.right.size()), 2);
        for (std::size_t i = 0; i < g_toggle.right.size(); ++i)
            right_pts.row(static_cast<std::int64_t>(i)) =
                g_toggle.right[i].initial_condition.transpose();

        const KoopmanModel left_model =
            edmd::fit(dynamics::make_snapshots(left_trajs), dict::identity(2), "M_left");
        const bool reuse_ok =
            edmd::subspace_update_decision(left_model, left_pts, left_pts.topRows(6),
                                           g_toggle.field, 20, 1e-3) ==
            edmd::UpdateDecision::reuse;
        const bool refit_ok =
            edmd::subspace_update_decision(left_model, left_pts, right_pts, g_toggle.field, 20,
                                           1e-3) == edmd::UpdateDecision::refit;
        pass = pass && reuse_ok && refit_ok;
        detail += std::string("dichotomy ") +
                  (reuse_ok && refit_ok ? "reuse/refit ok" : "FAIL");
    }
    report(8, pass, detail);
}

void criterion_9_determinism() {
    const std::string cli = KOOPMAN_CLI_PATH;
    const fs::path base = fs::temp_directory_path() / "koopman_acceptance";
    fs::remove_all(base);
    const fs::path a = base / "run_a", b = base / "run_b";

    const auto run = [&](const fs::path& dir) {
        const std::string cmd =
            cli + " repro toggle --out-dir " + dir.string() + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };
    if (!run(a) || !run(b)) {
        report(9, false, "repro toggle did not complete");
        return;
    }

    std::size_t compared = 0;
    bool identical = true;
    std::string first_diff;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a);
        ++compared;
        if (!fs::exists(b / rel) || read_file(entry.path()) != read_file(b / rel)) {
            identical = false;
            if (first_diff.empty()) first_diff = rel.string();
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "repro toggle twice: %zu files byte-compared%s%s", compared,
                  identical ? ", all identical" : ", DIFFERS at ", first_diff.c_str());
    report(9, identical && compared > 0, buf);
}

} // namespace

int main() {
    const std::pair<int, void (*)()> criteria[] = {
        {1, criterion_1_linear_recovery}, {2, criterion_2_analytic_oracle},
        {3, criterion_3_conjugacy_identities}, {4, criterion_4_toggle_census},
        {5, criterion_5_bilinear_census}, {6, criterion_6_stitching_algebra},
        {7, criterion_7_transport}, {8, criterion_8_property_suites},
        {9, criterion_9_determinism}};
    for (const auto& [number, body] : criteria) {
        try {
            body();
        } catch (const std::exception& e) {
            report(number, false, std::string("threw: ") + e.what());
        }
    }
    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures;
}
