#include "koopman/io.hpp"

#include "koopman/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace koopman::io {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json cvec_to_json(const CVec& v) {
    json arr = json::array();
    for (std::int64_t i = 0; i < v.size(); ++i) arr.push_back(complex_to_json(v(i)));
    return arr;
}

json cmat_rows_to_json(const CMat& m) {
    json rows = json::array();
    for (std::int64_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::int64_t j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json mat_rows_to_json(const Mat& m) {
    json rows = json::array();
    for (std::int64_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::int64_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_rows_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw IoError("expected a non-empty matrix");
    const std::int64_t r = static_cast<std::int64_t>(rows.size());
    const std::int64_t c = static_cast<std::int64_t>(rows[0].size());
    Mat m(r, c);
    for (std::int64_t i = 0; i < r; ++i) {
        if (static_cast<std::int64_t>(rows[static_cast<std::size_t>(i)].size()) != c)
            throw IoError("ragged matrix rows");
        for (std::int64_t j = 0; j < c; ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

json poly_obs_to_json(const PolyObservable& obs) {
    json terms = json::array();
    for (const auto& t : obs) terms.push_back(json{{"coeff", t.coeff}, {"exponents", t.exponents}});
    return terms;
}

PolyObservable poly_obs_from_json(const json& j) {
    PolyObservable obs;
    for (const auto& t : j) {
        PolyTerm term;
        term.coeff = t.at("coeff").get<double>();
        term.exponents = t.at("exponents").get<std::vector<int>>();
        obs.push_back(std::move(term));
    }
    return obs;
}

} // namespace

// ---- CSV ----

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << "t";
    for (int c = 0; c < traj.dim(); ++c) out << ",x" << (c + 1);
    out << "\n";
    for (std::int64_t i = 0; i < traj.length(); ++i) {
        out << fmt17(static_cast<double>(i) * traj.dt);
        for (std::int64_t c = 0; c < traj.states.cols(); ++c)
            out << "," << fmt17(traj.states(i, c));
        out << "\n";
    }
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty trajectory file " + path.string());

    std::vector<std::vector<double>> rows;
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 2) throw IoError("trajectory row needs t plus at least one state");
        times.push_back(row.front());
        rows.push_back(std::vector<double>(row.begin() + 1, row.end()));
    }
    if (rows.size() < 2) throw IoError("trajectory needs at least two samples");

    Trajectory traj;
    traj.dt = times[1] - times[0];
    traj.states.resize(static_cast<std::int64_t>(rows.size()),
                       static_cast<std::int64_t>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw IoError("ragged trajectory rows");
        for (std::size_t c = 0; c < rows[i].size(); ++c)
            traj.states(static_cast<std::int64_t>(i), static_cast<std::int64_t>(c)) = rows[i][c];
    }
    traj.initial_condition = traj.states.row(0).transpose();
    return traj;
}

void write_matrix_csv(const std::filesystem::path& path, const std::string& header,
                      const Mat& values) {
    auto out = open_out(path);
    if (!header.empty()) out << header << "\n";
    for (std::int64_t i = 0; i < values.rows(); ++i) {
        for (std::int64_t j = 0; j < values.cols(); ++j)
            out << (j ? "," : "") << fmt17(values(i, j));
        out << "\n";
    }
}

Mat read_matrix_csv(const std::filesystem::path& path, bool expect_header) {
    auto in = open_in(path);
    std::string line;
    std::vector<std::vector<double>> rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && expect_header &&
            line.find_first_not_of("0123456789+-.eE, \t\r") != std::string::npos) {
            first = false;
            continue;
        }
        first = false;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("no data rows in " + path.string());
    Mat m(static_cast<std::int64_t>(rows.size()), static_cast<std::int64_t>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw IoError("ragged csv rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j)) = rows[i][j];
    }
    return m;
}

void write_eigenfunction_grid_csv(const std::filesystem::path& path,
                                  const EigenfunctionGrid& grid) {
    auto out = open_out(path);
    for (std::int64_t c = 0; c < grid.points.cols(); ++c) out << "x" << (c + 1) << ",";
    out << "abs_phi\n";
    for (std::int64_t i = 0; i < grid.points.rows(); ++i) {
        for (std::int64_t c = 0; c < grid.points.cols(); ++c)
            out << fmt17(grid.points(i, c)) << ",";
        out << fmt17(grid.values(i)) << "\n";
    }
}

// ---- JSON ----

json matrix_to_json(const Mat& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", [&] {
                     json flat = json::array();
                     for (std::int64_t i = 0; i < m.rows(); ++i)
                         for (std::int64_t j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
                     return flat;
                 }()}};
}

Mat matrix_from_json(const json& j) {
    const std::int64_t rows = j.at("rows").get<std::int64_t>();
    const std::int64_t cols = j.at("cols").get<std::int64_t>();
    const auto& flat = j.at("data");
    if (static_cast<std::int64_t>(flat.size()) != rows * cols)
        throw IoError("matrix data length does not match its shape");
    Mat m(rows, cols);
    std::int64_t k = 0;
    for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t c = 0; c < cols; ++c)
            m(i, c) = flat[static_cast<std::size_t>(k++)].get<double>();
    return m;
}

json to_json(const Homeomorphism& h) {
    json params = json::object();
    if (h.kind == "custom_poly") {
        params["dim"] = h.dim;
        json fwd = json::array(), inv = json::array();
        for (const auto& o : h.forward_terms) fwd.push_back(poly_obs_to_json(o));
        for (const auto& o : h.inverse_terms) inv.push_back(poly_obs_to_json(o));
        params["forward"] = std::move(fwd);
        params["inverse"] = std::move(inv);
    } else if (h.kind == "identity") {
        params["dim"] = h.dim;
    }
    return json{{"kind", h.kind}, {"params", params}};
}

Homeomorphism homeomorphism_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") return homeo::identity(j.at("params").at("dim").get<int>());
    if (kind == "shear_quadratic") return homeo::shear_quadratic();
    if (kind == "custom_poly") {
        std::vector<PolyObservable> fwd, inv;
        for (const auto& o : j.at("params").at("forward")) fwd.push_back(poly_obs_from_json(o));
        for (const auto& o : j.at("params").at("inverse")) inv.push_back(poly_obs_from_json(o));
        return homeo::custom_poly(std::move(fwd), std::move(inv));
    }
    throw UnknownPreset("homeomorphism kind " + kind);
}

json to_json(const Dictionary& dict) {
    json params = json::object();
    switch (dict.kind) {
        case DictKind::identity:
            break;
        case DictKind::rbf:
            params["centers"] = mat_rows_to_json(dict.centers);
            params["sigma"] = dict.sigma;
            break;
        case DictKind::polynomial:
            params["exponents"] = dict.exponents;
            break;
        case DictKind::custom: {
            json obs = json::array();
            for (const auto& o : dict.observables) obs.push_back(poly_obs_to_json(o));
            params["observables"] = std::move(obs);
            break;
        }
        case DictKind::composed:
            params["base"] = to_json(*dict.base);
            params["homeo"] = to_json(*dict.homeo);
            break;
    }
    json out{{"kind", to_string(dict.kind)},
             {"dim", dict.dim},
             {"n_obs", dict.n_obs()},
             {"state_inclusive", dict.state_inclusive},
             {"params", params}};
    if (!dict.note.empty()) out["note"] = dict.note;
    return out;
}

Dictionary dictionary_from_json(const json& j) {
    const DictKind kind = dict_kind_from_string(j.at("kind").get<std::string>());
    const int dim = j.at("dim").get<int>();
    const auto& params = j.at("params");
    Dictionary d;
    switch (kind) {
        case DictKind::identity:
            d = dict::identity(dim);
            break;
        case DictKind::rbf:
            d = dict::rbf(mat_from_rows_json(params.at("centers")),
                          params.at("sigma").get<double>(),
                          j.at("state_inclusive").get<bool>());
            break;
        case DictKind::polynomial:
            d = dict::polynomial(dim, params.at("exponents").get<std::vector<std::vector<int>>>());
            break;
        case DictKind::custom: {
            std::vector<PolyObservable> obs;
            for (const auto& o : params.at("observables")) obs.push_back(poly_obs_from_json(o));
            d = dict::custom(dim, std::move(obs));
            break;
        }
        case DictKind::composed: {
            const Dictionary base = dictionary_from_json(params.at("base"));
            const Homeomorphism h = homeomorphism_from_json(params.at("homeo"));
            d.kind = DictKind::composed;
            d.dim = base.dim;
            d.base = std::make_shared<Dictionary>(base);
            d.homeo = std::make_shared<Homeomorphism>(h);
            break;
        }
    }
    if (j.contains("note")) d.note = j.at("note").get<std::string>();
    return d;
}

json to_json(const KoopmanModel& model) {
    json flat = json::array();
    for (std::int64_t i = 0; i < model.k_matrix.rows(); ++i)
        for (std::int64_t c = 0; c < model.k_matrix.cols(); ++c)
            flat.push_back(model.k_matrix(i, c));
    return json{{"domain_tag", model.domain_tag},
                {"dt", model.dt},
                {"fit_residual", model.fit_residual},
                {"rank", model.rank},
                {"dictionary", to_json(model.dictionary)},
                {"k_matrix", std::move(flat)}};
}

KoopmanModel model_from_json(const json& j) {
    KoopmanModel model;
    model.domain_tag = j.at("domain_tag").get<std::string>();
    model.dt = j.at("dt").get<double>();
    model.fit_residual = j.at("fit_residual").get<double>();
    model.dictionary = dictionary_from_json(j.at("dictionary"));
    const int n = model.dictionary.n_obs();
    const auto& flat = j.at("k_matrix");
    if (static_cast<int>(flat.size()) != n * n)
        throw IoError("k_matrix length does not match the dictionary");
    model.k_matrix.resize(n, n);
    std::int64_t k = 0;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < n; ++c)
            model.k_matrix(i, c) = flat[static_cast<std::size_t>(k++)].get<double>();
    model.rank = j.contains("rank") ? j.at("rank").get<int>() : n;
    model.rank_deficient = model.rank < n;
    return model;
}

json to_json(const SubspacePredicate& pred) {
    json normal = json::array();
    for (std::int64_t i = 0; i < pred.normal.size(); ++i) normal.push_back(pred.normal(i));
    return json{{"kind", "halfplane"},
                {"name", pred.name},
                {"normal", std::move(normal)},
                {"offset", pred.offset},
                {"strict", pred.strict}};
}

SubspacePredicate predicate_from_json(const json& j) {
    if (j.at("kind").get<std::string>() != "halfplane")
        throw UnknownPreset("predicate kind " + j.at("kind").get<std::string>());
    SubspacePredicate pred;
    pred.name = j.at("name").get<std::string>();
    const auto normal = j.at("normal").get<std::vector<double>>();
    pred.normal.resize(static_cast<std::int64_t>(normal.size()));
    for (std::size_t i = 0; i < normal.size(); ++i)
        pred.normal(static_cast<std::int64_t>(i)) = normal[i];
    pred.offset = j.at("offset").get<double>();
    pred.strict = j.at("strict").get<bool>();
    return pred;
}

json to_json(const StitchedModel& model) {
    json blocks = json::array();
    for (const auto& [pred, local] : model.blocks)
        blocks.push_back(json{{"predicate", to_json(pred)}, {"model", to_json(local)}});
    return json{{"blocks", std::move(blocks)}};
}

StitchedModel stitched_from_json(const json& j, const Box& box) {
    std::vector<std::pair<SubspacePredicate, KoopmanModel>> blocks;
    for (const auto& b : j.at("blocks"))
        blocks.emplace_back(predicate_from_json(b.at("predicate")),
                            model_from_json(b.at("model")));
    return stitching::stitch(std::move(blocks), box);
}

json to_json(const GroupAction& action) {
    json params = json::object();
    if (action.kind == "reflect_axis") params["axis"] = action.axis;
    if (action.kind == "matrix") params["state_matrix"] = mat_rows_to_json(action.state_matrix);
    return json{{"kind", action.kind},
                {"name", action.name},
                {"params", params},
                {"rep", mat_rows_to_json(action.rep)}};
}

GroupAction action_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    GroupAction action;
    if (kind == "swap") {
        action = equivariance::swap_action();
    } else if (kind == "reflect_axis") {
        const int axis = j.at("params").at("axis").get<int>();
        const Mat rep = mat_from_rows_json(j.at("rep"));
        action = equivariance::reflect_axis_action(axis, static_cast<int>(rep.rows()));
    } else if (kind == "matrix") {
        action = equivariance::matrix_action(mat_from_rows_json(j.at("params").at("state_matrix")),
                                             j.at("name").get<std::string>());
    } else {
        throw UnknownPreset("group action kind " + kind);
    }
    action.rep = mat_from_rows_json(j.at("rep"));
    return action;
}

json to_json(const SpectralReport& report) {
    return json{{"unit_tol", report.unit_tol},
                {"rank_tol", report.rank_tol},
                {"eigenvalues", cvec_to_json(report.eigenvalues)},
                {"adjoint_eigenvalues", cvec_to_json(report.adjoint_eigenvalues)},
                {"unit_census", json{{"count", report.algebraic_multiplicity_at_one},
                                     {"indices", report.unit_indices}}},
                {"algebraic_multiplicity_at_one", report.algebraic_multiplicity_at_one},
                {"geometric_multiplicity_at_one", report.geometric_multiplicity_at_one},
                {"max_eigenpair_residual", report.max_eigenpair_residual},
                {"k_frobenius", report.k_frobenius},
                {"right_eigvecs", cmat_rows_to_json(report.right_eigvecs)},
                {"adjoint_eigvecs", cmat_rows_to_json(report.adjoint_eigvecs)}};
}

json to_json(const std::vector<AttractorPeak>& peaks) {
    json arr = json::array();
    for (const auto& p : peaks) {
        json point = json::array();
        for (std::int64_t i = 0; i < p.peak_point.size(); ++i) point.push_back(p.peak_point(i));
        arr.push_back(json{{"eig_index", p.eig_index},
                           {"eigenvalue", complex_to_json(p.eigenvalue)},
                           {"peak_point", std::move(point)},
                           {"peak_value", p.peak_value},
                           {"cells_within_90pct", mat_rows_to_json(p.cells_within_90pct)}});
    }
    return arr;
}

json to_json(const StitchedValidation& validation) {
    return json{{"unit_tol", validation.unit_tol},
                {"unit_census", validation.unit_census},
                {"block_of_unit_eig", validation.block_of_unit_eig},
                {"peaks", to_json(validation.peaks)}};
}

json to_json(const ErrorCurve& curve) {
    return json{{"horizon", curve.horizon}, {"values", curve.values}};
}

json to_json(const EigCorrespondence& corr) {
    return json{{"lambda_theta", cvec_to_json(corr.lambda_theta)},
                {"lambda_psi", cvec_to_json(corr.lambda_psi)},
                {"eigenvalue_gaps", corr.eigenvalue_gaps},
                {"groups", corr.groups},
                {"composition_defects", corr.composition_defects},
                {"group_subspace_angles", corr.group_subspace_angles},
                {"max_eigenvalue_gap", corr.max_eigenvalue_gap},
                {"max_composition_defect", corr.max_composition_defect},
                {"max_group_angle", corr.max_group_angle}};
}

void write_json(const std::filesystem::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

json read_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

} // namespace koopman::io
