#pragma once

#include "koopman/conjugacy.hpp"
#include "koopman/dictionary.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/edmd.hpp"
#include "koopman/equivariance.hpp"
#include "koopman/spectral.hpp"
#include "koopman/stitching.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace koopman::io {

using json = nlohmann::json;

// ---- CSV ----

// header `t,x1,...,xn`, one row per sample, %.17g precision
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

// bare numeric matrix with a caller-provided header line
void write_matrix_csv(const std::filesystem::path& path, const std::string& header,
                      const Mat& values);
Mat read_matrix_csv(const std::filesystem::path& path, bool expect_header = true);

// header `x1,...,xn,abs_phi`
void write_eigenfunction_grid_csv(const std::filesystem::path& path,
                                  const EigenfunctionGrid& grid);

// ---- JSON ----

json to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const json& j);

json to_json(const Homeomorphism& h);
Homeomorphism homeomorphism_from_json(const json& j);

json to_json(const KoopmanModel& model);
KoopmanModel model_from_json(const json& j);

json to_json(const SubspacePredicate& pred);
SubspacePredicate predicate_from_json(const json& j);

json to_json(const StitchedModel& model);
StitchedModel stitched_from_json(const json& j, const Box& box);

json to_json(const GroupAction& action);
GroupAction action_from_json(const json& j);

json to_json(const SpectralReport& report);
json to_json(const std::vector<AttractorPeak>& peaks);
json to_json(const StitchedValidation& validation);
json to_json(const ErrorCurve& curve);
json to_json(const EigCorrespondence& corr);

json matrix_to_json(const Mat& m);          // row-major flat array + shape
Mat matrix_from_json(const json& j);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

} // namespace koopman::io
