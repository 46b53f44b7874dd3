#ifndef STZIP_IO_HPP
#define STZIP_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stzip/diagnostics.hpp"
#include "stzip/kernel.hpp"
#include "stzip/model.hpp"
#include "stzip/predict.hpp"
#include "stzip/sampler.hpp"
#include "stzip/simulate.hpp"
#include "stzip/spline.hpp"

namespace stzip {

// --- plain files -----------------------------------------------------------

std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);
std::string sha256_hex(std::string_view content);
/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double value);

// --- observations ----------------------------------------------------------

/// Header `t,loc_x,loc_y,y,x1,...,xp`. Throws InputError with the 1-based
/// data row on malformed rows.
SurveyDataset parse_observations_csv(std::string_view text,
                                     std::optional<int> num_periods = std::nullopt);
SurveyDataset read_observations_csv(const std::filesystem::path& path,
                                    std::optional<int> num_periods = std::nullopt);
std::string observations_csv(const SurveyDataset& data);

/// Header `t,loc_x,loc_y,x1,...,xp`; a `y` column after loc_y is ignored.
std::vector<PredictionPoint> parse_points_csv(std::string_view text);

/// Maps (longitude, latitude) degrees to planar km by equirectangular
/// scaling about the mean latitude.
Eigen::MatrixXd project_lonlat(const Eigen::MatrixXd& lonlat);

// --- knots -----------------------------------------------------------------

KnotSet parse_knots_csv(std::string_view text);
std::string knots_csv(const KnotSet& knots);

// --- configuration ---------------------------------------------------------

struct SplineTerm {
  SplineSpec spec;
  /// 1-based covariate column (x1 = 1) expanded into the basis.
  int column = 1;
  /// 1-based columns kept ahead of the basis. Unset until resolve_spline().
  std::optional<std::vector<int>> keep;
  /// Whether spec.input_min / input_max were frozen by resolve_spline().
  bool range_frozen = false;
};

struct FitConfig {
  PriorConfig prior;
  std::optional<SplineTerm> spline;
};

/// Missing fields keep their defaults. Throws ConfigError on bad JSON,
/// unknown or wrongly typed fields.
FitConfig parse_fit_config(std::string_view json_text);
std::string fit_config_json(const FitConfig& config);

/// Fixes the kept columns (every column except the spline column and
/// constant all-ones columns, since the basis has its own intercept) and the
/// input range from the training data, unless already set.
SplineTerm resolve_spline(const SurveyDataset& data, SplineTerm term);
/// Rows (kept columns..., basis of the spline column). Needs a resolved term.
SurveyDataset expand_spline(const SurveyDataset& data, const SplineTerm& term);
std::vector<PredictionPoint> expand_spline(const std::vector<PredictionPoint>& points,
                                           const SplineTerm& term);
/// Coefficient span of the truncated-power terms for a resolved term.
CoefficientSpan spline_span(const SplineTerm& term);

SimScenario parse_sim_config(std::string_view json_text);
std::string sim_config_json(const SimScenario& scenario);

// --- draws and summaries ---------------------------------------------------

/// Header `iteration,<flatten() names>`; bandwidths stored as values.
std::string draws_csv(const PosteriorDraws& draws);
/// Everything about the draws except the draw values and knots.
std::string draws_layout_json(const PosteriorDraws& draws);
PosteriorDraws parse_draws(std::string_view csv_text, std::string_view layout_json,
                           std::optional<KnotSet> knots);

std::string summary_json(const std::vector<ParameterSummary>& summary, ModelKind kind,
                         long num_draws, const std::optional<PredictiveLoss>& ppl);

std::string truth_json(const SimTruth& truth);

/// Header `loc_x,loc_y,date_index,mean_count,p_zero,q025_count,q975_count`.
/// Expects count_quantiles at levels (0.025, 0.975).
std::string surface_csv(const std::vector<PredictionPoint>& points,
                        const std::vector<PointSummary>& summaries);

std::string score_json(const ModelScore& score, ModelKind kind);

/// {"error": kind, "message": ..., plus optional row / block / iteration}.
std::string error_json(std::string_view kind, std::string_view message,
                       std::optional<long> row = std::nullopt,
                       std::optional<std::string> block = std::nullopt,
                       std::optional<long> iteration = std::nullopt);

}  // namespace stzip

#endif  // STZIP_IO_HPP
