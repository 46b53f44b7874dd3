#ifndef STZIP_PREDICT_HPP
#define STZIP_PREDICT_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "stzip/kernel.hpp"
#include "stzip/model.hpp"
#include "stzip/sampler.hpp"

namespace stzip {

struct PredictionPoint {
  Location location = Location::Zero();
  /// 1-based; periods past the fitted T reuse the last time effect.
  int period = 1;
  Eigen::VectorXd covariates;
};

/// Regular lattice over a bounding box, replicated for every listed period
/// with one shared covariate row.
struct LatticeSpec {
  double x_min = -2.0;
  double x_max = 2.0;
  double y_min = -2.0;
  double y_max = 2.0;
  double resolution = 0.1;
  std::vector<int> periods{1};
  Eigen::VectorXd covariates;
};

/// Points x_min + i*resolution (and likewise for y) up to the upper bound,
/// period-major then y then x. Throws ConfigError on a bad spec.
std::vector<PredictionPoint> lattice_points(const LatticeSpec& spec);

std::vector<PredictionPoint> points_from_dataset(const SurveyDataset& data);

struct PredictionOptions {
  std::vector<double> quantiles{0.025, 0.975};
  /// Add N(0, sigma^2) random-walk increments per draw for periods past T
  /// instead of carrying the last effect forward.
  bool sample_future_walk = false;
  std::uint64_t seed = 1;
};

struct PointSummary {
  double mean_count = 0.0;
  double p_zero = 0.0;
  /// Aligned with PredictionOptions::quantiles.
  std::vector<double> count_quantiles;
  std::vector<double> p_zero_quantiles;
};

/// Per-draw E[y] and P(y = 0), draws x points.
struct SurfaceDraws {
  Eigen::MatrixXd mean_count;
  Eigen::MatrixXd p_zero;
};

/// One projector per bandwidth grid entry of the draws (empty for ZIP).
std::vector<PredictiveProjector> projectors_for(const PosteriorDraws& draws);

SurfaceDraws evaluate_surfaces(const PosteriorDraws& draws,
                               const std::vector<PredictionPoint>& points,
                               const std::vector<PredictiveProjector>& projectors,
                               const PredictionOptions& options = {});

std::vector<PointSummary> predict_surfaces(const PosteriorDraws& draws,
                                           const std::vector<PredictionPoint>& points,
                                           const std::vector<PredictiveProjector>& projectors,
                                           const PredictionOptions& options = {});
std::vector<PointSummary> predict_surfaces(const PosteriorDraws& draws,
                                           const std::vector<PredictionPoint>& points,
                                           const PredictionOptions& options = {});

struct PredictiveLoss {
  double goodness = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

/// Squared-error loss with one replicate per draw: G = sum (y - mean y_rep)^2,
/// P = sum of the replicate sample variances. Needs at least two draws.
PredictiveLoss posterior_predictive_loss(const PosteriorDraws& draws, const SurveyDataset& data,
                                         std::uint64_t seed = 1);

struct ValidationErrors {
  double mae = 0.0;
  double mape1 = 0.0;
  double mape2 = 0.0;
  long n_test = 0;
  long n_positive = 0;
  /// False when the test set has no positive counts; mape2 is then 0.
  bool mape2_defined = false;
};

ValidationErrors validation_errors(const Eigen::VectorXd& predicted,
                                   const std::vector<int>& observed);

/// Posterior mean of E[y] at each test point. With plug_in, E[y] is
/// evaluated once at the posterior-mean parameters and modal bandwidths.
Eigen::VectorXd point_predict_holdout(const PosteriorDraws& draws, const SurveyDataset& test,
                                      bool plug_in = false);

struct ModelScore {
  PredictiveLoss ppl;
  ValidationErrors errors;
};

}  // namespace stzip

#endif  // STZIP_PREDICT_HPP
