#ifndef STZIP_MODEL_HPP
#define STZIP_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace stzip {

class PredictiveProjector;

using Location = Eigen::Vector2d;

/// One point-referenced count. `period` is 1-based.
struct Observation {
  int period = 1;
  Location location = Location::Zero();
  int count = 0;
  Eigen::VectorXd covariates;
};

/// Observations over T periods, held column-wise for the samplers.
///
/// Sampling locations may differ between periods and periods may be empty.
/// The covariate matrix is used as given; an intercept must be an explicit
/// column.
class SurveyDataset {
 public:
  SurveyDataset() = default;

  /// `num_periods` defaults to the largest period index present.
  explicit SurveyDataset(const std::vector<Observation>& observations,
                         std::optional<int> num_periods = std::nullopt);

  std::size_t size() const noexcept { return counts_.size(); }
  int num_periods() const noexcept { return num_periods_; }
  int num_covariates() const noexcept {
    return static_cast<int>(design_.cols());
  }

  const Eigen::MatrixXd& design() const noexcept { return design_; }
  const Eigen::MatrixXd& locations() const noexcept { return locations_; }
  const std::vector<int>& counts() const noexcept { return counts_; }

  /// 0-based period of observation i.
  int period_index(std::size_t i) const { return period_[i]; }
  const std::vector<int>& period_indices() const noexcept { return period_; }

  /// N_t for t = 1..T (stored 0-based).
  const std::vector<int>& period_counts() const noexcept {
    return period_counts_;
  }
  /// Row indices of the observations in 0-based period t.
  const std::vector<int>& members(int t) const { return members_[t]; }

  Observation observation(std::size_t i) const;

  /// Copy with replaced counts (same length, all >= 0).
  SurveyDataset with_counts(const std::vector<int>& counts) const;

  /// Observations with period in [first, last]. Period numbers are kept and
  /// T becomes `last`.
  SurveyDataset select_periods(int first, int last) const;

 private:
  Eigen::MatrixXd design_;
  Eigen::MatrixXd locations_;
  std::vector<int> counts_;
  std::vector<int> period_;
  std::vector<int> period_counts_;
  std::vector<std::vector<int>> members_;
  int num_periods_ = 0;
};

/// Latent variables of the augmented model, one entry per observation.
///
/// z = 1 marks a structural zero. g is the probit latent with g > 0 iff
/// z = 1. omega is the Polya-gamma latent and is only meaningful where z = 0;
/// it is held at 0 elsewhere.
struct LatentState {
  std::vector<std::uint8_t> z;
  Eigen::VectorXd g;
  Eigen::VectorXd omega;
};

/// One full Gibbs state. v[0] and eta[0] are pinned at zero. Bandwidths are
/// stored as indices into the sampler's bandwidth grid.
struct ModelState {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  Eigen::VectorXd mu_u;
  Eigen::VectorXd mu_xi;
  Eigen::VectorXd v;
  Eigen::VectorXd eta;
  double tau_u = 1.0;
  double tau_xi = 1.0;
  double sigma2_v = 1.0;
  double sigma2_eta = 1.0;
  std::size_t h_u_index = 0;
  std::size_t h_xi_index = 0;
  double tau_p1 = 1.0;
  double tau_p2 = 1.0;
  LatentState latent;
};

/// Contiguous block of regression coefficients, e.g. the truncated-power
/// spline coefficients that receive the shrinkage prior.
struct CoefficientSpan {
  int start = 0;
  int length = 0;
};

struct McmcControls {
  long iterations = 45000;
  long burn_in = 5000;
  long thin = 1;
  std::uint64_t seed = 1;
};

/// Priors and tuning constants. Scalar hyperparameters d are used as both
/// shape and rate: Ga(d, d) for precisions, IG(d, d) for variances.
///
/// Empty D_beta / D_gamma mean scale * I with scale 100 unless the matching
/// *_scale is set; an empty bandwidth grid is filled in
/// from the knot spacing when the sampler is built; empty weights are uniform.
struct PriorConfig {
  Eigen::MatrixXd d_beta;
  Eigen::MatrixXd d_gamma;
  std::optional<double> d_beta_scale;
  std::optional<double> d_gamma_scale;
  double d_tau_u = 1.0;
  double d_tau_xi = 1.0;
  double d_sigma_v = 1.0;
  double d_sigma_eta = 1.0;
  double d_tau_p = 1.0;
  double delta = 1e4;
  std::vector<double> bandwidth_grid;
  std::vector<double> bandwidth_weights;
  int num_knots = 100;
  McmcControls mcmc;
  /// Columns of the design matrix with the N(0, tau_P^-1) spline prior.
  std::optional<CoefficientSpan> shrinkage;
};

/// Fills in defaults for p covariates and validates. Throws ConfigError.
PriorConfig resolve_prior(PriorConfig prior, int num_covariates);

/// x'beta + u(s) + v_t for one observation.
double linear_predictor_intensity(const ModelState& state,
                                  const Observation& obs,
                                  const PredictiveProjector& projector_u);

/// x'gamma + xi(s) + eta_t for one observation.
double linear_predictor_zero(const ModelState& state, const Observation& obs,
                             const PredictiveProjector& projector_xi);

struct ZipMoments {
  double mean = 0.0;
  double p_zero = 1.0;
};

/// E[y] = {1 - Phi(m_g)} exp(m_lambda) and
/// P(y = 0) = Phi(m_g) + {1 - Phi(m_g)} exp(-exp(m_lambda)).
/// m_g = -inf gives the plain Poisson moments.
ZipMoments zip_moments(double m_g, double m_lambda);

ZipMoments marginal_mean_and_zero_prob(const ModelState& state,
                                       const Observation& obs,
                                       const PredictiveProjector& projector_u,
                                       const PredictiveProjector& projector_xi);

}  // namespace stzip

#endif  // STZIP_MODEL_HPP
