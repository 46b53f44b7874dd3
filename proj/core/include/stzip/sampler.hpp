#ifndef STZIP_SAMPLER_HPP
#define STZIP_SAMPLER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stzip/distributions.hpp"
#include "stzip/kernel.hpp"
#include "stzip/model.hpp"

namespace stzip {

/// STZIP is the full model. STP drops the zero-inflation part (z = 0
/// throughout); ZIP drops the spatial and time effects.
enum class ModelKind { kStzip, kStp, kZip };

std::string_view to_string(ModelKind kind);
/// Accepts "stzip", "stp", "zip" (any case). Throws ConfigError.
ModelKind parse_model_kind(std::string_view name);

inline bool has_zero_inflation(ModelKind k) { return k != ModelKind::kStp; }
inline bool has_spatio_temporal(ModelKind k) { return k != ModelKind::kZip; }

struct SamplerPlan {
  ModelKind model_kind = ModelKind::kStzip;
  long iterations = 45000;
  long burn_in = 5000;
  long thin = 1;
  std::uint64_t seed = 1;
  /// Also keep x'beta + u + v_t and x'gamma + xi + eta_t for every
  /// observation in every stored draw. Memory grows as draws x n.
  bool store_linear_predictors = false;
  /// Log progress every this many iterations; 0 disables.
  long progress_every = 0;

  static SamplerPlan from_controls(const McmcControls& mcmc, ModelKind kind);
  /// floor((iterations - burn_in) / thin).
  long stored_draws() const;
};

/// Thinned post-burn-in draws, one row per stored iteration. Blocks the
/// model does not have are left with zero columns / zero length.
struct PosteriorDraws {
  ModelKind model_kind = ModelKind::kStzip;
  std::optional<KnotSet> knots;
  std::vector<double> bandwidth_grid;
  int num_periods = 0;
  int num_covariates = 0;
  std::optional<CoefficientSpan> shrinkage;

  std::vector<long> iteration;
  Eigen::MatrixXd beta;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd mu_u;
  Eigen::MatrixXd mu_xi;
  Eigen::MatrixXd v;
  Eigen::MatrixXd eta;
  Eigen::VectorXd tau_u;
  Eigen::VectorXd tau_xi;
  Eigen::VectorXd sigma2_v;
  Eigen::VectorXd sigma2_eta;
  Eigen::VectorXd tau_p1;
  Eigen::VectorXd tau_p2;
  std::vector<int> h_u_index;
  std::vector<int> h_xi_index;

  /// Present only with SamplerPlan::store_linear_predictors.
  Eigen::MatrixXd log_lambda;
  Eigen::MatrixXd zero_predictor;

  std::size_t size() const noexcept { return iteration.size(); }
};

/// Draws of several chains stacked in chain order. Metadata must agree.
PosteriorDraws concatenate(const std::vector<PosteriorDraws>& chains);

/// Gibbs sampler for the zero-inflated spatio-temporal Poisson model and
/// its STP / ZIP sub-models.
///
/// The Poisson likelihood is replaced by a negative-binomial surrogate with
/// a large shape delta so that Polya-gamma augmentation makes the intensity
/// side conditionally Gaussian. Each update draws one block from its full
/// conditional given the current state; sweep() applies them in the order
///   omega, beta, v, mu_u, h_u, tau_u, z, g, gamma, eta, mu_xi, h_xi, tau_xi,
///   sigma2_v, sigma2_eta, tau_P
/// skipping blocks the model kind does not have. z is drawn with g
/// integrated out and g is then drawn given the new z, so the pair is a
/// single blocked update and sign(g) always agrees with z.
class GibbsSampler {
 public:
  /// `knots` is required unless the model kind is ZIP; see make_knots().
  GibbsSampler(SurveyDataset data, const PriorConfig& prior, ModelKind kind,
               std::optional<KnotSet> knots, std::uint64_t seed);

  /// Starting state: beta = gamma = 0, mu = 0, v = eta = 0, unit variances
  /// and precisions, bandwidths at the grid midpoint, z = 1 exactly at the
  /// observed zeros, g from its truncated conditional.
  void initialize();
  void sweep();
  /// Throws std::logic_error if a structural invariant is broken.
  void check_invariants() const;

  void update_omega();
  void update_beta();
  void update_gamma();
  void update_v();
  void update_eta();
  void update_mu_u();
  void update_mu_xi();
  void update_bandwidth_u();
  void update_bandwidth_xi();
  void update_tau_u();
  void update_tau_xi();
  void update_random_walk_variances();
  void update_spline_precisions();
  /// tau_u, tau_xi, sigma2_v, sigma2_eta and, with a spline, tau_P1/tau_P2.
  void update_precisions();
  void update_g();
  void update_z();

  const ModelState& state() const noexcept { return state_; }
  /// Replaces the state and refreshes cached predictor pieces.
  void set_state(ModelState state);
  /// Replaces the response counts (used by joint-distribution tests).
  void set_counts(const std::vector<int>& counts);

  const SurveyDataset& data() const noexcept { return data_; }
  const PriorConfig& prior() const noexcept { return prior_; }
  ModelKind model_kind() const noexcept { return kind_; }
  const std::vector<double>& bandwidth_grid() const noexcept { return grid_; }
  const std::vector<double>& bandwidth_weights() const noexcept { return grid_weights_; }
  const std::optional<KnotSet>& knots() const noexcept { return knots_; }
  const PredictiveProjector& projector(std::size_t grid_index) const;
  /// D(s_it; h)' rows at the observation locations for grid entry k.
  const Eigen::MatrixXd& weights(std::size_t grid_index) const;

  /// x'beta + u + v_t at every observation.
  Eigen::VectorXd intensity_predictor() const;
  /// x'gamma + xi + eta_t at every observation (-inf for STP).
  Eigen::VectorXd zero_predictor() const;

  long iteration() const noexcept { return iteration_; }
  Rng& rng() noexcept { return rng_; }

 private:
  void refresh_derived();
  Eigen::MatrixXd prior_precision(const Eigen::MatrixXd& fixed, double tau_p) const;
  Eigen::MatrixXd fixed_prior_precision(const Eigen::MatrixXd& cov) const;
  const Eigen::MatrixXd& weights_gram(std::size_t grid_index);
  template <typename F>
  void run_block(const char* name, F&& step);

  SurveyDataset data_;
  PriorConfig prior_;
  ModelKind kind_;
  std::optional<KnotSet> knots_;
  std::vector<double> grid_;
  std::vector<double> grid_weights_;
  std::vector<PredictiveProjector> projectors_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::MatrixXd> grams_;
  Eigen::MatrixXd beta_prior_fixed_;
  Eigen::MatrixXd gamma_prior_fixed_;
  Eigen::MatrixXd design_gram_;
  double log_delta_ = 0.0;

  ModelState state_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd xg_;
  Eigen::VectorXd u_;
  Eigen::VectorXd xi_;

  Rng rng_;
  long iteration_ = 0;
};

/// k-means knots over the dataset locations, seeded from the master seed.
KnotSet make_knots(const SurveyDataset& data, int num_knots, std::uint64_t master_seed);

/// Runs one chain: initialize, iterations sweeps, keep every thin-th state
/// after burn_in. Deterministic given plan.seed. Sampler failures surface as
/// NumericalError carrying the block name and iteration.
PosteriorDraws run_chain(const SurveyDataset& data, const PriorConfig& prior,
                         const SamplerPlan& plan,
                         std::optional<KnotSet> knots = std::nullopt);

PosteriorDraws run_chain_stp(const SurveyDataset& data, const PriorConfig& prior,
                             SamplerPlan plan, std::optional<KnotSet> knots = std::nullopt);
PosteriorDraws run_chain_zip(const SurveyDataset& data, const PriorConfig& prior,
                             SamplerPlan plan);

/// Independent chains on separate threads sharing one knot set. Chain 0 uses
/// plan.seed; chain k > 0 uses derive_seed(plan.seed, k).
std::vector<PosteriorDraws> run_chains(const SurveyDataset& data, const PriorConfig& prior,
                                       const SamplerPlan& plan, int num_chains,
                                       std::optional<KnotSet> knots = std::nullopt);

}  // namespace stzip

#endif  // STZIP_SAMPLER_HPP
