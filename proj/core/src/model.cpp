#include "stzip/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "stzip/distributions.hpp"
#include "stzip/errors.hpp"
#include "stzip/kernel.hpp"

namespace stzip {

SurveyDataset::SurveyDataset(const std::vector<Observation>& observations,
                             std::optional<int> num_periods) {
  const auto n = static_cast<Eigen::Index>(observations.size());
  const Eigen::Index p = observations.empty() ? 0 : observations.front().covariates.size();
  int max_period = 0;
  for (const auto& obs : observations) max_period = std::max(max_period, obs.period);
  num_periods_ = num_periods.value_or(std::max(max_period, 1));
  if (num_periods_ < 1) throw InputError("number of periods must be at least 1");

  design_.resize(n, p);
  locations_.resize(n, 2);
  counts_.resize(observations.size());
  period_.resize(observations.size());
  period_counts_.assign(static_cast<std::size_t>(num_periods_), 0);
  members_.assign(static_cast<std::size_t>(num_periods_), {});

  for (Eigen::Index i = 0; i < n; ++i) {
    const Observation& obs = observations[static_cast<std::size_t>(i)];
    const long row = static_cast<long>(i) + 1;
    if (obs.covariates.size() != p) {
      throw InputError(fmt::format("expected {} covariates, found {}", p,
                                   obs.covariates.size()),
                       row);
    }
    if (obs.count < 0) throw InputError("negative count", row);
    if (obs.period < 1 || obs.period > num_periods_) {
      throw InputError(fmt::format("period {} outside 1..{}", obs.period, num_periods_), row);
    }
    if (!obs.location.allFinite()) throw InputError("non-finite location", row);
    if (!obs.covariates.allFinite()) throw InputError("non-finite covariate", row);
    design_.row(i) = obs.covariates.transpose();
    locations_.row(i) = obs.location.transpose();
    counts_[i] = obs.count;
    period_[i] = obs.period - 1;
    ++period_counts_[obs.period - 1];
    members_[obs.period - 1].push_back(static_cast<int>(i));
  }
}

Observation SurveyDataset::observation(std::size_t i) const {
  const auto row = static_cast<Eigen::Index>(i);
  return {period_[i] + 1, locations_.row(row).transpose(), counts_[i],
          design_.row(row).transpose()};
}

SurveyDataset SurveyDataset::with_counts(const std::vector<int>& counts) const {
  if (counts.size() != counts_.size()) throw InputError("count vector length mismatch");
  for (int y : counts) {
    if (y < 0) throw InputError("negative count");
  }
  SurveyDataset copy = *this;
  copy.counts_ = counts;
  return copy;
}

SurveyDataset SurveyDataset::select_periods(int first, int last) const {
  std::vector<Observation> kept;
  for (std::size_t i = 0; i < size(); ++i) {
    const int t = period_[i] + 1;
    if (t >= first && t <= last) kept.push_back(observation(i));
  }
  return SurveyDataset(kept, last);
}

PriorConfig resolve_prior(PriorConfig prior, int num_covariates) {
  const Eigen::Index p = num_covariates;
  auto check_cov = [p](Eigen::MatrixXd& m, std::optional<double> scale, const char* name) {
    if (m.size() == 0) {
      if (scale && !(*scale > 0.0)) throw ConfigError(fmt::format("{} scale must be positive", name));
      m = scale.value_or(100.0) * Eigen::MatrixXd::Identity(p, p);
      return;
    }
    if (m.rows() != p || m.cols() != p) {
      throw ConfigError(fmt::format("{} must be {} x {}, got {} x {}", name, p, p,
                                    m.rows(), m.cols()));
    }
    if (!m.isApprox(m.transpose())) throw ConfigError(fmt::format("{} must be symmetric", name));
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw ConfigError(fmt::format("{} must be positive definite", name));
    }
  };
  check_cov(prior.d_beta, prior.d_beta_scale, "D_beta");
  check_cov(prior.d_gamma, prior.d_gamma_scale, "D_gamma");

  const std::pair<double, const char*> scalars[] = {
      {prior.d_tau_u, "d_tau_u"},       {prior.d_tau_xi, "d_tau_xi"},
      {prior.d_sigma_v, "d_sigma_v"},   {prior.d_sigma_eta, "d_sigma_eta"},
      {prior.d_tau_p, "d_tau_P"}};
  for (const auto& [value, name] : scalars) {
    if (!(value > 0.0)) throw ConfigError(fmt::format("{} must be positive", name));
  }
  if (!(prior.delta >= 1e3)) {
    throw ConfigError(fmt::format("delta must be at least 1e3, got {}", prior.delta));
  }
  if (prior.num_knots < 1) throw ConfigError("number of knots must be at least 1");
  for (double h : prior.bandwidth_grid) {
    if (!(h > 0.0)) throw ConfigError("bandwidth grid entries must be positive");
  }
  if (!prior.bandwidth_weights.empty()) {
    if (prior.bandwidth_weights.size() != prior.bandwidth_grid.size()) {
      throw ConfigError("bandwidth weights must match the grid length");
    }
    double total = 0.0;
    for (double w : prior.bandwidth_weights) {
      if (!(w > 0.0)) throw ConfigError("bandwidth weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("bandwidth weights must sum to 1");
  }
  const McmcControls& mc = prior.mcmc;
  if (!(mc.iterations > mc.burn_in && mc.burn_in >= 0 && mc.thin >= 1)) {
    throw ConfigError("need iterations > burn_in >= 0 and thin >= 1");
  }
  if (prior.shrinkage) {
    const CoefficientSpan& span = *prior.shrinkage;
    if (span.start < 0 || span.length < 1 || span.start + span.length > num_covariates) {
      throw ConfigError("shrinkage span outside the coefficient vector");
    }
  }
  return prior;
}

namespace {

void check_dims(const Eigen::VectorXd& coef, const Observation& obs) {
  if (coef.size() != obs.covariates.size()) {
    throw ConfigError(fmt::format("coefficient dimension {} does not match {} covariates",
                                  coef.size(), obs.covariates.size()));
  }
}

double time_effect(const Eigen::VectorXd& effects, int period) {
  if (effects.size() == 0) return 0.0;
  const Eigen::Index t = std::min<Eigen::Index>(period, effects.size()) - 1;
  return effects(t);
}

double spatial_effect(const Eigen::VectorXd& mu, const Observation& obs,
                      const PredictiveProjector& projector) {
  if (mu.size() == 0) return 0.0;
  if (mu.size() != projector.rank()) throw ConfigError("knot vector does not match projector");
  return projector.project(obs.location).dot(mu);
}

}  // namespace

double linear_predictor_intensity(const ModelState& state, const Observation& obs,
                                  const PredictiveProjector& projector_u) {
  check_dims(state.beta, obs);
  return obs.covariates.dot(state.beta) + spatial_effect(state.mu_u, obs, projector_u) +
         time_effect(state.v, obs.period);
}

double linear_predictor_zero(const ModelState& state, const Observation& obs,
                             const PredictiveProjector& projector_xi) {
  check_dims(state.gamma, obs);
  return obs.covariates.dot(state.gamma) + spatial_effect(state.mu_xi, obs, projector_xi) +
         time_effect(state.eta, obs.period);
}

ZipMoments zip_moments(double m_g, double m_lambda) {
  const double phi = normal_cdf(m_g);
  const double lambda = std::exp(m_lambda);
  return {(1.0 - phi) * lambda, phi + (1.0 - phi) * std::exp(-lambda)};
}

ZipMoments marginal_mean_and_zero_prob(const ModelState& state, const Observation& obs,
                                       const PredictiveProjector& projector_u,
                                       const PredictiveProjector& projector_xi) {
  const double m_lambda = linear_predictor_intensity(state, obs, projector_u);
  const double m_g = state.gamma.size() == 0
                         ? -std::numeric_limits<double>::infinity()
                         : linear_predictor_zero(state, obs, projector_xi);
  return zip_moments(m_g, m_lambda);
}

}  // namespace stzip
