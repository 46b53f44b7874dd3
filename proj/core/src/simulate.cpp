#include "stzip/simulate.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "stzip/distributions.hpp"
#include "stzip/errors.hpp"

namespace stzip {

namespace {

enum Stream : std::uint64_t {
  kLocations = 1,
  kFieldU = 2,
  kFieldXi = 3,
  kCovariates = 4,
  kResponse = 5,
};

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double v : values) out(k++) = v;
  return out;
}

}  // namespace

SimScenario SimScenario::default_truth() {
  SimScenario s;
  s.beta = vec({0.5, 0.5});
  s.gamma = vec({-1.5, -1.0});
  s.v = vec({0.0, 0.3, 0.6, 0.9, 1.2, 1.5});
  s.eta = vec({0.0, 0.4, 0.8, 0.8, 0.4, 0.0});
  return s;
}

SimScenario SimScenario::prose_truth() {
  SimScenario s = default_truth();
  s.v = vec({0.0, 0.4, 0.8, 1.2, 1.6, 2.0});
  s.eta = vec({0.0, 0.5, 1.0, 1.0, 0.5, 0.0});
  return s;
}

void validate(const SimScenario& s) {
  if (s.periods < 1) throw ConfigError("periods must be at least 1");
  if (s.per_period < 1) throw ConfigError("per_period must be at least 1");
  if (!(s.box_max > s.box_min)) throw ConfigError("empty simulation box");
  if (!(s.gp_variance >= 0.0)) throw ConfigError("GP variance must be non-negative");
  if (!(s.h_u > 0.0) || !(s.h_xi > 0.0)) throw ConfigError("GP bandwidths must be positive");
  if (!(s.covariate_sd >= 0.0)) throw ConfigError("covariate sd must be non-negative");
  if (s.beta.size() < 1) throw ConfigError("beta must contain at least the intercept");
  if (s.gamma.size() != s.beta.size()) throw ConfigError("beta and gamma lengths differ");
  for (const auto* eff : {&s.v, &s.eta}) {
    if (eff->size() != s.periods) {
      throw ConfigError(fmt::format("time effects need {} entries, got {}", s.periods,
                                    eff->size()));
    }
    if ((*eff)(0) != 0.0) throw ConfigError("first time effect must be 0");
  }
}

Eigen::VectorXd sample_gaussian_field(const Eigen::MatrixXd& locations, double variance,
                                      double h, std::uint64_t seed) {
  const Eigen::Index n = locations.rows();
  if (variance == 0.0) return Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd cov(n, n);
  const double inv_h2 = 1.0 / (h * h);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double d2 = (locations.row(i) - locations.row(j)).squaredNorm();
      cov(i, j) = variance * std::exp(-d2 * inv_h2);
    }
  }
  Rng rng(seed);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = sample_normal(rng);
  Eigen::VectorXd base_diag = cov.diagonal();
  for (double jitter : {1e-8, 1e-6, 1e-4}) {
    cov.diagonal() = base_diag.array() + jitter;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL() * z;
  }
  throw NumericalError(fmt::format("GP covariance not positive definite (h = {})", h),
                       "simulate");
}

SimResult simulate(const SimScenario& s) {
  validate(s);
  const int T = s.periods;
  const Eigen::Index n = static_cast<Eigen::Index>(T) * s.per_period;
  const Eigen::Index p = s.beta.size();

  Eigen::MatrixXd loc(n, 2);
  {
    Rng rng(derive_seed(s.seed, kLocations));
    std::uniform_real_distribution<double> unif(s.box_min, s.box_max);
    for (Eigen::Index i = 0; i < n; ++i) {
      loc(i, 0) = unif(rng);
      loc(i, 1) = unif(rng);
    }
  }
  SimTruth truth;
  truth.u = sample_gaussian_field(loc, s.gp_variance, s.h_u, derive_seed(s.seed, kFieldU));
  truth.xi = sample_gaussian_field(loc, s.gp_variance, s.h_xi, derive_seed(s.seed, kFieldXi));
  truth.v = s.v;
  truth.eta = s.eta;
  truth.beta = s.beta;
  truth.gamma = s.gamma;

  Eigen::MatrixXd x(n, p);
  {
    Rng rng(derive_seed(s.seed, kCovariates));
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      for (Eigen::Index j = 1; j < p; ++j) x(i, j) = sample_normal(rng, 0.0, s.covariate_sd);
    }
  }

  Rng rng(derive_seed(s.seed, kResponse));
  std::vector<Observation> obs(static_cast<std::size_t>(n));
  truth.z.assign(static_cast<std::size_t>(n), 0);
  truth.lambda.resize(n);
  truth.expected_count.resize(n);
  truth.zero_prob.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int t = static_cast<int>(i / s.per_period);
    const double m_lambda = x.row(i).dot(s.beta) + truth.u(i) + s.v(t);
    const double m_g = x.row(i).dot(s.gamma) + truth.xi(i) + s.eta(t);
    const bool structural = m_g + sample_normal(rng) > 0.0;
    const double lambda = std::exp(m_lambda);
    Observation& o = obs[static_cast<std::size_t>(i)];
    o.period = t + 1;
    o.location = loc.row(i).transpose();
    o.covariates = x.row(i).transpose();
    o.count = structural ? 0 : sample_poisson(rng, lambda);
    truth.z[static_cast<std::size_t>(i)] = structural ? 1 : 0;
    truth.lambda(i) = lambda;
    const ZipMoments zm = zip_moments(m_g, m_lambda);
    truth.expected_count(i) = zm.mean;
    truth.zero_prob(i) = zm.p_zero;
  }
  return {SurveyDataset(obs, T), std::move(truth)};
}

}  // namespace stzip
