#ifndef STZIP_SIMULATE_HPP
#define STZIP_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "stzip/model.hpp"

namespace stzip {

/// Synthetic design: N uniform locations per period on a square box, exact
/// Gaussian-process spatial fields, fixed time effects and
/// i.i.d. normal covariates after an intercept column.
struct SimScenario {
  int periods = 6;
  int per_period = 400;
  double box_min = -2.0;
  double box_max = 2.0;
  double gp_variance = 0.5;
  double h_u = 0.5;
  double h_xi = 0.9;
  Eigen::VectorXd v;
  Eigen::VectorXd eta;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  double covariate_sd = 0.5;
  std::uint64_t seed = 1;

  /// beta = (0.5, 0.5), gamma = (-1.5, -1), v = (0, .3, .6, .9, 1.2, 1.5),
  /// eta = (0, .4, .8, .8, .4, 0).
  static SimScenario default_truth();
  /// Same design with v = (0, .4, .8, 1.2, 1.6, 2) and
  /// eta = (0, .5, 1, 1, .5, 0).
  static SimScenario prose_truth();
};

/// Throws ConfigError on non-positive sizes, bandwidths or box, negative GP
/// variance, effect vectors of the wrong length or with a nonzero first
/// entry, or beta/gamma of different lengths.
void validate(const SimScenario& scenario);

struct SimTruth {
  Eigen::VectorXd u;
  Eigen::VectorXd xi;
  Eigen::VectorXd v;
  Eigen::VectorXd eta;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  std::vector<std::uint8_t> z;
  /// exp(x'beta + u + v_t).
  Eigen::VectorXd lambda;
  /// (1 - Phi(m_g)) lambda and Phi(m_g) + (1 - Phi(m_g)) exp(-lambda).
  Eigen::VectorXd expected_count;
  Eigen::VectorXd zero_prob;
};

struct SimResult {
  SurveyDataset data;
  SimTruth truth;
};

/// Observations are ordered by period, then by draw order within a period.
SimResult simulate(const SimScenario& scenario);

/// Dense draw of a zero-mean GP with covariance variance * exp(-d^2 / h^2)
/// at the given locations. Jitter escalates 1e-8, 1e-6, 1e-4 on failure.
Eigen::VectorXd sample_gaussian_field(const Eigen::MatrixXd& locations, double variance,
                                      double h, std::uint64_t seed);

}  // namespace stzip

#endif  // STZIP_SIMULATE_HPP
