#ifndef STZIP_DIAGNOSTICS_HPP
#define STZIP_DIAGNOSTICS_HPP

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stzip/sampler.hpp"

namespace stzip {

double sample_mean(std::span<const double> values);
/// Linearly interpolated empirical quantiles (type 7). Copies and sorts.
std::vector<double> quantiles(std::span<const double> values, const std::vector<double>& levels);

/// Geyer initial-positive-sequence ESS. Returns the length for constant input.
double effective_sample_size(std::span<const double> values);

/// One column per scalar parameter. Bandwidths are reported as values.
struct FlatDraws {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

/// Columns in the order beta_0.., gamma_0.., mu_u_1.., mu_xi_1.., v_1..,
/// eta_1.., tau_u, tau_xi, sigma2_v, sigma2_eta, tau_p1, tau_p2, h_u, h_xi,
/// skipping blocks the model does not have.
FlatDraws flatten(const PosteriorDraws& draws);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double ess = 0.0;
};

std::vector<ParameterSummary> summarize(const PosteriorDraws& draws);

}  // namespace stzip

#endif  // STZIP_DIAGNOSTICS_HPP
