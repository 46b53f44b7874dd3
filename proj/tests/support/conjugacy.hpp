#ifndef STZIP_TESTS_CONJUGACY_HPP
#define STZIP_TESTS_CONJUGACY_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stats.hpp"
#include "stzip/kernel.hpp"
#include "stzip/model.hpp"
#include "stzip/sampler.hpp"

namespace stzip::testing {

/// Small fixed problem with a hand-set Gibbs state. Four observations per
/// period on [0, 2]^2, four corner knots, a two-point bandwidth grid.
struct Toy {
  SurveyDataset data;
  KnotSet knots;
  PriorConfig prior;
  ModelState state;
};

/// `spline` adds two shrunk columns (p = 4, span {2, 2}).
Toy make_toy(int num_periods, bool spline = false);

GibbsSampler toy_sampler(const Toy& toy, std::uint64_t seed,
                         ModelKind kind = ModelKind::kStzip);

/// Kernel matrix built entry by entry, plus the projector's jitter.
Eigen::MatrixXd naive_kernel(const KnotSet& knots, double h, double jitter);
/// Rows H^-1 V(s_i) through a full-pivot LU solve.
Eigen::MatrixXd naive_weights(const KnotSet& knots, double h, double jitter,
                              const Eigen::MatrixXd& locations);
/// Multivariate normal log density through LU.
double naive_mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& cov);

enum class GaussianBlock {
  kBeta,
  kBetaSpline,
  kGamma,
  kVInterior,
  kVLast,
  kEtaInterior,
  kEtaLast,
  kMuU,
  kMuXi,
};

std::vector<GaussianBlock> all_gaussian_blocks();
std::string to_string(GaussianBlock b);

struct GaussianTarget {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Analytic full conditional assembled from the model definition.
GaussianTarget gaussian_oracle(GaussianBlock b, const Toy& toy);

struct MomentCheck {
  std::string block;
  long draws = 0;
  double max_mean_z = 0.0;
  double cov_rel_err = 0.0;
  bool passes(double z_tol = 3.0, double cov_tol = 0.05) const {
    return max_mean_z < z_tol && cov_rel_err < cov_tol;
  }
};

MomentCheck check_gaussian_block(GaussianBlock b, long draws, std::uint64_t seed);

enum class ScalarBlock { kTauU, kTauXi, kSigma2V, kSigma2Eta, kTauP1, kTauP2 };

std::vector<ScalarBlock> all_scalar_blocks();
std::string to_string(ScalarBlock b);

/// Unnormalized log posterior of the block: log prior + log likelihood of
/// the quantities it governs, written out term by term.
double scalar_log_posterior(ScalarBlock b, const Toy& toy, double value);

/// Posterior of a positive scalar integrated on a uniform grid in log x over
/// the region where the log density is within 50 of its peak.
class PositiveGridPosterior {
 public:
  explicit PositiveGridPosterior(const std::function<double(double)>& log_density);
  double cdf(double x) const { return x > 0.0 ? log_cdf_(std::log(x)) : 0.0; }
  double mean() const;

 private:
  static GridCdf build(const std::function<double(double)>& log_density);
  GridCdf log_cdf_;
};

struct ScalarCheck {
  std::string block;
  long draws = 0;
  KsResult ks;
  double grid_mean = 0.0;
  double sample_mean = 0.0;
};

ScalarCheck check_scalar_block(ScalarBlock b, long draws, std::uint64_t seed);

}  // namespace stzip::testing

#endif  // STZIP_TESTS_CONJUGACY_HPP
