#ifndef STZIP_KERNEL_HPP
#define STZIP_KERNEL_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "stzip/model.hpp"

namespace stzip {

/// exp(-||a - b||^2 / h^2). Throws ConfigError for h <= 0.
double correlation(const Location& a, const Location& b, double h);

/// M distinct knot locations, stored as an M x 2 matrix.
class KnotSet {
 public:
  KnotSet() = default;
  /// Throws ConfigError if empty or two knots are closer than 1e-9.
  explicit KnotSet(Eigen::MatrixXd knots);

  Eigen::Index size() const noexcept { return knots_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return knots_; }
  Location knot(Eigen::Index k) const { return knots_.row(k).transpose(); }

  double min_separation() const;
  /// Median over all knot pairs; 0 for a single knot.
  double median_separation() const;

 private:
  Eigen::MatrixXd knots_;
};

/// Lloyd's k-means with k-means++ seeding. Stops after 100 iterations or
/// once no centroid moves by more than 1e-8. `locations` is n x 2.
/// Throws InputError if M exceeds the number of distinct locations.
KnotSet select_knots(const Eigen::MatrixXd& locations, int num_knots,
                     std::uint64_t seed);

/// Sum of squared distances from each location to its nearest knot.
double within_cluster_sse(const Eigen::MatrixXd& locations, const KnotSet& knots);

/// Low-rank predictive-process map for one bandwidth: D(s) = H^-1 V(s),
/// with H the knot correlation matrix plus a diagonal jitter.
class PredictiveProjector {
 public:
  PredictiveProjector() = default;

  /// Factorizes H + jitter I, escalating jitter 1e-8 -> 1e-6 -> 1e-4.
  /// Throws NumericalError reporting h and the knot spacing if all fail.
  static PredictiveProjector build(const KnotSet& knots, double bandwidth);

  const KnotSet& knots() const noexcept { return knots_; }
  double bandwidth() const noexcept { return bandwidth_; }
  double jitter() const noexcept { return jitter_; }
  Eigen::Index rank() const noexcept { return knots_.size(); }

  /// H including the jitter on the diagonal.
  const Eigen::MatrixXd& kernel_matrix() const noexcept { return kernel_; }
  const Eigen::MatrixXd& kernel_inverse() const noexcept { return kernel_inv_; }
  Eigen::MatrixXd cholesky_factor() const { return llt_.matrixL(); }
  double log_det() const noexcept { return log_det_; }

  /// V(s): correlations between s and every knot.
  Eigen::VectorXd cross_correlation(const Location& s) const;
  /// D(s;h) = H^-1 V(s;h).
  Eigen::VectorXd project(const Location& s) const;
  /// Rows D(s_i)' for every row of an n x 2 location matrix.
  Eigen::MatrixXd weights(const Eigen::MatrixXd& locations) const;

  /// mu' H^-1 mu.
  double quadratic_form(const Eigen::VectorXd& mu) const;

 private:
  KnotSet knots_;
  double bandwidth_ = 0.0;
  double jitter_ = 0.0;
  Eigen::MatrixXd kernel_;
  Eigen::MatrixXd kernel_inv_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

/// Ten log-spaced bandwidths between 0.1x and 2x the median knot separation.
std::vector<double> default_bandwidth_grid(const KnotSet& knots);

}  // namespace stzip

#endif  // STZIP_KERNEL_HPP
