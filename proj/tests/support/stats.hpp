#ifndef STZIP_TESTS_STATS_HPP
#define STZIP_TESTS_STATS_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace stzip::testing {

/// Asymptotic Kolmogorov tail probability P(K > lambda).
double kolmogorov_tail(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// CDF of an unnormalized log density integrated with the trapezoid rule on
/// a uniform grid over [lo, hi].
class GridCdf {
 public:
  GridCdf(const std::function<double(double)>& log_density, double lo, double hi,
          int points = 20001);
  double operator()(double x) const;
  double mean() const { return expect([](double x) { return x; }); }
  /// Integral of f against the normalized density, midpoint per cell.
  double expect(const std::function<double(double)>& f) const;

 private:
  double lo_;
  double step_;
  std::vector<double> cdf_;
};

/// y log(lambda) - lambda - log(y!), straight from lgamma.
double poisson_logpmf(int y, double lambda);
double std_normal_cdf(double x);

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  /// Standard error of each mean entry (iid draws).
  Eigen::VectorXd mean_se;
};

/// Rows are draws.
Moments sample_moments(const Eigen::MatrixXd& draws);

/// Max over entries of |mean - target| / se.
double max_standardized_error(const Moments& m, const Eigen::VectorXd& target);
/// ||cov - target||_F / ||target||_F.
double relative_frobenius(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& target);

/// Plain Lloyd iterations from k distinct random points, returning the SSE.
double naive_kmeans_sse(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng,
                        int iterations = 100);

/// Lag-1..max_lag autocorrelation-based ESS (Geyer truncation), computed
/// directly without FFT.
double direct_ess(const std::vector<double>& x);

}  // namespace stzip::testing

#endif  // STZIP_TESTS_STATS_HPP
