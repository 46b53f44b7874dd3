#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stzip::testing {

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw std::invalid_argument("empty sample");
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sq = std::sqrt(n);
  return {d, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d)};
}

GridCdf::GridCdf(const std::function<double(double)>& log_density, double lo, double hi,
                 int points)
    : lo_(lo), step_((hi - lo) / (points - 1)), cdf_(static_cast<std::size_t>(points), 0.0) {
  std::vector<double> logd(cdf_.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < logd.size(); ++k) {
    logd[k] = log_density(lo + static_cast<double>(k) * step_);
    peak = std::max(peak, logd[k]);
  }
  std::vector<double> dens(logd.size());
  for (std::size_t k = 0; k < logd.size(); ++k) dens[k] = std::exp(logd[k] - peak);
  for (std::size_t k = 1; k < dens.size(); ++k) {
    cdf_[k] = cdf_[k - 1] + 0.5 * (dens[k] + dens[k - 1]) * step_;
  }
  const double total = cdf_.back();
  for (double& c : cdf_) c /= total;
}

double GridCdf::expect(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (std::size_t k = 1; k < cdf_.size(); ++k) {
    s += (cdf_[k] - cdf_[k - 1]) * f(lo_ + (static_cast<double>(k) - 0.5) * step_);
  }
  return s;
}

double GridCdf::operator()(double x) const {
  const double pos = (x - lo_) / step_;
  if (pos <= 0.0) return 0.0;
  const auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= cdf_.size()) return 1.0;
  const double frac = pos - static_cast<double>(k);
  return cdf_[k] + frac * (cdf_[k + 1] - cdf_[k]);
}

double poisson_logpmf(int y, double lambda) {
  return y * std::log(lambda) - lambda - std::lgamma(y + 1.0);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Moments sample_moments(const Eigen::MatrixXd& draws) {
  Moments m;
  const auto n = static_cast<double>(draws.rows());
  m.mean = draws.colwise().mean().transpose();
  const Eigen::MatrixXd centered = draws.rowwise() - m.mean.transpose();
  m.cov = centered.transpose() * centered / (n - 1.0);
  m.mean_se = (m.cov.diagonal() / n).cwiseSqrt();
  return m;
}

double max_standardized_error(const Moments& m, const Eigen::VectorXd& target) {
  return ((m.mean - target).cwiseAbs().array() / m.mean_se.array()).maxCoeff();
}

double relative_frobenius(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& target) {
  return (cov - target).norm() / target.norm();
}

double naive_kmeans_sse(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng,
                        int iterations) {
  const Eigen::Index n = points.rows();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Eigen::MatrixXd centers(k, points.cols());
  for (int c = 0; c < k; ++c) centers.row(c) = points.row(idx[static_cast<std::size_t>(c)]);
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  double sse = 0.0;
  for (int it = 0; it < iterations; ++it) {
    sse = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          label[static_cast<std::size_t>(i)] = c;
        }
      }
      sse += best;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(label[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
    }
  }
  double final_sse = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) best = std::min(best, (points.row(i) - centers.row(c)).squaredNorm());
    final_sse += best;
  }
  return final_sse;
}

double direct_ess(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  auto acov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = acov(0);
  if (!(c0 > 0.0)) return static_cast<double>(n);
  double tau = -1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (acov(2 * k) + acov(2 * k + 1)) / c0;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    prev = pair;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / std::max(tau, 1e-12);
}

}  // namespace stzip::testing
