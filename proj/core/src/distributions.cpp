#include "stzip/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <boost/math/special_functions/erf.hpp>

#include "stzip/errors.hpp"

namespace stzip {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Upper tail Q(x) = 1 - Phi(x).
double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master),
                    static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_log_cdf(double x) {
  if (x > 0.0) return std::log1p(-normal_sf(x));
  if (x > -20.0) return std::log(normal_cdf(x));
  // Asymptotic Mills-ratio expansion.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

double normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double sample_normal(Rng& rng, double mean, double sd) {
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

double sample_std_normal_above(Rng& rng, double lower) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (lower <= 5.0) {
    const double tail = normal_sf(lower);
    double u = 0.0;
    do {
      u = unif(rng);
    } while (u <= 0.0);
    // Q^-1(u * Q(lower)); u = 1 maps back onto the bound.
    const double x = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u * tail);
    return std::max(x, lower);
  }
  // Robert (1995) translated-exponential proposal.
  const double alpha = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  std::exponential_distribution<double> expo(alpha);
  for (;;) {
    const double x = lower + expo(rng);
    const double d = x - alpha;
    if (unif(rng) <= std::exp(-0.5 * d * d)) return x;
  }
}

double sample_normal_positive(Rng& rng, double mean) {
  return mean + sample_std_normal_above(rng, -mean);
}

double sample_normal_nonpositive(Rng& rng, double mean) {
  return -sample_normal_positive(rng, -mean);
}

double sample_gamma(Rng& rng, double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(rng);
}

double sample_inverse_gamma(Rng& rng, double shape, double scale) {
  return 1.0 / sample_gamma(rng, shape, scale);
}

int sample_poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<int> dist(mean);
  return dist(rng);
}

bool sample_bernoulli(Rng& rng, double p) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return unif(rng) < p;
}

std::size_t sample_log_categorical(Rng& rng, std::span<const double> log_weights) {
  double top = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) {
    if (std::isnan(w)) throw NumericalError("NaN log weight in categorical draw");
    top = std::max(top, w);
  }
  if (!std::isfinite(top)) {
    throw NumericalError("all categorical log weights are -inf");
  }
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - top);
  std::uniform_real_distribution<double> unif(0.0, total);
  double target = unif(rng);
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    target -= std::exp(log_weights[k] - top);
    if (target < 0.0) return k;
  }
  // Rounding left a sliver; return the last positive-mass entry.
  for (std::size_t k = log_weights.size(); k-- > 0;) {
    if (std::isfinite(log_weights[k])) return k;
  }
  return 0;
}

Eigen::VectorXd sample_gaussian_canonical(Rng& rng, const Eigen::MatrixXd& precision,
                                          const Eigen::VectorXd& linear,
                                          const char* block) {
  const Eigen::Index dim = precision.rows();
  if (!precision.allFinite() || !linear.allFinite()) {
    throw NumericalError(std::string("non-finite precision or linear term in ") + block, block);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    const double scale = std::max(1.0, precision.diagonal().cwiseAbs().maxCoeff());
    for (double jitter : {1e-8, 1e-6, 1e-4}) {
      Eigen::MatrixXd bumped = precision;
      bumped.diagonal().array() += jitter * scale;
      llt.compute(bumped);
      if (llt.info() == Eigen::Success) break;
    }
    if (llt.info() != Eigen::Success) {
      throw NumericalError(std::string("precision matrix not positive definite in ") +
                               block,
                           block);
    }
  }
  Eigen::VectorXd mean = llt.solve(linear);
  Eigen::VectorXd noise(dim);
  std::normal_distribution<double> std_normal;
  for (Eigen::Index k = 0; k < dim; ++k) noise(k) = std_normal(rng);
  // P = L L', so L'^-1 z has covariance P^-1.
  Eigen::VectorXd draw = mean + llt.matrixU().solve(noise);
  if (!draw.allFinite()) {
    throw NumericalError(std::string("non-finite draw in ") + block, block);
  }
  return draw;
}

}  // namespace stzip
