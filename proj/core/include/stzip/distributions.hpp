#ifndef STZIP_DISTRIBUTIONS_HPP
#define STZIP_DISTRIBUTIONS_HPP

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Core>

namespace stzip {

using Rng = std::mt19937_64;

/// Deterministic child seed for stream `stream` of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

double normal_cdf(double x);
/// log Phi(x), accurate far into the lower tail.
double normal_log_cdf(double x);
/// Phi^-1(p) for p in (0, 1).
double normal_quantile(double p);

double sample_normal(Rng& rng, double mean = 0.0, double sd = 1.0);

/// N(mean, 1) truncated to (0, inf).
double sample_normal_positive(Rng& rng, double mean);
/// N(mean, 1) truncated to (-inf, 0].
double sample_normal_nonpositive(Rng& rng, double mean);

/// N(0, 1) truncated to [lower, inf). Inverse-CDF on the upper tail for
/// lower <= 5, exponential rejection beyond.
double sample_std_normal_above(Rng& rng, double lower);

/// Gamma with shape/rate parameterization.
double sample_gamma(Rng& rng, double shape, double rate);
/// Inverse gamma IG(shape, scale): 1 / Ga(shape, rate = scale).
double sample_inverse_gamma(Rng& rng, double shape, double scale);

int sample_poisson(Rng& rng, double mean);
bool sample_bernoulli(Rng& rng, double p);

/// Index drawn with probabilities proportional to exp(log_weights).
/// Throws NumericalError when every weight is -inf or any is NaN.
std::size_t sample_log_categorical(Rng& rng, std::span<const double> log_weights);

/// Draw from N(P^-1 b, P^-1) given the precision P and linear term b.
/// P is factorized with a jitter ladder on failure; throws NumericalError
/// naming `block` if every rung fails or any input or output is not finite.
Eigen::VectorXd sample_gaussian_canonical(Rng& rng, const Eigen::MatrixXd& precision,
                                          const Eigen::VectorXd& linear,
                                          const char* block);

}  // namespace stzip

#endif  // STZIP_DISTRIBUTIONS_HPP
