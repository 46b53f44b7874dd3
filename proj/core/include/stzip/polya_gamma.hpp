#ifndef STZIP_POLYA_GAMMA_HPP
#define STZIP_POLYA_GAMMA_HPP

#include "stzip/distributions.hpp"

namespace stzip {

/// Smallest shape for which the normal approximation to PG(b, c) is used
/// without a warning.
inline constexpr double kPgNormalRegime = 1e3;

/// log of Gamma(y+delta) / (Gamma(delta) y!) * (lambda/delta)^y /
/// (lambda/delta + 1)^(y+delta), the negative-binomial stand-in for the
/// Poisson pmf. Throws std::domain_error for lambda <= 0 or delta <= 0.
double nb_surrogate_logpmf(int y, double lambda, double delta);

/// The same mass with the lambda-free normalizing constant dropped:
/// y * psi - (y + delta) * log(1 + e^psi), psi = log(lambda / delta).
double nb_surrogate_kernel(int y, double psi, double delta);

/// Mean and variance of PG(b, c).
struct PgApprox {
  double b = 0.0;
  double c = 0.0;
  double mean = 0.0;
  double var = 0.0;
};

/// Exact first two moments of PG(b, c):
///   mean = b / (2c) tanh(c / 2)
///   var  = b / (4c^3) sech^2(c / 2) (sinh c - c)
/// with the c -> 0 limits b/4 and b/24 taken by Taylor series for
/// |c| < 1e-4. Both are even in c. Throws std::domain_error for b <= 0.
PgApprox pg_moments(double b, double c);

namespace detail {
/// Closed-form branch of pg_moments, used for any c != 0.
PgApprox pg_moments_closed_form(double b, double c);
/// Series branch of pg_moments.
PgApprox pg_moments_series(double b, double c);
}  // namespace detail

/// One draw of omega ~ PG(b, c) through N(mean, var). Draws that land at or
/// below zero are redrawn up to 10 times and then clamped to mean * 1e-6.
/// b below kPgNormalRegime logs a warning once per process.
double sample_omega(double b, double c, Rng& rng);

struct KappaPsi {
  double kappa = 0.0;
  double psi = 0.0;
};

/// kappa = (y - delta) / 2, psi = lin_pred - log(delta).
KappaPsi kappa_psi(int y, double delta, double lin_pred_intensity);

}  // namespace stzip

#endif  // STZIP_POLYA_GAMMA_HPP
