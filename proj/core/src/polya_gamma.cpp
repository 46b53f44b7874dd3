#include "stzip/polya_gamma.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace stzip {

namespace {

constexpr double kSeriesSwitch = 1e-4;

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// (sinh c - c) / c^3 for |c| < 1, summed until the terms stop mattering.
double sinh_excess_ratio(double c) {
  const double c2 = c * c;
  double term = 1.0 / 6.0;
  double sum = term;
  for (int k = 2; k < 30; ++k) {
    term *= c2 / ((2.0 * k) * (2.0 * k + 1.0));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace

double nb_surrogate_logpmf(int y, double lambda, double delta) {
  if (y < 0) throw std::domain_error("count must be non-negative");
  if (!(lambda > 0.0)) throw std::domain_error("intensity must be positive");
  if (!(delta > 0.0)) throw std::domain_error("delta must be positive");
  const double tail = -(y + delta) * std::log1p(lambda / delta);
  if (y == 0) return tail;
  double rising = 0.0;
  if (y < 1000) {
    // log Gamma(y+delta) - log Gamma(delta) - y log delta, without cancellation.
    for (int k = 0; k < y; ++k) rising += std::log1p(k / delta);
  } else {
    rising = std::lgamma(y + delta) - std::lgamma(delta) - y * std::log(delta);
  }
  return rising + y * std::log(lambda) - std::lgamma(y + 1.0) + tail;
}

double nb_surrogate_kernel(int y, double psi, double delta) {
  return y * psi - (y + delta) * softplus(psi);
}

namespace detail {

PgApprox pg_moments_series(double b, double c) {
  const double c2 = c * c;
  PgApprox out{b, c, 0.0, 0.0};
  out.mean = 0.25 * b * (1.0 - c2 / 12.0 + c2 * c2 / 120.0);
  out.var = b / 24.0 * (1.0 - c2 / 5.0 + 17.0 * c2 * c2 / 560.0);
  return out;
}

PgApprox pg_moments_closed_form(double b, double c) {
  const double a = std::abs(c);
  const double half = 0.5 * a;
  const double th = std::tanh(half);
  const double ch = std::cosh(half);
  const double sech2 = 1.0 / (ch * ch);
  PgApprox out{b, c, 0.0, 0.0};
  out.mean = b / (2.0 * a) * th;
  if (a < 1.0) {
    out.var = 0.25 * b * sech2 * sinh_excess_ratio(a);
  } else {
    // sech^2(c/2) sinh(c) = 2 tanh(c/2); avoids overflow of sinh.
    out.var = b / (4.0 * a * a * a) * (2.0 * th - a * sech2);
  }
  return out;
}

}  // namespace detail

PgApprox pg_moments(double b, double c) {
  if (!(b > 0.0)) throw std::domain_error("Polya-gamma shape must be positive");
  if (std::abs(c) < kSeriesSwitch) return detail::pg_moments_series(b, c);
  return detail::pg_moments_closed_form(b, c);
}

double sample_omega(double b, double c, Rng& rng) {
  if (b < kPgNormalRegime) {
    static std::once_flag warned;
    std::call_once(warned, [b] {
      spdlog::warn("Polya-gamma shape {} is below the normal-approximation regime ({})",
                   b, kPgNormalRegime);
    });
  }
  const PgApprox m = pg_moments(b, c);
  const double sd = std::sqrt(m.var);
  std::normal_distribution<double> dist(m.mean, sd);
  for (int attempt = 0; attempt <= 10; ++attempt) {
    const double draw = dist(rng);
    if (draw > 0.0) return draw;
  }
  return m.mean * 1e-6;
}

KappaPsi kappa_psi(int y, double delta, double lin_pred_intensity) {
  return {0.5 * (y - delta), lin_pred_intensity - std::log(delta)};
}

}  // namespace stzip
