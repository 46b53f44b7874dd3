#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "stats.hpp"
#include "stzip/polya_gamma.hpp"

namespace stzip {
namespace {

TEST(NbSurrogate, ZeroCountExample) {
  EXPECT_NEAR(nb_surrogate_logpmf(0, 1.0, 1e4), -1e4 * std::log1p(1e-4), 1e-12);
  EXPECT_NEAR(nb_surrogate_logpmf(0, 1.0, 1e4), -0.99995, 1e-6);
  EXPECT_NEAR(testing::poisson_logpmf(0, 1.0), -1.0, 1e-15);
}

TEST(NbSurrogate, ApproachesPoisson) {
  EXPECT_LT(std::abs(nb_surrogate_logpmf(2, 3.0, 1e6) - testing::poisson_logpmf(2, 3.0)), 1e-4);
  EXPECT_NEAR(nb_surrogate_logpmf(0, 1e-300, 1e4), 0.0, 1e-290);
}

TEST(NbSurrogate, Normalization) {
  for (double lambda : {0.1, 1.0, 5.0, 20.0}) {
    for (double delta : {1e3, 1e4}) {
      double total = 0.0;
      for (int y = 0; y <= 2000; ++y) total += std::exp(nb_surrogate_logpmf(y, lambda, delta));
      EXPECT_NEAR(total, 1.0, 1e-8) << lambda << " " << delta;
    }
  }
}

TEST(NbSurrogate, ErrorShrinksWithDelta) {
  for (double lambda : {0.1, 1.0, 5.0, 20.0}) {
    for (int y = 0; y <= 50; ++y) {
      double prev = INFINITY;
      for (double delta : {1e3, 1e4, 1e5}) {
        const double err = std::abs(std::expm1(nb_surrogate_logpmf(y, lambda, delta) -
                                               testing::poisson_logpmf(y, lambda)));
        EXPECT_LE(err, prev * (1.0 + 1e-9)) << y << " " << lambda;
        prev = err;
      }
    }
  }
}

TEST(NbSurrogate, KernelDiffersByLambdaFreeConstant) {
  const double delta = 5e3;
  for (int y : {0, 3, 17}) {
    const double c0 = nb_surrogate_logpmf(y, 0.5, delta) - nb_surrogate_kernel(y, std::log(0.5 / delta), delta);
    const double c1 = nb_surrogate_logpmf(y, 8.0, delta) - nb_surrogate_kernel(y, std::log(8.0 / delta), delta);
    EXPECT_NEAR(c0, c1, 1e-8);
  }
}

TEST(NbSurrogate, DomainErrors) {
  EXPECT_THROW(nb_surrogate_logpmf(1, 0.0, 1e4), std::domain_error);
  EXPECT_THROW(nb_surrogate_logpmf(1, -1.0, 1e4), std::domain_error);
  EXPECT_THROW(nb_surrogate_logpmf(1, 1.0, 0.0), std::domain_error);
}

TEST(PgMoments, Examples) {
  const auto lim = pg_moments(24.0, 0.0);
  EXPECT_DOUBLE_EQ(lim.mean, 6.0);
  EXPECT_DOUBLE_EQ(lim.var, 1.0);
  const auto m = pg_moments(2.0, 2.0);
  EXPECT_NEAR(m.mean, 0.5 * std::tanh(1.0), 1e-15);
  EXPECT_NEAR(m.mean, 0.380797, 1e-6);
  // 50-digit evaluation of the closed form.
  EXPECT_NEAR(m.var, 0.0427024767927173523, 1e-15);
  const double sech = 1.0 / std::cosh(1.0);
  EXPECT_NEAR(m.var, 2.0 / 32.0 * sech * sech * (std::sinh(2.0) - 2.0), 1e-15);
}

TEST(PgMoments, EvenPositiveAndBranchesAgree) {
  for (double b : {1.0, 1e3, 1e4 + 7}) {
    for (double c : {1e-9, 1e-5, 0.3, 4.0, 40.0}) {
      const auto p = pg_moments(b, c);
      const auto n = pg_moments(b, -c);
      EXPECT_EQ(p.mean, n.mean);
      EXPECT_EQ(p.var, n.var);
      EXPECT_GT(p.mean, 0.0);
      EXPECT_GT(p.var, 0.0);
    }
    const auto s = detail::pg_moments_series(b, 1e-4);
    const auto f = detail::pg_moments_closed_form(b, 1e-4);
    EXPECT_NEAR(s.mean / f.mean, 1.0, 1e-10);
    EXPECT_NEAR(s.var / f.var, 1.0, 1e-6);
    EXPECT_NEAR(s.var, f.var, 1e-10 * b);
  }
  EXPECT_THROW(pg_moments(0.0, 1.0), std::domain_error);
  EXPECT_THROW(pg_moments(-2.0, 1.0), std::domain_error);
}

TEST(SampleOmega, MonteCarloMoments) {
  Rng rng(3);
  const int n = 100000;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = sample_omega(1e4, 0.0, rng);
    ASSERT_GT(w, 0.0);
    s += w;
  }
  const double sd = std::sqrt(1e4 / 24.0);
  EXPECT_NEAR(s / n, 2500.0, 3.0 * sd / std::sqrt(double(n)));

  const auto target = pg_moments(1e4, 1.0);
  double a = 0.0;
  double a2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = sample_omega(1e4, 1.0, rng);
    a += w;
    a2 += w * w;
  }
  const double mean = a / n;
  EXPECT_NEAR((a2 / n - mean * mean) / target.var, 1.0, 0.05);
}

TEST(KappaPsi, Arithmetic) {
  EXPECT_DOUBLE_EQ(kappa_psi(0, 1e4, 0.0).kappa, -5000.0);
  EXPECT_DOUBLE_EQ(kappa_psi(3, 1e4, std::log(1e4)).psi, 0.0);
  EXPECT_DOUBLE_EQ(kappa_psi(1000, 1000.0, 1.0).kappa, 0.0);
  EXPECT_DOUBLE_EQ(kappa_psi(2, 1e3, 1.5).psi, 1.5 - std::log(1e3));
}

}  // namespace
}  // namespace stzip
