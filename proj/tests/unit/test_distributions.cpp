#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "stats.hpp"
#include "stzip/distributions.hpp"
#include "stzip/errors.hpp"

namespace stzip {
namespace {

using testing::ks_one_sample;

TEST(DeriveSeed, DistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(derive_seed(42, s));
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
  EXPECT_NE(derive_seed(42, 7), derive_seed(43, 7));
}

TEST(Normal, CdfAndQuantile) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  for (double x : {-6.0, -2.5, -1.0, 0.3, 1.7, 4.0}) {
    EXPECT_NEAR(normal_cdf(x), testing::std_normal_cdf(x), 1e-15);
    EXPECT_NEAR(normal_quantile(normal_cdf(x)), x, 1e-8);
  }
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-9);
}

TEST(Normal, LogCdfDeepTail) {
  // log Phi(-x) ~ -x^2/2 - log(x sqrt(2 pi)) - 1/x^2 for large x.
  for (double x : {40.0, 100.0, 1000.0}) {
    const double asym = -0.5 * x * x - std::log(x * std::sqrt(2.0 * std::numbers::pi)) - 1.0 / (x * x);
    EXPECT_NEAR(normal_log_cdf(-x), asym, 1e-4 * std::abs(asym) / (x * x) + 1e-6);
  }
  EXPECT_NEAR(normal_log_cdf(1.0), std::log(testing::std_normal_cdf(1.0)), 1e-14);
  EXPECT_NEAR(normal_log_cdf(-3.0), std::log(testing::std_normal_cdf(-3.0)), 1e-13);
}

TEST(TruncatedNormal, HalfNormalMean) {
  Rng rng(1);
  const int n = 100000;
  double pos = 0.0;
  double neg = 0.0;
  for (int k = 0; k < n; ++k) {
    pos += sample_normal_positive(rng, 0.0);
    neg += sample_normal_nonpositive(rng, 0.0);
  }
  const double target = std::sqrt(2.0 / std::numbers::pi);
  EXPECT_NEAR(pos / n, target, 0.01 * target);
  EXPECT_NEAR(neg / n, -target, 0.01 * target);
}

TEST(TruncatedNormal, SupportIsRespected) {
  Rng rng(2);
  for (double m : {-30.0, -8.0, -2.0, 0.0, 3.0, 12.0}) {
    for (int k = 0; k < 2000; ++k) {
      const double a = sample_normal_positive(rng, m);
      const double b = sample_normal_nonpositive(rng, m);
      ASSERT_TRUE(std::isfinite(a) && a > 0.0) << m;
      ASSERT_TRUE(std::isfinite(b) && b <= 0.0) << m;
    }
  }
}

TEST(TruncatedNormal, FarTailMeanEight) {
  Rng rng(3);
  for (int k = 0; k < 10000; ++k) {
    const double g = sample_normal_positive(rng, -8.0);
    ASSERT_TRUE(std::isfinite(g));
    ASSERT_GT(g, 0.0);
    ASSERT_LT(g, 1.5);
  }
}

// Exact conditional CDF of N(0,1) above `a`, in long double.
double tail_cdf(double x, double a) {
  const long double qa = std::erfc(static_cast<long double>(a) / std::sqrt(2.0L));
  const long double qx = std::erfc(static_cast<long double>(x) / std::sqrt(2.0L));
  return static_cast<double>(1.0L - qx / qa);
}

TEST(TruncatedNormal, TailSamplerMatchesExtendedPrecisionCdf) {
  for (double a : {-1.0, 2.0, 4.9, 5.1, 8.0, 20.0}) {
    Rng rng(11);
    std::vector<double> x(20000);
    for (double& v : x) v = sample_std_normal_above(rng, a);
    for (double v : x) ASSERT_GE(v, a);
    const auto ks = ks_one_sample(x, [a](double v) { return tail_cdf(v, a); });
    EXPECT_GT(ks.p_value, 0.001) << "a = " << a << " D = " << ks.statistic;
  }
}

TEST(Gamma, MomentsAndInverseGammaKs) {
  Rng rng(5);
  const double shape = 3.5;
  const double rate = 2.0;
  const int n = 100000;
  double s = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = sample_gamma(rng, shape, rate);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, shape / rate, 4.0 * std::sqrt(shape) / rate / std::sqrt(n));
  EXPECT_NEAR(var, shape / (rate * rate), 0.03 * shape / (rate * rate));

  std::vector<double> ig(10000);
  for (double& v : ig) v = sample_inverse_gamma(rng, 2.5, 1.5);
  const testing::GridCdf cdf(
      [](double x) { return -3.5 * std::log(x) - 1.5 / x; }, 1e-4, 400.0, 400001);
  EXPECT_GT(ks_one_sample(ig, [&cdf](double x) { return cdf(x); }).p_value, 0.01);
}

TEST(Poisson, MeanAndZero) {
  Rng rng(6);
  for (double lambda : {0.3, 4.0, 60.0}) {
    double s = 0.0;
    const int n = 50000;
    for (int k = 0; k < n; ++k) s += sample_poisson(rng, lambda);
    EXPECT_NEAR(s / n, lambda, 4.0 * std::sqrt(lambda / n));
  }
  EXPECT_EQ(sample_poisson(rng, 0.0), 0);
}

TEST(Categorical, FrequenciesAndErrors) {
  Rng rng(7);
  const std::vector<double> logw{std::log(0.2), std::log(0.5), std::log(0.3)};
  std::vector<int> counts(3, 0);
  const int n = 20000;
  for (int k = 0; k < n; ++k) ++counts[sample_log_categorical(rng, logw)];
  EXPECT_NEAR(counts[0] / double(n), 0.2, 0.02);
  EXPECT_NEAR(counts[1] / double(n), 0.5, 0.02);
  EXPECT_NEAR(counts[2] / double(n), 0.3, 0.02);
  // Huge offsets cancel.
  const std::vector<double> shifted{-1e6, -1e6 + std::log(3.0)};
  int second = 0;
  for (int k = 0; k < n; ++k) second += static_cast<int>(sample_log_categorical(rng, shifted));
  EXPECT_NEAR(second / double(n), 0.75, 0.02);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(sample_log_categorical(rng, std::vector<double>{-inf, -inf}), NumericalError);
  EXPECT_THROW(sample_log_categorical(rng, std::vector<double>{0.0, NAN}), NumericalError);
  EXPECT_EQ(sample_log_categorical(rng, std::vector<double>{-inf, 0.0}), 1u);
}

TEST(GaussianCanonical, Moments) {
  Rng rng(8);
  Eigen::Matrix3d prec;
  prec << 4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0;
  const Eigen::Vector3d lin(1.0, -2.0, 0.5);
  const int n = 100000;
  Eigen::MatrixXd draws(n, 3);
  for (int k = 0; k < n; ++k) draws.row(k) = sample_gaussian_canonical(rng, prec, lin, "x").transpose();
  const auto m = testing::sample_moments(draws);
  const Eigen::Matrix3d cov = prec.inverse();
  EXPECT_LT(testing::max_standardized_error(m, cov * lin), 4.0);
  EXPECT_LT(testing::relative_frobenius(m.cov, cov), 0.03);
}

TEST(GaussianCanonical, IndefinitePrecisionNamesBlock) {
  Rng rng(9);
  Eigen::Matrix2d prec;
  prec << 1.0, 3.0, 3.0, 1.0;
  try {
    sample_gaussian_canonical(rng, prec, Eigen::Vector2d::Zero(), "mu_u");
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("mu_u"), std::string::npos);
  }
}

TEST(GaussianCanonical, NonFiniteInputsThrow) {
  Rng rng(10);
  Eigen::Matrix2d prec = Eigen::Matrix2d::Identity();
  prec(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(sample_gaussian_canonical(rng, prec, Eigen::Vector2d::Zero(), "beta"), NumericalError);
  EXPECT_THROW(sample_gaussian_canonical(rng, Eigen::Matrix2d::Identity(), Eigen::Vector2d(NAN, 0.0), "beta"),
               NumericalError);
}

}  // namespace
}  // namespace stzip
