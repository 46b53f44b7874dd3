#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "stzip/errors.hpp"
#include "stzip/spline.hpp"

namespace stzip {
namespace {

TEST(BasisRow, Examples) {
  const SplineSpec spec;
  const Eigen::VectorXd zero = basis_row(spec, 0.0);
  ASSERT_EQ(zero.size(), 12);
  EXPECT_EQ(zero(0), 1.0);
  EXPECT_EQ(zero.tail(11).cwiseAbs().maxCoeff(), 0.0);

  const Eigen::VectorXd one = basis_row(spec, 1.0);
  EXPECT_DOUBLE_EQ(one(1), 1.0);
  EXPECT_DOUBLE_EQ(one(2), 1.0);
  for (int l = 1; l <= 9; ++l) EXPECT_NEAR(one(2 + l), std::pow(1.0 - l / 10.0, 2), 1e-15);
  EXPECT_NEAR(one(3), 0.81, 1e-15);
  EXPECT_NEAR(one(11), 0.01, 1e-15);

  const Eigen::VectorXd q = basis_row(spec, 0.25);
  EXPECT_NEAR(q(3), 0.0225, 1e-15);
  EXPECT_NEAR(q(4), 0.0025, 1e-15);
  for (int l = 3; l <= 9; ++l) EXPECT_EQ(q(2 + l), 0.0);
}

TEST(BasisRow, ScalesAndClamps) {
  SplineSpec spec;
  spec.input_min = 10.0;
  spec.input_max = 30.0;
  EXPECT_EQ(basis_row(spec, 15.0), basis_row(SplineSpec{}, 0.25));
  EXPECT_EQ(basis_row(spec, 45.0), basis_row(spec, 30.0));
  EXPECT_EQ(basis_row(spec, -3.0), basis_row(spec, 10.0));
}

TEST(BasisRow, EntriesInUnitInterval) {
  for (int q : {1, 2, 3}) {
    SplineSpec spec;
    spec.degree = q;
    for (double x = 0.0; x <= 1.0; x += 0.01) {
      const Eigen::VectorXd r = basis_row(spec, x);
      EXPECT_GE(r.minCoeff(), 0.0);
      EXPECT_LE(r.maxCoeff(), 1.0);
    }
  }
}

TEST(BasisRow, ContinuousDerivativesAcrossKnots) {
  SplineSpec spec;
  spec.degree = 3;
  Eigen::VectorXd coef(spec.basis_size());
  for (int j = 0; j < coef.size(); ++j) coef(j) = std::sin(1.3 * j + 0.2);
  auto f = [&](double x) { return basis_row(spec, x).dot(coef); };
  const double e = 1e-4;
  for (double k : spec.knots) {
    // Value, first and second derivatives from the left and right.
    EXPECT_NEAR(f(k - 1e-9), f(k + 1e-9), 1e-6);
    const double dl = (f(k) - f(k - e)) / e;
    const double dr = (f(k + e) - f(k)) / e;
    EXPECT_NEAR(dl, dr, 1e-2);
    const double d2l = (f(k) - 2 * f(k - e) + f(k - 2 * e)) / (e * e);
    const double d2r = (f(k + 2 * e) - 2 * f(k + e) + f(k)) / (e * e);
    EXPECT_NEAR(d2l, d2r, 0.5);
  }
}

TEST(Validate, RejectsBadSpecs) {
  SplineSpec s;
  s.degree = 0;
  EXPECT_THROW(validate(s), ConfigError);
  s = SplineSpec{};
  s.knots = {};
  EXPECT_THROW(validate(s), ConfigError);
  s.knots = {0.5, 0.4};
  EXPECT_THROW(validate(s), ConfigError);
  s.knots = {0.0, 0.5};
  EXPECT_THROW(validate(s), ConfigError);
  s.knots = {0.5, 1.0};
  EXPECT_THROW(validate(s), ConfigError);
  s = SplineSpec{};
  s.input_max = s.input_min;
  EXPECT_THROW(validate(s), ConfigError);
  EXPECT_THROW(basis_row(s, 0.5), ConfigError);
  EXPECT_NO_THROW(validate(SplineSpec{}));
}

TEST(InputRange, FrozenFromTraining) {
  const std::vector<double> raw{3.0, 9.0, 5.0};
  const SplineSpec s = with_input_range(SplineSpec{}, raw);
  EXPECT_EQ(s.input_min, 3.0);
  EXPECT_EQ(s.input_max, 9.0);
}

TEST(AssembleDesign, LayoutAndShrinkageSpan) {
  const SplineSpec spec;
  const std::vector<double> single{0.0};
  const auto d0 = assemble_design(spec, single, Eigen::MatrixXd(1, 0));
  ASSERT_EQ(d0.design.rows(), 1);
  EXPECT_EQ(d0.design.row(0), basis_row(spec, 0.0).transpose());

  const std::vector<double> raw{0.0, 0.1, 0.35, 0.6, 0.9, 1.0};
  const Eigen::MatrixXd extra = Eigen::VectorXd::LinSpaced(6, 12.0, 17.0);
  const auto d = assemble_design(spec, raw, extra);
  ASSERT_EQ(d.design.cols(), 13);
  EXPECT_EQ(d.design.col(0), extra.col(0));
  EXPECT_EQ(d.shrinkage.start, 4);
  EXPECT_EQ(d.shrinkage.length, 9);
  for (int c = 1; c < 13; ++c)
    for (int i = 1; i < 6; ++i) EXPECT_GE(d.design(i, c), d.design(i - 1, c));

  EXPECT_THROW(assemble_design(spec, raw, Eigen::MatrixXd(5, 1)), InputError);
}

}  // namespace
}  // namespace stzip
