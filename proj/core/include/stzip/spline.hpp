#ifndef STZIP_SPLINE_HPP
#define STZIP_SPLINE_HPP

#include <span>
#include <vector>

#include <Eigen/Core>

#include "stzip/model.hpp"

namespace stzip {

/// Truncated-power spline of degree q with K interior knots on [0, 1].
/// The raw covariate is mapped to [0, 1] with the training range.
struct SplineSpec {
  int degree = 2;
  std::vector<double> knots{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double input_min = 0.0;
  double input_max = 1.0;

  int num_knots() const noexcept { return static_cast<int>(knots.size()); }
  /// 1 + q + K.
  int basis_size() const noexcept { return 1 + degree + num_knots(); }
};

/// Throws ConfigError unless q >= 1, K >= 1, knots strictly increasing in
/// (0, 1) and input_max > input_min.
void validate(const SplineSpec& spec);

/// Freezes input_min / input_max to the range of the training values.
SplineSpec with_input_range(SplineSpec spec, std::span<const double> raw);

/// (1, x, ..., x^q, (x - k_1)_+^q, ..., (x - k_K)_+^q) with x the scaled
/// covariate. Values outside the training range are clamped to [0, 1] and a
/// warning is logged once per process.
Eigen::VectorXd basis_row(const SplineSpec& spec, double x_raw);

struct SplineDesign {
  Eigen::MatrixXd design;
  /// Columns holding the truncated-power coefficients.
  CoefficientSpan shrinkage;
};

/// Rows (extra covariates..., basis_row(raw)). `extra` may have zero columns.
/// Throws InputError on a length mismatch.
SplineDesign assemble_design(const SplineSpec& spec, std::span<const double> raw,
                             const Eigen::MatrixXd& extra);

}  // namespace stzip

#endif  // STZIP_SPLINE_HPP
