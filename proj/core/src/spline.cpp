#include "stzip/spline.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "stzip/errors.hpp"

namespace stzip {

void validate(const SplineSpec& spec) {
  if (spec.degree < 1) throw ConfigError("spline degree must be at least 1");
  if (spec.knots.empty()) throw ConfigError("spline needs at least one knot");
  for (std::size_t l = 0; l < spec.knots.size(); ++l) {
    const double k = spec.knots[l];
    if (!(k > 0.0 && k < 1.0)) {
      throw ConfigError(fmt::format("spline knot {} outside (0, 1)", k));
    }
    if (l > 0 && !(k > spec.knots[l - 1])) {
      throw ConfigError("spline knots must be strictly increasing");
    }
  }
  if (!(spec.input_max > spec.input_min)) {
    throw ConfigError(fmt::format("degenerate spline input range [{}, {}]",
                                  spec.input_min, spec.input_max));
  }
}

SplineSpec with_input_range(SplineSpec spec, std::span<const double> raw) {
  if (raw.empty()) throw InputError("no values to fix the spline input range");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  spec.input_min = *lo;
  spec.input_max = *hi;
  validate(spec);
  return spec;
}

Eigen::VectorXd basis_row(const SplineSpec& spec, double x_raw) {
  if (!(spec.input_max > spec.input_min)) {
    throw ConfigError(fmt::format("degenerate spline input range [{}, {}]",
                                  spec.input_min, spec.input_max));
  }
  double x = (x_raw - spec.input_min) / (spec.input_max - spec.input_min);
  if (x < 0.0 || x > 1.0) {
    static std::once_flag warned;
    std::call_once(warned, [x_raw] {
      spdlog::warn("spline input {} outside the training range; clamped", x_raw);
    });
    x = std::clamp(x, 0.0, 1.0);
  }
  Eigen::VectorXd row(spec.basis_size());
  double power = 1.0;
  for (int j = 0; j <= spec.degree; ++j) {
    row(j) = power;
    power *= x;
  }
  for (int l = 0; l < spec.num_knots(); ++l) {
    const double excess = std::max(x - spec.knots[l], 0.0);
    row(1 + spec.degree + l) = std::pow(excess, spec.degree);
  }
  return row;
}

SplineDesign assemble_design(const SplineSpec& spec, std::span<const double> raw,
                             const Eigen::MatrixXd& extra) {
  const auto n = static_cast<Eigen::Index>(raw.size());
  if (extra.rows() != n && extra.cols() > 0) {
    throw InputError(fmt::format("spline covariate has {} rows but extra covariates have {}",
                                 n, extra.rows()));
  }
  const Eigen::Index e = extra.cols();
  SplineDesign out;
  out.design.resize(n, e + spec.basis_size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (e > 0) out.design.row(i).head(e) = extra.row(i);
    out.design.row(i).tail(spec.basis_size()) = basis_row(spec, raw[i]).transpose();
  }
  out.shrinkage.start = static_cast<int>(e) + 1 + spec.degree;
  out.shrinkage.length = spec.num_knots();
  return out;
}

}  // namespace stzip
