#include "stzip/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <fmt/format.h>
#include <unsupported/Eigen/FFT>

#include "stzip/errors.hpp"

namespace stzip {

double sample_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

std::vector<double> quantiles(std::span<const double> values, const std::vector<double>& levels) {
  std::vector<double> out(levels.size(), 0.0);
  if (values.empty()) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double last = static_cast<double>(sorted.size() - 1);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double pos = std::clamp(levels[k], 0.0, 1.0) * last;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    out[k] = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }
  return out;
}

double effective_sample_size(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = sample_mean(values);
  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  std::vector<double> padded(len, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[i] = values[i] - mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, padded);
  for (auto& f : freq) f = std::norm(f);
  std::vector<std::complex<double>> back;
  fft.inv(back, freq);
  std::vector<double> acov(n);
  for (std::size_t k = 0; k < n; ++k) acov[k] = back[k].real();
  if (!(acov[0] > 0.0)) return static_cast<double>(n);

  auto rho = [&](std::size_t k) { return acov[k] / acov[0]; };
  double tau = -1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    prev = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / tau;
}

FlatDraws flatten(const PosteriorDraws& draws) {
  FlatDraws out;
  const auto s = static_cast<Eigen::Index>(draws.size());
  std::vector<Eigen::VectorXd> cols;
  auto add_block = [&](const Eigen::MatrixXd& m, const char* name, int base) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out.names.push_back(fmt::format("{}_{}", name, j + base));
      cols.emplace_back(m.col(j));
    }
  };
  auto add_scalar = [&](const Eigen::VectorXd& v, const char* name) {
    if (v.size() == 0) return;
    out.names.emplace_back(name);
    cols.push_back(v);
  };
  auto add_bandwidth = [&](const std::vector<int>& idx, const char* name) {
    if (idx.empty()) return;
    Eigen::VectorXd v(s);
    for (Eigen::Index d = 0; d < s; ++d) {
      v(d) = draws.bandwidth_grid.at(static_cast<std::size_t>(idx[static_cast<std::size_t>(d)]));
    }
    out.names.emplace_back(name);
    cols.push_back(std::move(v));
  };
  add_block(draws.beta, "beta", 0);
  add_block(draws.gamma, "gamma", 0);
  add_block(draws.mu_u, "mu_u", 1);
  add_block(draws.mu_xi, "mu_xi", 1);
  add_block(draws.v, "v", 1);
  add_block(draws.eta, "eta", 1);
  add_scalar(draws.tau_u, "tau_u");
  add_scalar(draws.tau_xi, "tau_xi");
  add_scalar(draws.sigma2_v, "sigma2_v");
  add_scalar(draws.sigma2_eta, "sigma2_eta");
  add_scalar(draws.tau_p1, "tau_p1");
  add_scalar(draws.tau_p2, "tau_p2");
  add_bandwidth(draws.h_u_index, "h_u");
  add_bandwidth(draws.h_xi_index, "h_xi");
  out.values.resize(s, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.values.col(static_cast<Eigen::Index>(j)) = cols[j];
  return out;
}

std::vector<ParameterSummary> summarize(const PosteriorDraws& draws) {
  const FlatDraws flat = flatten(draws);
  std::vector<ParameterSummary> out;
  out.reserve(flat.names.size());
  const Eigen::Index s = flat.values.rows();
  for (std::size_t j = 0; j < flat.names.size(); ++j) {
    const Eigen::VectorXd col = flat.values.col(static_cast<Eigen::Index>(j));
    const std::span<const double> v(col.data(), static_cast<std::size_t>(col.size()));
    ParameterSummary ps;
    ps.name = flat.names[j];
    ps.mean = sample_mean(v);
    if (s > 1) {
      ps.sd = std::sqrt((col.array() - ps.mean).square().sum() / static_cast<double>(s - 1));
    }
    const std::vector<double> q = quantiles(v, {0.025, 0.975});
    ps.q025 = q[0];
    ps.q975 = q[1];
    ps.ess = effective_sample_size(v);
    out.push_back(std::move(ps));
  }
  return out;
}

}  // namespace stzip
