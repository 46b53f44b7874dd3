#include "stzip/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "stzip/diagnostics.hpp"
#include "stzip/distributions.hpp"
#include "stzip/errors.hpp"

namespace stzip {

std::vector<PredictionPoint> lattice_points(const LatticeSpec& spec) {
  if (!(spec.resolution > 0.0)) throw ConfigError("lattice resolution must be positive");
  if (!(spec.x_max >= spec.x_min) || !(spec.y_max >= spec.y_min)) {
    throw ConfigError("lattice bounding box is empty");
  }
  // Tolerance so that refining the resolution keeps the shared points.
  const double tol = 1e-9 * spec.resolution;
  const auto nx = static_cast<long>(std::floor((spec.x_max - spec.x_min + tol) / spec.resolution)) + 1;
  const auto ny = static_cast<long>(std::floor((spec.y_max - spec.y_min + tol) / spec.resolution)) + 1;
  std::vector<PredictionPoint> out;
  out.reserve(static_cast<std::size_t>(nx * ny) * spec.periods.size());
  for (int t : spec.periods) {
    if (t < 1) throw ConfigError("lattice periods must be at least 1");
    for (long j = 0; j < ny; ++j) {
      for (long i = 0; i < nx; ++i) {
        PredictionPoint p;
        p.location = Location(spec.x_min + static_cast<double>(i) * spec.resolution,
                              spec.y_min + static_cast<double>(j) * spec.resolution);
        p.period = t;
        p.covariates = spec.covariates;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

std::vector<PredictionPoint> points_from_dataset(const SurveyDataset& data) {
  std::vector<PredictionPoint> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out[i].location = data.locations().row(row).transpose();
    out[i].period = data.period_index(i) + 1;
    out[i].covariates = data.design().row(row).transpose();
  }
  return out;
}

std::vector<PredictiveProjector> projectors_for(const PosteriorDraws& draws) {
  std::vector<PredictiveProjector> out;
  if (!has_spatio_temporal(draws.model_kind)) return out;
  if (!draws.knots) throw ConfigError("draws carry no knot set");
  out.reserve(draws.bandwidth_grid.size());
  for (double h : draws.bandwidth_grid) out.push_back(PredictiveProjector::build(*draws.knots, h));
  return out;
}

namespace {

constexpr std::size_t kChunk = 64;

// Extra random-walk displacement per draw for each period past T.
struct FutureWalk {
  Eigen::MatrixXd v;
  Eigen::MatrixXd eta;
};

FutureWalk future_walk(const PosteriorDraws& draws, int max_period,
                       const PredictionOptions& options) {
  FutureWalk out;
  const int T = draws.num_periods;
  const int ahead = std::max(0, max_period - T);
  const auto s = static_cast<Eigen::Index>(draws.size());
  out.v = Eigen::MatrixXd::Zero(s, ahead);
  out.eta = Eigen::MatrixXd::Zero(s, ahead);
  if (!options.sample_future_walk || ahead == 0) return out;
  for (Eigen::Index d = 0; d < s; ++d) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(d)));
    double v = 0.0;
    double eta = 0.0;
    for (int k = 0; k < ahead; ++k) {
      if (draws.sigma2_v.size() > 0) v += sample_normal(rng, 0.0, std::sqrt(draws.sigma2_v(d)));
      if (draws.sigma2_eta.size() > 0) {
        eta += sample_normal(rng, 0.0, std::sqrt(draws.sigma2_eta(d)));
      }
      out.v(d, k) = v;
      out.eta(d, k) = eta;
    }
  }
  return out;
}

double time_effect(const Eigen::MatrixXd& effects, const Eigen::MatrixXd& walk,
                   Eigen::Index draw, int period) {
  if (effects.cols() == 0) return 0.0;
  const auto T = static_cast<int>(effects.cols());
  if (period <= T) return effects(draw, period - 1);
  return effects(draw, T - 1) + walk(draw, period - T - 1);
}

// Adds the spatial term for points [first, last) to `out` (draws x chunk).
void add_spatial(const Eigen::MatrixXd& mu, const std::vector<int>& h_index,
                 const std::vector<PredictiveProjector>& projectors,
                 const Eigen::MatrixXd& locations, Eigen::MatrixXd& out) {
  if (mu.cols() == 0) return;
  std::map<int, std::vector<Eigen::Index>> groups;
  for (std::size_t d = 0; d < h_index.size(); ++d) {
    groups[h_index[d]].push_back(static_cast<Eigen::Index>(d));
  }
  for (const auto& [h, rows] : groups) {
    const Eigen::MatrixXd w = projectors.at(static_cast<std::size_t>(h)).weights(locations);
    Eigen::MatrixXd mu_g(static_cast<Eigen::Index>(rows.size()), mu.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) mu_g.row(static_cast<Eigen::Index>(k)) = mu.row(rows[k]);
    const Eigen::MatrixXd field = mu_g * w.transpose();
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(rows[k]) += field.row(static_cast<Eigen::Index>(k));
  }
}

// Linear predictors (draws x chunk) for points [first, last).
void linear_predictors(const PosteriorDraws& draws, const std::vector<PredictionPoint>& points,
                       std::size_t first, std::size_t last,
                       const std::vector<PredictiveProjector>& projectors,
                       const FutureWalk& walk, Eigen::MatrixXd& m_lambda,
                       Eigen::MatrixXd& m_g) {
  const auto c = static_cast<Eigen::Index>(last - first);
  const auto p = draws.beta.cols();
  Eigen::MatrixXd x(c, p);
  Eigen::MatrixXd loc(c, 2);
  for (Eigen::Index j = 0; j < c; ++j) {
    const PredictionPoint& pt = points[first + static_cast<std::size_t>(j)];
    if (pt.covariates.size() != p) {
      throw ConfigError(fmt::format("prediction point {} has {} covariates, model has {}",
                                    first + static_cast<std::size_t>(j) + 1,
                                    pt.covariates.size(), p));
    }
    if (pt.period < 1) throw ConfigError("prediction period must be at least 1");
    x.row(j) = pt.covariates.transpose();
    loc.row(j) = pt.location.transpose();
  }
  m_lambda = draws.beta * x.transpose();
  add_spatial(draws.mu_u, draws.h_u_index, projectors, loc, m_lambda);
  const bool zi = draws.gamma.cols() > 0;
  if (zi) {
    m_g = draws.gamma * x.transpose();
    add_spatial(draws.mu_xi, draws.h_xi_index, projectors, loc, m_g);
  } else {
    m_g = Eigen::MatrixXd::Constant(m_lambda.rows(), c, -std::numeric_limits<double>::infinity());
  }
  for (Eigen::Index j = 0; j < c; ++j) {
    const int t = points[first + static_cast<std::size_t>(j)].period;
    for (Eigen::Index d = 0; d < m_lambda.rows(); ++d) {
      m_lambda(d, j) += time_effect(draws.v, walk.v, d, t);
      if (zi) m_g(d, j) += time_effect(draws.eta, walk.eta, d, t);
    }
  }
}

int max_period(const std::vector<PredictionPoint>& points) {
  int out = 1;
  for (const auto& p : points) out = std::max(out, p.period);
  return out;
}

}  // namespace

SurfaceDraws evaluate_surfaces(const PosteriorDraws& draws,
                               const std::vector<PredictionPoint>& points,
                               const std::vector<PredictiveProjector>& projectors,
                               const PredictionOptions& options) {
  const auto s = static_cast<Eigen::Index>(draws.size());
  const auto n = static_cast<Eigen::Index>(points.size());
  SurfaceDraws out{Eigen::MatrixXd(s, n), Eigen::MatrixXd(s, n)};
  const FutureWalk walk = future_walk(draws, max_period(points), options);
  Eigen::MatrixXd m_lambda;
  Eigen::MatrixXd m_g;
  for (std::size_t first = 0; first < points.size(); first += kChunk) {
    const std::size_t last = std::min(points.size(), first + kChunk);
    linear_predictors(draws, points, first, last, projectors, walk, m_lambda, m_g);
    for (Eigen::Index j = 0; j < m_lambda.cols(); ++j) {
      for (Eigen::Index d = 0; d < s; ++d) {
        const ZipMoments zm = zip_moments(m_g(d, j), m_lambda(d, j));
        out.mean_count(d, static_cast<Eigen::Index>(first) + j) = zm.mean;
        out.p_zero(d, static_cast<Eigen::Index>(first) + j) = zm.p_zero;
      }
    }
  }
  return out;
}

std::vector<PointSummary> predict_surfaces(const PosteriorDraws& draws,
                                           const std::vector<PredictionPoint>& points,
                                           const std::vector<PredictiveProjector>& projectors,
                                           const PredictionOptions& options) {
  if (draws.size() == 0) throw ConfigError("no posterior draws to predict from");
  for (double q : options.quantiles) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile levels must lie in [0, 1]");
  }
  std::vector<PointSummary> out(points.size());
  const FutureWalk walk = future_walk(draws, max_period(points), options);
  const auto s = static_cast<Eigen::Index>(draws.size());
  Eigen::MatrixXd m_lambda;
  Eigen::MatrixXd m_g;
  std::vector<double> mean(static_cast<std::size_t>(s));
  std::vector<double> zero(static_cast<std::size_t>(s));
  for (std::size_t first = 0; first < points.size(); first += kChunk) {
    const std::size_t last = std::min(points.size(), first + kChunk);
    linear_predictors(draws, points, first, last, projectors, walk, m_lambda, m_g);
    for (Eigen::Index j = 0; j < m_lambda.cols(); ++j) {
      for (Eigen::Index d = 0; d < s; ++d) {
        const ZipMoments zm = zip_moments(m_g(d, j), m_lambda(d, j));
        mean[static_cast<std::size_t>(d)] = zm.mean;
        zero[static_cast<std::size_t>(d)] = zm.p_zero;
      }
      PointSummary& ps = out[first + static_cast<std::size_t>(j)];
      ps.mean_count = sample_mean(mean);
      ps.p_zero = sample_mean(zero);
      ps.count_quantiles = quantiles(mean, options.quantiles);
      ps.p_zero_quantiles = quantiles(zero, options.quantiles);
    }
  }
  return out;
}

std::vector<PointSummary> predict_surfaces(const PosteriorDraws& draws,
                                           const std::vector<PredictionPoint>& points,
                                           const PredictionOptions& options) {
  return predict_surfaces(draws, points, projectors_for(draws), options);
}

PredictiveLoss posterior_predictive_loss(const PosteriorDraws& draws, const SurveyDataset& data,
                                         std::uint64_t seed) {
  if (draws.size() < 2) throw ConfigError("predictive loss needs at least two draws");
  const std::vector<PredictionPoint> points = points_from_dataset(data);
  const std::vector<PredictiveProjector> projectors = projectors_for(draws);
  const FutureWalk walk = future_walk(draws, max_period(points), {});
  const auto s = static_cast<Eigen::Index>(draws.size());
  Rng rng(seed);
  PredictiveLoss out;
  Eigen::MatrixXd m_lambda;
  Eigen::MatrixXd m_g;
  for (std::size_t first = 0; first < points.size(); first += kChunk) {
    const std::size_t last = std::min(points.size(), first + kChunk);
    linear_predictors(draws, points, first, last, projectors, walk, m_lambda, m_g);
    for (Eigen::Index j = 0; j < m_lambda.cols(); ++j) {
      double mean = 0.0;
      double m2 = 0.0;
      for (Eigen::Index d = 0; d < s; ++d) {
        const bool structural = sample_bernoulli(rng, normal_cdf(m_g(d, j)));
        const double y = structural ? 0.0 : sample_poisson(rng, std::exp(m_lambda(d, j)));
        const double delta = y - mean;
        mean += delta / static_cast<double>(d + 1);
        m2 += delta * (y - mean);
      }
      const double y_obs = data.counts()[first + static_cast<std::size_t>(j)];
      out.goodness += (y_obs - mean) * (y_obs - mean);
      out.penalty += m2 / static_cast<double>(s - 1);
    }
  }
  out.total = out.goodness + out.penalty;
  return out;
}

ValidationErrors validation_errors(const Eigen::VectorXd& predicted,
                                   const std::vector<int>& observed) {
  if (observed.empty()) throw InputError("empty test set");
  if (static_cast<std::size_t>(predicted.size()) != observed.size()) {
    throw InputError(fmt::format("{} predictions for {} test counts", predicted.size(),
                                 observed.size()));
  }
  ValidationErrors out;
  out.n_test = static_cast<long>(observed.size());
  double abs_sum = 0.0;
  double rel1 = 0.0;
  double rel2 = 0.0;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    const double y = observed[j];
    const double err = std::abs(y - predicted(static_cast<Eigen::Index>(j)));
    abs_sum += err;
    rel1 += err / (y + 1.0);
    if (observed[j] > 0) {
      rel2 += err / y;
      ++out.n_positive;
    }
  }
  const auto m = static_cast<double>(out.n_test);
  out.mae = abs_sum / m;
  out.mape1 = rel1 / m;
  out.mape2_defined = out.n_positive > 0;
  out.mape2 = out.mape2_defined ? rel2 / static_cast<double>(out.n_positive) : 0.0;
  return out;
}

namespace {

int modal_index(const std::vector<int>& idx) {
  std::map<int, long> counts;
  for (int h : idx) ++counts[h];
  int best = 0;
  long best_count = -1;
  for (const auto& [h, c] : counts) {
    if (c > best_count) {
      best = h;
      best_count = c;
    }
  }
  return best;
}

PosteriorDraws posterior_mean_draw(const PosteriorDraws& draws) {
  PosteriorDraws out;
  out.model_kind = draws.model_kind;
  out.knots = draws.knots;
  out.bandwidth_grid = draws.bandwidth_grid;
  out.num_periods = draws.num_periods;
  out.num_covariates = draws.num_covariates;
  out.shrinkage = draws.shrinkage;
  out.iteration = {0};
  auto col_mean = [](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
    if (m.cols() == 0) return Eigen::MatrixXd(1, 0);
    return m.colwise().mean();
  };
  out.beta = col_mean(draws.beta);
  out.gamma = col_mean(draws.gamma);
  out.mu_u = col_mean(draws.mu_u);
  out.mu_xi = col_mean(draws.mu_xi);
  out.v = col_mean(draws.v);
  out.eta = col_mean(draws.eta);
  if (!draws.h_u_index.empty()) out.h_u_index = {modal_index(draws.h_u_index)};
  if (!draws.h_xi_index.empty()) out.h_xi_index = {modal_index(draws.h_xi_index)};
  return out;
}

}  // namespace

Eigen::VectorXd point_predict_holdout(const PosteriorDraws& draws, const SurveyDataset& test,
                                      bool plug_in) {
  if (draws.size() == 0) throw ConfigError("no posterior draws to predict from");
  const std::vector<PredictionPoint> points = points_from_dataset(test);
  const std::vector<PredictiveProjector> projectors = projectors_for(draws);
  const SurfaceDraws surf = plug_in
                                ? evaluate_surfaces(posterior_mean_draw(draws), points, projectors)
                                : evaluate_surfaces(draws, points, projectors);
  return surf.mean_count.colwise().mean().transpose();
}

}  // namespace stzip
