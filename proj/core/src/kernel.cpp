#include "stzip/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include <fmt/format.h>

#include "stzip/distributions.hpp"
#include "stzip/errors.hpp"

namespace stzip {

namespace {

constexpr double kMinKnotSeparation = 1e-9;

Eigen::MatrixXd distinct_rows(const Eigen::MatrixXd& locations) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(locations.rows()));
  for (Eigen::Index i = 0; i < locations.rows(); ++i) {
    pts.emplace_back(locations(i, 0), locations(i, 1));
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out(static_cast<Eigen::Index>(i), 0) = pts[i].first;
    out(static_cast<Eigen::Index>(i), 1) = pts[i].second;
  }
  return out;
}

double sq_dist(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
               Eigen::Index k) {
  const double dx = a(i, 0) - b(k, 0);
  const double dy = a(i, 1) - b(k, 1);
  return dx * dx + dy * dy;
}

}  // namespace

double correlation(const Location& a, const Location& b, double h) {
  if (!(h > 0.0)) throw ConfigError(fmt::format("bandwidth must be positive, got {}", h));
  return std::exp(-(a - b).squaredNorm() / (h * h));
}

KnotSet::KnotSet(Eigen::MatrixXd knots) : knots_(std::move(knots)) {
  if (knots_.rows() < 1 || knots_.cols() != 2) {
    throw ConfigError("knot set needs at least one 2-D knot");
  }
  if (!knots_.allFinite()) throw ConfigError("knot coordinates must be finite");
  if (knots_.rows() > 1 && min_separation() <= kMinKnotSeparation) {
    throw ConfigError("knots must be pairwise distinct");
  }
}

double KnotSet::min_separation() const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < knots_.rows(); ++i) {
    for (Eigen::Index k = i + 1; k < knots_.rows(); ++k) {
      best = std::min(best, std::sqrt(sq_dist(knots_, i, knots_, k)));
    }
  }
  return best;
}

double KnotSet::median_separation() const {
  std::vector<double> d;
  for (Eigen::Index i = 0; i < knots_.rows(); ++i) {
    for (Eigen::Index k = i + 1; k < knots_.rows(); ++k) {
      d.push_back(std::sqrt(sq_dist(knots_, i, knots_, k)));
    }
  }
  if (d.empty()) return 0.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

KnotSet select_knots(const Eigen::MatrixXd& locations, int num_knots,
                     std::uint64_t seed) {
  if (num_knots < 1) throw InputError("number of knots must be at least 1");
  if (locations.cols() != 2) throw InputError("locations must be n x 2");
  const Eigen::MatrixXd distinct = distinct_rows(locations);
  if (num_knots > distinct.rows()) {
    throw InputError(fmt::format("{} knots requested but only {} distinct locations",
                                 num_knots, distinct.rows()));
  }
  const Eigen::Index n = locations.rows();
  const Eigen::Index m = num_knots;
  Rng rng(seed);

  // k-means++ seeding over the raw locations (duplicates keep their weight).
  Eigen::MatrixXd centers(m, 2);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = locations.row(first(rng));
  std::vector<double> nearest(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
  for (Eigen::Index c = 1; c < m; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(locations, i, centers, c - 1));
    }
    std::discrete_distribution<Eigen::Index> pick(nearest.begin(), nearest.end());
    centers.row(c) = locations.row(pick(rng));
  }

  std::vector<Eigen::Index> label(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < m; ++c) {
        const double d = sq_dist(locations, i, centers, c);
        if (d < best) {
          best = d;
          label[i] = c;
        }
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, 2);
    Eigen::VectorXd sizes = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(label[i]) += locations.row(i);
      sizes(label[i]) += 1.0;
    }
    Eigen::MatrixXd updated = centers;
    for (Eigen::Index c = 0; c < m; ++c) {
      if (sizes(c) > 0) {
        updated.row(c) = sums.row(c) / sizes(c);
        continue;
      }
      // Empty cluster: move it onto the point worst served by its center.
      Eigen::Index worst = 0;
      double worst_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = sq_dist(locations, i, updated, label[i]);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      updated.row(c) = locations.row(worst);
      label[worst] = c;
    }
    const double shift = (updated - centers).rowwise().norm().maxCoeff();
    centers = std::move(updated);
    if (shift < 1e-8) break;
  }
  return KnotSet(std::move(centers));
}

double within_cluster_sse(const Eigen::MatrixXd& locations, const KnotSet& knots) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < locations.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < knots.size(); ++c) {
      best = std::min(best, sq_dist(locations, i, knots.matrix(), c));
    }
    total += best;
  }
  return total;
}

PredictiveProjector PredictiveProjector::build(const KnotSet& knots, double bandwidth) {
  if (!(bandwidth > 0.0)) {
    throw ConfigError(fmt::format("bandwidth must be positive, got {}", bandwidth));
  }
  const Eigen::Index m = knots.size();
  Eigen::MatrixXd base(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    base(i, i) = 1.0;
    for (Eigen::Index k = 0; k < i; ++k) {
      base(i, k) = base(k, i) = correlation(knots.knot(i), knots.knot(k), bandwidth);
    }
  }

  PredictiveProjector proj;
  proj.knots_ = knots;
  proj.bandwidth_ = bandwidth;
  for (double jitter : {1e-8, 1e-6, 1e-4}) {
    proj.kernel_ = base;
    proj.kernel_.diagonal().array() += jitter;
    proj.llt_.compute(proj.kernel_);
    if (proj.llt_.info() == Eigen::Success) {
      proj.jitter_ = jitter;
      break;
    }
  }
  if (proj.llt_.info() != Eigen::Success) {
    throw NumericalError(fmt::format(
        "knot kernel matrix not positive definite for h = {} (min knot spacing {})",
        bandwidth, m > 1 ? knots.min_separation() : 0.0));
  }
  proj.log_det_ = 2.0 * proj.llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
  proj.kernel_inv_ = proj.llt_.solve(Eigen::MatrixXd::Identity(m, m));
  proj.kernel_inv_ = 0.5 * (proj.kernel_inv_ + proj.kernel_inv_.transpose()).eval();
  return proj;
}

Eigen::VectorXd PredictiveProjector::cross_correlation(const Location& s) const {
  Eigen::VectorXd v(rank());
  for (Eigen::Index k = 0; k < rank(); ++k) v(k) = correlation(s, knots_.knot(k), bandwidth_);
  return v;
}

Eigen::VectorXd PredictiveProjector::project(const Location& s) const {
  return llt_.solve(cross_correlation(s));
}

Eigen::MatrixXd PredictiveProjector::weights(const Eigen::MatrixXd& locations) const {
  const Eigen::Index n = locations.rows();
  Eigen::MatrixXd cross(rank(), n);
  const double inv_h2 = 1.0 / (bandwidth_ * bandwidth_);
  const Eigen::MatrixXd& kn = knots_.matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < rank(); ++k) {
      cross(k, i) = std::exp(-sq_dist(locations, i, kn, k) * inv_h2);
    }
  }
  return llt_.solve(cross).transpose();
}

double PredictiveProjector::quadratic_form(const Eigen::VectorXd& mu) const {
  return mu.dot(llt_.solve(mu));
}

std::vector<double> default_bandwidth_grid(const KnotSet& knots) {
  double scale = knots.median_separation();
  if (!(scale > 0.0)) scale = 1.0;
  const double lo = 0.1 * scale;
  const double hi = 2.0 * scale;
  constexpr int kCount = 10;
  std::vector<double> grid(kCount);
  for (int k = 0; k < kCount; ++k) {
    grid[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (kCount - 1));
  }
  return grid;
}

}  // namespace stzip
