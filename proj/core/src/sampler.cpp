#include "stzip/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "stzip/errors.hpp"
#include "stzip/polya_gamma.hpp"

namespace stzip {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kStzip:
      return "stzip";
    case ModelKind::kStp:
      return "stp";
    case ModelKind::kZip:
      return "zip";
  }
  return "stzip";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "stzip") return ModelKind::kStzip;
  if (lower == "stp") return ModelKind::kStp;
  if (lower == "zip") return ModelKind::kZip;
  throw ConfigError(fmt::format("unknown model '{}' (expected stzip, stp or zip)", name));
}

SamplerPlan SamplerPlan::from_controls(const McmcControls& mcmc, ModelKind kind) {
  SamplerPlan plan;
  plan.model_kind = kind;
  plan.iterations = mcmc.iterations;
  plan.burn_in = mcmc.burn_in;
  plan.thin = mcmc.thin;
  plan.seed = mcmc.seed;
  return plan;
}

long SamplerPlan::stored_draws() const {
  if (iterations <= burn_in || thin < 1) return 0;
  return (iterations - burn_in) / thin;
}

// ---------------------------------------------------------------------------

GibbsSampler::GibbsSampler(SurveyDataset data, const PriorConfig& prior, ModelKind kind,
                           std::optional<KnotSet> knots, std::uint64_t seed)
    : data_(std::move(data)),
      prior_(resolve_prior(prior, data_.num_covariates())),
      kind_(kind),
      knots_(std::move(knots)),
      rng_(seed) {
  if (data_.size() == 0) throw InputError("dataset has no observations");
  if (data_.num_covariates() < 1) throw InputError("dataset has no covariates");
  log_delta_ = std::log(prior_.delta);

  if (has_spatio_temporal(kind_)) {
    if (!knots_) throw ConfigError("spatial models need a knot set");
    grid_ = prior_.bandwidth_grid.empty() ? default_bandwidth_grid(*knots_)
                                          : prior_.bandwidth_grid;
    if (prior_.bandwidth_weights.empty()) {
      grid_weights_.assign(grid_.size(), 1.0 / static_cast<double>(grid_.size()));
    } else {
      grid_weights_ = prior_.bandwidth_weights;
    }
    projectors_.reserve(grid_.size());
    weights_.reserve(grid_.size());
    for (double h : grid_) {
      projectors_.push_back(PredictiveProjector::build(*knots_, h));
      weights_.push_back(projectors_.back().weights(data_.locations()));
    }
    grams_.resize(grid_.size());
  }

  beta_prior_fixed_ = fixed_prior_precision(prior_.d_beta);
  gamma_prior_fixed_ = fixed_prior_precision(prior_.d_gamma);
  design_gram_ = data_.design().transpose() * data_.design();
  initialize();
}

Eigen::MatrixXd GibbsSampler::fixed_prior_precision(const Eigen::MatrixXd& cov) const {
  const Eigen::Index p = cov.rows();
  if (!prior_.shrinkage) {
    return cov.llt().solve(Eigen::MatrixXd::Identity(p, p));
  }
  // blockdiag(D*^-1, 0): D* is the prior covariance of the unshrunk entries.
  const CoefficientSpan span = *prior_.shrinkage;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j < span.start || j >= span.start + span.length) keep.push_back(j);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
  if (keep.empty()) return out;
  const auto k = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = cov(keep[a], keep[b]);
  }
  const Eigen::MatrixXd inv = sub.llt().solve(Eigen::MatrixXd::Identity(k, k));
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) out(keep[a], keep[b]) = inv(a, b);
  }
  return out;
}

Eigen::MatrixXd GibbsSampler::prior_precision(const Eigen::MatrixXd& fixed,
                                              double tau_p) const {
  Eigen::MatrixXd out = fixed;
  if (prior_.shrinkage) {
    out.diagonal().segment(prior_.shrinkage->start, prior_.shrinkage->length).array() += tau_p;
  }
  return out;
}

const PredictiveProjector& GibbsSampler::projector(std::size_t grid_index) const {
  return projectors_.at(grid_index);
}

const Eigen::MatrixXd& GibbsSampler::weights(std::size_t grid_index) const {
  return weights_.at(grid_index);
}

const Eigen::MatrixXd& GibbsSampler::weights_gram(std::size_t grid_index) {
  Eigen::MatrixXd& gram = grams_.at(grid_index);
  if (gram.size() == 0) {
    const Eigen::MatrixXd& d = weights_[grid_index];
    gram = Eigen::MatrixXd::Zero(d.cols(), d.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(d.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  }
  return gram;
}

void GibbsSampler::initialize() {
  const Eigen::Index p = data_.num_covariates();
  const Eigen::Index T = data_.num_periods();
  const Eigen::Index m = knots_ ? knots_->size() : 0;
  const bool st = has_spatio_temporal(kind_);
  const bool zi = has_zero_inflation(kind_);
  const std::size_t n = data_.size();

  ModelState s;
  s.beta = Eigen::VectorXd::Zero(p);
  s.gamma = zi ? Eigen::VectorXd::Zero(p) : Eigen::VectorXd();
  s.mu_u = st ? Eigen::VectorXd::Zero(m) : Eigen::VectorXd();
  s.mu_xi = (st && zi) ? Eigen::VectorXd::Zero(m) : Eigen::VectorXd();
  s.v = st ? Eigen::VectorXd::Zero(T) : Eigen::VectorXd();
  s.eta = (st && zi) ? Eigen::VectorXd::Zero(T) : Eigen::VectorXd();
  s.h_u_index = s.h_xi_index = grid_.empty() ? 0 : grid_.size() / 2;
  s.latent.z.assign(n, 0);
  if (zi) {
    for (std::size_t i = 0; i < n; ++i) s.latent.z[i] = data_.counts()[i] == 0 ? 1 : 0;
  }
  s.latent.g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  s.latent.omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  state_ = std::move(s);
  refresh_derived();
  if (zi) update_g();
  iteration_ = 0;
}

void GibbsSampler::set_state(ModelState state) {
  state_ = std::move(state);
  refresh_derived();
}

void GibbsSampler::set_counts(const std::vector<int>& counts) {
  data_ = data_.with_counts(counts);
}

void GibbsSampler::refresh_derived() {
  const auto n = static_cast<Eigen::Index>(data_.size());
  const Eigen::MatrixXd& x = data_.design();
  xb_ = x * state_.beta;
  xg_ = state_.gamma.size() > 0 ? Eigen::VectorXd(x * state_.gamma)
                                : Eigen::VectorXd::Zero(n);
  u_ = state_.mu_u.size() > 0 ? Eigen::VectorXd(weights_[state_.h_u_index] * state_.mu_u)
                              : Eigen::VectorXd::Zero(n);
  xi_ = state_.mu_xi.size() > 0
            ? Eigen::VectorXd(weights_[state_.h_xi_index] * state_.mu_xi)
            : Eigen::VectorXd::Zero(n);
}

Eigen::VectorXd GibbsSampler::intensity_predictor() const {
  Eigen::VectorXd out = xb_ + u_;
  if (state_.v.size() > 0) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += state_.v(data_.period_index(i));
  }
  return out;
}

Eigen::VectorXd GibbsSampler::zero_predictor() const {
  const auto n = static_cast<Eigen::Index>(data_.size());
  if (!has_zero_inflation(kind_)) {
    return Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  }
  Eigen::VectorXd out = xg_ + xi_;
  if (state_.eta.size() > 0) {
    for (Eigen::Index i = 0; i < n; ++i) out(i) += state_.eta(data_.period_index(i));
  }
  return out;
}

template <typename F>
void GibbsSampler::run_block(const char* name, F&& step) {
  try {
    step();
  } catch (const NumericalError& e) {
    throw NumericalError(e.what(), name, iteration_);
  } catch (const std::domain_error& e) {
    throw NumericalError(e.what(), name, iteration_);
  }
}

void GibbsSampler::sweep() {
  ++iteration_;
  const bool st = has_spatio_temporal(kind_);
  const bool zi = has_zero_inflation(kind_);
  run_block("omega", [this] { update_omega(); });
  run_block("beta", [this] { update_beta(); });
  if (st) {
    run_block("v", [this] { update_v(); });
    run_block("mu_u", [this] { update_mu_u(); });
    run_block("h_u", [this] { update_bandwidth_u(); });
    run_block("tau_u", [this] { update_tau_u(); });
  }
  if (zi) {
    run_block("z", [this] { update_z(); });
    run_block("g", [this] { update_g(); });
    run_block("gamma", [this] { update_gamma(); });
    if (st) {
      run_block("eta", [this] { update_eta(); });
      run_block("mu_xi", [this] { update_mu_xi(); });
      run_block("h_xi", [this] { update_bandwidth_xi(); });
      run_block("tau_xi", [this] { update_tau_xi(); });
    }
  }
  run_block("sigma2", [this] { update_random_walk_variances(); });
  run_block("tau_P", [this] { update_spline_precisions(); });
}

void GibbsSampler::check_invariants() const {
  const auto& z = state_.latent.z;
  const auto& g = state_.latent.g;
  const bool zi = has_zero_inflation(kind_);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] == 1 && data_.counts()[i] != 0) {
      throw std::logic_error(fmt::format("structural zero at positive count (row {})", i + 1));
    }
    if (!zi && z[i] != 0) throw std::logic_error("STP state has a structural zero");
    if (zi && ((z[i] == 1) != (g(static_cast<Eigen::Index>(i)) > 0.0))) {
      throw std::logic_error(fmt::format("probit latent disagrees with z (row {})", i + 1));
    }
  }
  if (state_.v.size() > 0 && state_.v(0) != 0.0) throw std::logic_error("v_1 moved off zero");
  if (state_.eta.size() > 0 && state_.eta(0) != 0.0) {
    throw std::logic_error("eta_1 moved off zero");
  }
  if (!grid_.empty() &&
      (state_.h_u_index >= grid_.size() || state_.h_xi_index >= grid_.size())) {
    throw std::logic_error("bandwidth index outside the grid");
  }
  for (double s : {state_.tau_u, state_.tau_xi, state_.sigma2_v, state_.sigma2_eta,
                   state_.tau_p1, state_.tau_p2}) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::logic_error("non-positive precision");
  }
}

// --- intensity side --------------------------------------------------------

void GibbsSampler::update_omega() {
  const auto& y = data_.counts();
  const auto& z = state_.latent.z;
  Eigen::VectorXd& omega = state_.latent.omega;
  const bool has_v = state_.v.size() > 0;
  for (Eigen::Index i = 0; i < omega.size(); ++i) {
    if (z[i]) {
      omega(i) = 0.0;
      continue;
    }
    const double lin = xb_(i) + u_(i) + (has_v ? state_.v(data_.period_index(i)) : 0.0);
    const KappaPsi kp = kappa_psi(y[i], prior_.delta, lin);
    omega(i) = sample_omega(y[i] + prior_.delta, kp.psi, rng_);
  }
}

void GibbsSampler::update_beta() {
  const Eigen::MatrixXd& x = data_.design();
  const auto n = x.rows();
  const auto& y = data_.counts();
  const auto& z = state_.latent.z;
  const bool has_v = state_.v.size() > 0;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (z[i]) continue;
    const double omega = state_.latent.omega(i);
    const double kappa = 0.5 * (y[i] - prior_.delta);
    const double offset =
        u_(i) + (has_v ? state_.v(data_.period_index(i)) : 0.0) - log_delta_;
    w(i) = omega;
    r(i) = kappa - omega * offset;
  }
  Eigen::MatrixXd precision = prior_precision(beta_prior_fixed_, state_.tau_p1);
  precision.noalias() += x.transpose() * w.asDiagonal() * x;
  const Eigen::VectorXd linear = x.transpose() * r;
  state_.beta = sample_gaussian_canonical(rng_, precision, linear, "beta");
  xb_ = x * state_.beta;
}

void GibbsSampler::update_v() {
  const int T = data_.num_periods();
  const auto& y = data_.counts();
  const auto& z = state_.latent.z;
  Eigen::VectorXd& v = state_.v;
  const double inv_s2 = 1.0 / state_.sigma2_v;
  for (int t = 1; t < T; ++t) {
    const bool last = (t == T - 1);
    double precision = (last ? 1.0 : 2.0) * inv_s2;
    double linear = (v(t - 1) + (last ? 0.0 : v(t + 1))) * inv_s2;
    for (int i : data_.members(t)) {
      if (z[i]) continue;
      const double omega = state_.latent.omega(i);
      const double kappa = 0.5 * (y[i] - prior_.delta);
      precision += omega;
      linear += kappa - omega * (xb_(i) + u_(i) - log_delta_);
    }
    v(t) = linear / precision + sample_normal(rng_) / std::sqrt(precision);
  }
}

void GibbsSampler::update_mu_u() {
  const Eigen::MatrixXd& d = weights_[state_.h_u_index];
  const PredictiveProjector& proj = projectors_[state_.h_u_index];
  const auto n = d.rows();
  const auto& y = data_.counts();
  const auto& z = state_.latent.z;
  Eigen::VectorXd sqrt_w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (z[i]) continue;
    const double omega = state_.latent.omega(i);
    const double kappa = 0.5 * (y[i] - prior_.delta);
    const double offset = xb_(i) + state_.v(data_.period_index(i)) - log_delta_;
    sqrt_w(i) = std::sqrt(omega);
    r(i) = kappa - omega * offset;
  }
  Eigen::MatrixXd precision = state_.tau_u * proj.kernel_inverse();
  const Eigen::MatrixXd weighted = sqrt_w.asDiagonal() * d;
  precision.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
  precision.triangularView<Eigen::StrictlyUpper>() = precision.transpose();
  const Eigen::VectorXd linear = d.transpose() * r;
  state_.mu_u = sample_gaussian_canonical(rng_, precision, linear, "mu_u");
  u_ = d * state_.mu_u;
}

void GibbsSampler::update_bandwidth_u() {
  const auto& y = data_.counts();
  const auto& z = state_.latent.z;
  const std::size_t L = grid_.size();
  std::vector<double> log_mass(L);
  std::vector<Eigen::VectorXd> fields(L);
  for (std::size_t l = 0; l < L; ++l) {
    const PredictiveProjector& proj = projectors_[l];
    double lm = std::log(grid_weights_[l]) - 0.5 * proj.log_det() -
                0.5 * state_.tau_u * proj.quadratic_form(state_.mu_u);
    fields[l] = weights_[l] * state_.mu_u;
    for (Eigen::Index i = 0; i < fields[l].size(); ++i) {
      if (z[i]) continue;
      const double psi =
          xb_(i) + fields[l](i) + state_.v(data_.period_index(i)) - log_delta_;
      lm += nb_surrogate_kernel(y[i], psi, prior_.delta);
    }
    log_mass[l] = lm;
  }
  state_.h_u_index = sample_log_categorical(rng_, log_mass);
  u_ = std::move(fields[state_.h_u_index]);
}

void GibbsSampler::update_tau_u() {
  const double m = static_cast<double>(state_.mu_u.size());
  const double quad = projectors_[state_.h_u_index].quadratic_form(state_.mu_u);
  state_.tau_u = sample_gamma(rng_, prior_.d_tau_u + 0.5 * m, prior_.d_tau_u + 0.5 * quad);
}

// --- zero-inflation side ---------------------------------------------------

void GibbsSampler::update_z() {
  const auto& y = data_.counts();
  auto& z = state_.latent.z;
  const Eigen::VectorXd m_lambda = intensity_predictor();
  const Eigen::VectorXd m_g = zero_predictor();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (y[i] > 0) {
      z[i] = 0;
      continue;
    }
    // P(z = 1) = Phi(m) / (Phi(m) + (1 - Phi(m)) e^-lambda), in log space.
    const double log_one = normal_log_cdf(m_g(k));
    const double log_zero = normal_log_cdf(-m_g(k)) - std::exp(m_lambda(k));
    const double p_one = 1.0 / (1.0 + std::exp(log_zero - log_one));
    z[i] = sample_bernoulli(rng_, p_one) ? 1 : 0;
    if (z[i]) state_.latent.omega(k) = 0.0;
  }
}

void GibbsSampler::update_g() {
  const Eigen::VectorXd mean = zero_predictor();
  const auto& z = state_.latent.z;
  Eigen::VectorXd& g = state_.latent.g;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    g(i) = z[i] ? sample_normal_positive(rng_, mean(i))
                : sample_normal_nonpositive(rng_, mean(i));
  }
}

void GibbsSampler::update_gamma() {
  const Eigen::MatrixXd& x = data_.design();
  Eigen::VectorXd resid = state_.latent.g - xi_;
  if (state_.eta.size() > 0) {
    for (Eigen::Index i = 0; i < resid.size(); ++i) {
      resid(i) -= state_.eta(data_.period_index(i));
    }
  }
  const Eigen::MatrixXd precision =
      design_gram_ + prior_precision(gamma_prior_fixed_, state_.tau_p2);
  const Eigen::VectorXd linear = x.transpose() * resid;
  state_.gamma = sample_gaussian_canonical(rng_, precision, linear, "gamma");
  xg_ = x * state_.gamma;
}

void GibbsSampler::update_eta() {
  const int T = data_.num_periods();
  Eigen::VectorXd& eta = state_.eta;
  const Eigen::VectorXd& g = state_.latent.g;
  const double inv_s2 = 1.0 / state_.sigma2_eta;
  for (int t = 1; t < T; ++t) {
    const bool last = (t == T - 1);
    double precision = (last ? 1.0 : 2.0) * inv_s2;
    double linear = (eta(t - 1) + (last ? 0.0 : eta(t + 1))) * inv_s2;
    for (int i : data_.members(t)) {
      precision += 1.0;
      linear += g(i) - xg_(i) - xi_(i);
    }
    eta(t) = linear / precision + sample_normal(rng_) / std::sqrt(precision);
  }
}

void GibbsSampler::update_mu_xi() {
  const std::size_t h = state_.h_xi_index;
  const Eigen::MatrixXd& d = weights_[h];
  Eigen::VectorXd resid = state_.latent.g - xg_;
  for (Eigen::Index i = 0; i < resid.size(); ++i) {
    resid(i) -= state_.eta(data_.period_index(i));
  }
  const Eigen::MatrixXd precision =
      weights_gram(h) + state_.tau_xi * projectors_[h].kernel_inverse();
  const Eigen::VectorXd linear = d.transpose() * resid;
  state_.mu_xi = sample_gaussian_canonical(rng_, precision, linear, "mu_xi");
  xi_ = d * state_.mu_xi;
}

void GibbsSampler::update_bandwidth_xi() {
  Eigen::VectorXd resid = state_.latent.g - xg_;
  for (Eigen::Index i = 0; i < resid.size(); ++i) {
    resid(i) -= state_.eta(data_.period_index(i));
  }
  const std::size_t L = grid_.size();
  std::vector<double> log_mass(L);
  std::vector<Eigen::VectorXd> fields(L);
  for (std::size_t l = 0; l < L; ++l) {
    const PredictiveProjector& proj = projectors_[l];
    fields[l] = weights_[l] * state_.mu_xi;
    log_mass[l] = std::log(grid_weights_[l]) - 0.5 * proj.log_det() -
                  0.5 * state_.tau_xi * proj.quadratic_form(state_.mu_xi) -
                  0.5 * (resid - fields[l]).squaredNorm();
  }
  state_.h_xi_index = sample_log_categorical(rng_, log_mass);
  xi_ = std::move(fields[state_.h_xi_index]);
}

void GibbsSampler::update_tau_xi() {
  const double m = static_cast<double>(state_.mu_xi.size());
  const double quad = projectors_[state_.h_xi_index].quadratic_form(state_.mu_xi);
  state_.tau_xi =
      sample_gamma(rng_, prior_.d_tau_xi + 0.5 * m, prior_.d_tau_xi + 0.5 * quad);
}

// --- scalar variances ------------------------------------------------------

void GibbsSampler::update_random_walk_variances() {
  auto draw = [this](const Eigen::VectorXd& walk, double d) {
    const Eigen::Index T = walk.size();
    double ss = 0.0;
    for (Eigen::Index t = 1; t < T; ++t) ss += (walk(t) - walk(t - 1)) * (walk(t) - walk(t - 1));
    return sample_inverse_gamma(rng_, d + 0.5 * static_cast<double>(T - 1), d + 0.5 * ss);
  };
  if (state_.v.size() > 0) state_.sigma2_v = draw(state_.v, prior_.d_sigma_v);
  if (state_.eta.size() > 0) state_.sigma2_eta = draw(state_.eta, prior_.d_sigma_eta);
}

void GibbsSampler::update_spline_precisions() {
  if (!prior_.shrinkage) return;
  const CoefficientSpan span = *prior_.shrinkage;
  const double shape = prior_.d_tau_p + 0.5 * span.length;
  state_.tau_p1 = sample_gamma(
      rng_, shape,
      prior_.d_tau_p + 0.5 * state_.beta.segment(span.start, span.length).squaredNorm());
  if (state_.gamma.size() > 0) {
    state_.tau_p2 = sample_gamma(
        rng_, shape,
        prior_.d_tau_p + 0.5 * state_.gamma.segment(span.start, span.length).squaredNorm());
  }
}

void GibbsSampler::update_precisions() {
  if (state_.mu_u.size() > 0) update_tau_u();
  if (state_.mu_xi.size() > 0) update_tau_xi();
  update_random_walk_variances();
  update_spline_precisions();
}

// ---------------------------------------------------------------------------

KnotSet make_knots(const SurveyDataset& data, int num_knots, std::uint64_t master_seed) {
  return select_knots(data.locations(), num_knots, derive_seed(master_seed, 0x6b6e6f7473ULL));
}

namespace {

PosteriorDraws allocate_draws(const GibbsSampler& sampler, const SamplerPlan& plan) {
  const long s = plan.stored_draws();
  const ModelState& st = sampler.state();
  PosteriorDraws d;
  d.model_kind = plan.model_kind;
  d.knots = sampler.knots();
  d.bandwidth_grid = sampler.bandwidth_grid();
  d.num_periods = sampler.data().num_periods();
  d.num_covariates = sampler.data().num_covariates();
  d.shrinkage = sampler.prior().shrinkage;
  d.iteration.reserve(static_cast<std::size_t>(s));
  d.beta.resize(s, st.beta.size());
  d.gamma.resize(s, st.gamma.size());
  d.mu_u.resize(s, st.mu_u.size());
  d.mu_xi.resize(s, st.mu_xi.size());
  d.v.resize(s, st.v.size());
  d.eta.resize(s, st.eta.size());
  const bool st_model = has_spatio_temporal(plan.model_kind);
  const bool zi = has_zero_inflation(plan.model_kind);
  const bool spline = sampler.prior().shrinkage.has_value();
  d.tau_u.resize(st_model ? s : 0);
  d.tau_xi.resize(st_model && zi ? s : 0);
  d.sigma2_v.resize(st_model ? s : 0);
  d.sigma2_eta.resize(st_model && zi ? s : 0);
  d.tau_p1.resize(spline ? s : 0);
  d.tau_p2.resize(spline && zi ? s : 0);
  if (st_model) d.h_u_index.reserve(static_cast<std::size_t>(s));
  if (st_model && zi) d.h_xi_index.reserve(static_cast<std::size_t>(s));
  if (plan.store_linear_predictors) {
    const auto n = static_cast<Eigen::Index>(sampler.data().size());
    d.log_lambda.resize(s, n);
    d.zero_predictor.resize(s, zi ? n : 0);
  }
  return d;
}

void record(PosteriorDraws& d, Eigen::Index row, const GibbsSampler& sampler,
            const SamplerPlan& plan) {
  const ModelState& st = sampler.state();
  d.iteration.push_back(sampler.iteration());
  d.beta.row(row) = st.beta.transpose();
  if (d.gamma.cols() > 0) d.gamma.row(row) = st.gamma.transpose();
  if (d.mu_u.cols() > 0) d.mu_u.row(row) = st.mu_u.transpose();
  if (d.mu_xi.cols() > 0) d.mu_xi.row(row) = st.mu_xi.transpose();
  if (d.v.cols() > 0) d.v.row(row) = st.v.transpose();
  if (d.eta.cols() > 0) d.eta.row(row) = st.eta.transpose();
  if (d.tau_u.size() > 0) d.tau_u(row) = st.tau_u;
  if (d.tau_xi.size() > 0) d.tau_xi(row) = st.tau_xi;
  if (d.sigma2_v.size() > 0) d.sigma2_v(row) = st.sigma2_v;
  if (d.sigma2_eta.size() > 0) d.sigma2_eta(row) = st.sigma2_eta;
  if (d.tau_p1.size() > 0) d.tau_p1(row) = st.tau_p1;
  if (d.tau_p2.size() > 0) d.tau_p2(row) = st.tau_p2;
  if (has_spatio_temporal(plan.model_kind)) {
    d.h_u_index.push_back(static_cast<int>(st.h_u_index));
    if (has_zero_inflation(plan.model_kind)) {
      d.h_xi_index.push_back(static_cast<int>(st.h_xi_index));
    }
  }
  if (plan.store_linear_predictors) {
    d.log_lambda.row(row) = sampler.intensity_predictor().transpose();
    if (d.zero_predictor.cols() > 0) {
      d.zero_predictor.row(row) = sampler.zero_predictor().transpose();
    }
  }
}

}  // namespace

PosteriorDraws run_chain(const SurveyDataset& data, const PriorConfig& prior,
                         const SamplerPlan& plan, std::optional<KnotSet> knots) {
  if (!(plan.iterations > plan.burn_in && plan.burn_in >= 0 && plan.thin >= 1)) {
    throw ConfigError("need iterations > burn_in >= 0 and thin >= 1");
  }
  if (has_spatio_temporal(plan.model_kind) && !knots) {
    knots = make_knots(data, prior.num_knots, plan.seed);
  }
  if (!has_spatio_temporal(plan.model_kind)) knots.reset();
  GibbsSampler sampler(data, prior, plan.model_kind, std::move(knots), plan.seed);
  PosteriorDraws draws = allocate_draws(sampler, plan);
  Eigen::Index row = 0;
  for (long it = 1; it <= plan.iterations; ++it) {
    sampler.sweep();
    sampler.check_invariants();
    if (it > plan.burn_in && (it - plan.burn_in) % plan.thin == 0) {
      record(draws, row++, sampler, plan);
    }
    if (plan.progress_every > 0 && it % plan.progress_every == 0) {
      spdlog::info("{}: iteration {}/{}", to_string(plan.model_kind), it, plan.iterations);
    }
  }
  return draws;
}

PosteriorDraws run_chain_stp(const SurveyDataset& data, const PriorConfig& prior,
                             SamplerPlan plan, std::optional<KnotSet> knots) {
  plan.model_kind = ModelKind::kStp;
  return run_chain(data, prior, plan, std::move(knots));
}

PosteriorDraws run_chain_zip(const SurveyDataset& data, const PriorConfig& prior,
                             SamplerPlan plan) {
  plan.model_kind = ModelKind::kZip;
  return run_chain(data, prior, plan, std::nullopt);
}

std::vector<PosteriorDraws> run_chains(const SurveyDataset& data, const PriorConfig& prior,
                                       const SamplerPlan& plan, int num_chains,
                                       std::optional<KnotSet> knots) {
  if (num_chains < 1) throw ConfigError("need at least one chain");
  if (has_spatio_temporal(plan.model_kind) && !knots) {
    knots = make_knots(data, prior.num_knots, plan.seed);
  }
  std::vector<PosteriorDraws> out(static_cast<std::size_t>(num_chains));
  std::vector<std::exception_ptr> errors(out.size());
  std::vector<std::thread> workers;
  for (int c = 0; c < num_chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        SamplerPlan chain_plan = plan;
        if (c > 0) chain_plan.seed = derive_seed(plan.seed, static_cast<std::uint64_t>(c));
        out[c] = run_chain(data, prior, chain_plan, knots);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

PosteriorDraws concatenate(const std::vector<PosteriorDraws>& chains) {
  if (chains.empty()) return {};
  if (chains.size() == 1) return chains.front();
  PosteriorDraws out = chains.front();
  auto stack_rows = [&chains](auto member) {
    Eigen::Index rows = 0;
    const Eigen::Index cols = (chains.front().*member).cols();
    for (const auto& c : chains) rows += (c.*member).rows();
    Eigen::MatrixXd m(rows, cols);
    Eigen::Index at = 0;
    for (const auto& c : chains) {
      m.middleRows(at, (c.*member).rows()) = c.*member;
      at += (c.*member).rows();
    }
    return m;
  };
  auto stack_vec = [&chains](auto member) {
    Eigen::Index rows = 0;
    for (const auto& c : chains) rows += (c.*member).size();
    Eigen::VectorXd m(rows);
    Eigen::Index at = 0;
    for (const auto& c : chains) {
      m.segment(at, (c.*member).size()) = c.*member;
      at += (c.*member).size();
    }
    return m;
  };
  for (std::size_t k = 1; k < chains.size(); ++k) {
    if (chains[k].model_kind != out.model_kind ||
        chains[k].beta.cols() != out.beta.cols() ||
        chains[k].mu_u.cols() != out.mu_u.cols() ||
        chains[k].bandwidth_grid != out.bandwidth_grid) {
      throw ConfigError("cannot merge chains with different layouts");
    }
  }
  out.beta = stack_rows(&PosteriorDraws::beta);
  out.gamma = stack_rows(&PosteriorDraws::gamma);
  out.mu_u = stack_rows(&PosteriorDraws::mu_u);
  out.mu_xi = stack_rows(&PosteriorDraws::mu_xi);
  out.v = stack_rows(&PosteriorDraws::v);
  out.eta = stack_rows(&PosteriorDraws::eta);
  out.log_lambda = stack_rows(&PosteriorDraws::log_lambda);
  out.zero_predictor = stack_rows(&PosteriorDraws::zero_predictor);
  out.tau_u = stack_vec(&PosteriorDraws::tau_u);
  out.tau_xi = stack_vec(&PosteriorDraws::tau_xi);
  out.sigma2_v = stack_vec(&PosteriorDraws::sigma2_v);
  out.sigma2_eta = stack_vec(&PosteriorDraws::sigma2_eta);
  out.tau_p1 = stack_vec(&PosteriorDraws::tau_p1);
  out.tau_p2 = stack_vec(&PosteriorDraws::tau_p2);
  out.iteration.clear();
  out.h_u_index.clear();
  out.h_xi_index.clear();
  for (const auto& c : chains) {
    out.iteration.insert(out.iteration.end(), c.iteration.begin(), c.iteration.end());
    out.h_u_index.insert(out.h_u_index.end(), c.h_u_index.begin(), c.h_u_index.end());
    out.h_xi_index.insert(out.h_xi_index.end(), c.h_xi_index.begin(), c.h_xi_index.end());
  }
  return out;
}

}  // namespace stzip
