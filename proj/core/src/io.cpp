#include "stzip/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "stzip/errors.hpp"

namespace stzip {

using nlohmann::json;
using nlohmann::ordered_json;

// --- plain files -----------------------------------------------------------

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += fmt::format(".tmp{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("cannot write {}", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError(fmt::format("write failed for {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view content) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(content.data(), content.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string_view::npos) {
    lines.pop_back();
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

double field_double(std::string_view s, const char* what, long row) {
  const auto v = to_double(s);
  if (!v) throw InputError(fmt::format("{} is not a number: '{}'", what, s), row);
  if (!std::isfinite(*v)) throw InputError(fmt::format("{} is not finite", what), row);
  return *v;
}

int field_int(std::string_view s, const char* what, long row) {
  const double v = field_double(s, what, row);
  if (v != std::floor(v) || std::abs(v) > 2e9) {
    throw InputError(fmt::format("{} must be an integer: '{}'", what, s), row);
  }
  return static_cast<int>(v);
}

void expect_header(const std::vector<std::string_view>& header,
                   std::initializer_list<std::string_view> names) {
  std::size_t k = 0;
  for (std::string_view n : names) {
    if (k >= header.size() || header[k] != n) {
      throw InputError(fmt::format("header column {} must be '{}'", k + 1, n), 0);
    }
    ++k;
  }
}

std::size_t covariate_columns(const std::vector<std::string_view>& header, std::size_t first) {
  for (std::size_t k = first; k < header.size(); ++k) {
    if (header[k] != fmt::format("x{}", k - first + 1)) {
      throw InputError(fmt::format("header column {} must be 'x{}'", k + 1, k - first + 1), 0);
    }
  }
  if (header.size() <= first) throw InputError("no covariate columns x1..xp", 0);
  return header.size() - first;
}

}  // namespace

// --- observations ----------------------------------------------------------

SurveyDataset parse_observations_csv(std::string_view text, std::optional<int> num_periods) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw InputError("empty observation file", 0);
  const auto header = split_fields(lines[0]);
  expect_header(header, {"t", "loc_x", "loc_y", "y"});
  const std::size_t p = covariate_columns(header, 4);
  std::vector<Observation> obs;
  obs.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const long row = static_cast<long>(r);
    const auto f = split_fields(lines[r]);
    if (f.size() != header.size()) {
      throw InputError(fmt::format("expected {} fields, found {}", header.size(), f.size()), row);
    }
    Observation o;
    o.period = field_int(f[0], "t", row);
    o.location = Location(field_double(f[1], "loc_x", row), field_double(f[2], "loc_y", row));
    o.count = field_int(f[3], "y", row);
    o.covariates.resize(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
      o.covariates(static_cast<Eigen::Index>(j)) = field_double(f[4 + j], "covariate", row);
    }
    obs.push_back(std::move(o));
  }
  if (obs.empty()) throw InputError("observation file has no rows", 0);
  return SurveyDataset(obs, num_periods);
}

SurveyDataset read_observations_csv(const std::filesystem::path& path,
                                    std::optional<int> num_periods) {
  return parse_observations_csv(read_text(path), num_periods);
}

std::string observations_csv(const SurveyDataset& data) {
  std::string out = "t,loc_x,loc_y,y";
  for (int j = 1; j <= data.num_covariates(); ++j) out += fmt::format(",x{}", j);
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out += fmt::format("{},{},{},{}", data.period_index(i) + 1,
                       format_double(data.locations()(r, 0)),
                       format_double(data.locations()(r, 1)), data.counts()[i]);
    for (Eigen::Index j = 0; j < data.design().cols(); ++j) {
      out += ',';
      out += format_double(data.design()(r, j));
    }
    out += '\n';
  }
  return out;
}

std::vector<PredictionPoint> parse_points_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw InputError("empty point file", 0);
  const auto header = split_fields(lines[0]);
  expect_header(header, {"t", "loc_x", "loc_y"});
  const std::size_t first = header.size() > 3 && header[3] == "y" ? 4 : 3;
  const std::size_t p = covariate_columns(header, first);
  std::vector<PredictionPoint> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const long row = static_cast<long>(r);
    const auto f = split_fields(lines[r]);
    if (f.size() != header.size()) {
      throw InputError(fmt::format("expected {} fields, found {}", header.size(), f.size()), row);
    }
    PredictionPoint pt;
    pt.period = field_int(f[0], "t", row);
    if (pt.period < 1) throw InputError("period must be at least 1", row);
    pt.location = Location(field_double(f[1], "loc_x", row), field_double(f[2], "loc_y", row));
    pt.covariates.resize(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
      pt.covariates(static_cast<Eigen::Index>(j)) = field_double(f[first + j], "covariate", row);
    }
    out.push_back(std::move(pt));
  }
  return out;
}

Eigen::MatrixXd project_lonlat(const Eigen::MatrixXd& lonlat) {
  constexpr double kEarthRadiusKm = 6371.0088;
  constexpr double kRad = std::numbers::pi / 180.0;
  if (lonlat.rows() == 0) return lonlat;
  const double lat0 = lonlat.col(1).mean() * kRad;
  Eigen::MatrixXd out(lonlat.rows(), 2);
  out.col(0) = lonlat.col(0) * (kRad * kEarthRadiusKm * std::cos(lat0));
  out.col(1) = lonlat.col(1) * (kRad * kEarthRadiusKm);
  return out;
}

// --- knots -----------------------------------------------------------------

KnotSet parse_knots_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw InputError("empty knot file", 0);
  const auto header = split_fields(lines[0]);
  expect_header(header, {"knot_x", "knot_y"});
  Eigen::MatrixXd k(static_cast<Eigen::Index>(lines.size() - 1), 2);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const long row = static_cast<long>(r);
    const auto f = split_fields(lines[r]);
    if (f.size() != 2) throw InputError("expected 2 fields", row);
    k(row - 1, 0) = field_double(f[0], "knot_x", row);
    k(row - 1, 1) = field_double(f[1], "knot_y", row);
  }
  try {
    return KnotSet(k);
  } catch (const ConfigError& e) {
    throw InputError(e.what());
  }
}

std::string knots_csv(const KnotSet& knots) {
  std::string out = "knot_x,knot_y\n";
  for (Eigen::Index k = 0; k < knots.size(); ++k) {
    out += fmt::format("{},{}\n", format_double(knots.matrix()(k, 0)),
                       format_double(knots.matrix()(k, 1)));
  }
  return out;
}

// --- configuration ---------------------------------------------------------

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("invalid JSON: {}", e.what()));
  }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const char* where) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", where));
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(fmt::format("unknown field '{}' in {}", key, where));
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("field '{}': {}", key, e.what()));
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

// Square matrix from nested arrays, or a scalar s meaning s * I (size fixed later).
Eigen::MatrixXd read_matrix(const json& obj, const char* key, double& scalar) {
  scalar = 0.0;
  if (!obj.contains(key) || obj.at(key).is_null()) return {};
  const json& m = obj.at(key);
  if (m.is_number()) {
    scalar = m.get<double>();
    if (!(scalar > 0.0)) throw ConfigError(fmt::format("{} must be positive", key));
    return {};
  }
  try {
    const auto rows = m.get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) throw ConfigError(fmt::format("{} must be square", key));
      for (std::size_t j = 0; j < rows.size(); ++j) {
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("field '{}': {}", key, e.what()));
  }
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

FitConfig parse_fit_config(std::string_view json_text) {
  const json doc = parse_json(json_text);
  reject_unknown(doc,
                 {"D_beta", "D_gamma", "d_tau_u", "d_tau_xi", "d_sigma_v", "d_sigma_eta",
                  "d_tau_P", "delta", "bandwidth_grid", "bandwidth_weights", "M", "mcmc",
                  "spline"},
                 "config");
  FitConfig cfg;
  PriorConfig& p = cfg.prior;
  double beta_scalar = 0.0;
  double gamma_scalar = 0.0;
  p.d_beta = read_matrix(doc, "D_beta", beta_scalar);
  p.d_gamma = read_matrix(doc, "D_gamma", gamma_scalar);
  if (beta_scalar > 0.0) p.d_beta_scale = beta_scalar;
  if (gamma_scalar > 0.0) p.d_gamma_scale = gamma_scalar;
  read_field(doc, "d_tau_u", p.d_tau_u);
  read_field(doc, "d_tau_xi", p.d_tau_xi);
  read_field(doc, "d_sigma_v", p.d_sigma_v);
  read_field(doc, "d_sigma_eta", p.d_sigma_eta);
  read_field(doc, "d_tau_P", p.d_tau_p);
  read_field(doc, "delta", p.delta);
  read_field(doc, "bandwidth_grid", p.bandwidth_grid);
  read_field(doc, "bandwidth_weights", p.bandwidth_weights);
  read_field(doc, "M", p.num_knots);
  if (doc.contains("mcmc")) {
    const json& m = doc.at("mcmc");
    reject_unknown(m, {"iterations", "burn_in", "thin", "seed"}, "mcmc");
    read_field(m, "iterations", p.mcmc.iterations);
    read_field(m, "burn_in", p.mcmc.burn_in);
    read_field(m, "thin", p.mcmc.thin);
    read_field(m, "seed", p.mcmc.seed);
  }
  if (doc.contains("spline") && !doc.at("spline").is_null()) {
    const json& s = doc.at("spline");
    reject_unknown(s, {"q", "K", "knots", "column", "keep", "input_range"}, "spline");
    SplineTerm term;
    read_field(s, "q", term.spec.degree);
    int k = term.spec.num_knots();
    read_field(s, "K", k);
    if (s.contains("knots")) {
      read_field(s, "knots", term.spec.knots);
      if (s.contains("K") && k != term.spec.num_knots()) {
        throw ConfigError("spline K does not match the number of knots");
      }
    } else {
      if (k < 1) throw ConfigError("spline K must be at least 1");
      term.spec.knots.resize(static_cast<std::size_t>(k));
      for (int l = 0; l < k; ++l) term.spec.knots[static_cast<std::size_t>(l)] = (l + 1.0) / (k + 1.0);
    }
    read_field(s, "column", term.column);
    if (s.contains("keep")) {
      std::vector<int> keep;
      read_field(s, "keep", keep);
      term.keep = std::move(keep);
    }
    if (s.contains("input_range")) {
      std::vector<double> range;
      read_field(s, "input_range", range);
      if (range.size() != 2) throw ConfigError("spline input_range must be [min, max]");
      term.spec.input_min = range[0];
      term.spec.input_max = range[1];
      term.range_frozen = true;
    }
    if (term.column < 1) throw ConfigError("spline column must be at least 1");
    if (term.spec.degree < 1) throw ConfigError("spline degree must be at least 1");
    cfg.spline = std::move(term);
  }
  if (p.num_knots < 1) throw ConfigError("M must be at least 1");
  if (!(p.delta >= 1e3)) throw ConfigError("delta must be at least 1e3");
  return cfg;
}

std::string fit_config_json(const FitConfig& cfg) {
  const PriorConfig& p = cfg.prior;
  ordered_json doc;
  if (p.d_beta.size() > 0) {
    doc["D_beta"] = matrix_json(p.d_beta);
  } else if (p.d_beta_scale) {
    doc["D_beta"] = *p.d_beta_scale;
  }
  if (p.d_gamma.size() > 0) {
    doc["D_gamma"] = matrix_json(p.d_gamma);
  } else if (p.d_gamma_scale) {
    doc["D_gamma"] = *p.d_gamma_scale;
  }
  doc["d_tau_u"] = p.d_tau_u;
  doc["d_tau_xi"] = p.d_tau_xi;
  doc["d_sigma_v"] = p.d_sigma_v;
  doc["d_sigma_eta"] = p.d_sigma_eta;
  doc["d_tau_P"] = p.d_tau_p;
  doc["delta"] = p.delta;
  doc["bandwidth_grid"] = p.bandwidth_grid;
  doc["bandwidth_weights"] = p.bandwidth_weights;
  doc["M"] = p.num_knots;
  doc["mcmc"] = {{"iterations", p.mcmc.iterations},
                 {"burn_in", p.mcmc.burn_in},
                 {"thin", p.mcmc.thin},
                 {"seed", p.mcmc.seed}};
  if (cfg.spline) {
    doc["spline"] = {{"q", cfg.spline->spec.degree},
                     {"K", cfg.spline->spec.num_knots()},
                     {"knots", cfg.spline->spec.knots},
                     {"column", cfg.spline->column}};
    if (cfg.spline->keep) doc["spline"]["keep"] = *cfg.spline->keep;
    if (cfg.spline->range_frozen) {
      doc["spline"]["input_range"] = {cfg.spline->spec.input_min, cfg.spline->spec.input_max};
    }
  }
  return doc.dump(2) + "\n";
}

SplineTerm resolve_spline(const SurveyDataset& data, SplineTerm term) {
  const Eigen::MatrixXd& x = data.design();
  const Eigen::Index p = x.cols();
  if (term.column > p) {
    throw ConfigError(fmt::format("spline column x{} but the data has {} covariates",
                                  term.column, p));
  }
  if (!term.keep) {
    std::vector<int> keep;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j == term.column - 1) continue;
      if (x.rows() > 0 && (x.col(j).array() == 1.0).all()) continue;
      keep.push_back(static_cast<int>(j) + 1);
    }
    term.keep = std::move(keep);
  }
  for (int j : *term.keep) {
    if (j < 1 || j > p || j == term.column) throw ConfigError("bad kept spline column");
  }
  if (!term.range_frozen) {
    const Eigen::VectorXd raw = x.col(term.column - 1);
    term.spec = with_input_range(term.spec, {raw.data(), static_cast<std::size_t>(raw.size())});
    term.range_frozen = true;
  }
  validate(term.spec);
  return term;
}

namespace {

Eigen::VectorXd expand_row(const Eigen::VectorXd& x, const SplineTerm& term) {
  if (!term.keep || !term.range_frozen) throw ConfigError("spline term is not resolved");
  if (term.column > x.size()) throw ConfigError("spline column outside the covariate row");
  const auto e = static_cast<Eigen::Index>(term.keep->size());
  Eigen::VectorXd out(e + term.spec.basis_size());
  for (Eigen::Index k = 0; k < e; ++k) {
    const int j = (*term.keep)[static_cast<std::size_t>(k)];
    if (j > x.size()) throw ConfigError("kept spline column outside the covariate row");
    out(k) = x(j - 1);
  }
  out.tail(term.spec.basis_size()) = basis_row(term.spec, x(term.column - 1));
  return out;
}

}  // namespace

SurveyDataset expand_spline(const SurveyDataset& data, const SplineTerm& term) {
  std::vector<Observation> obs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    obs[i] = data.observation(i);
    obs[i].covariates = expand_row(obs[i].covariates, term);
  }
  return SurveyDataset(obs, data.num_periods());
}

std::vector<PredictionPoint> expand_spline(const std::vector<PredictionPoint>& points,
                                           const SplineTerm& term) {
  std::vector<PredictionPoint> out = points;
  for (auto& p : out) p.covariates = expand_row(p.covariates, term);
  return out;
}

CoefficientSpan spline_span(const SplineTerm& term) {
  if (!term.keep) throw ConfigError("spline term is not resolved");
  const auto e = static_cast<int>(term.keep->size());
  return {e + 1 + term.spec.degree, term.spec.num_knots()};
}

SimScenario parse_sim_config(std::string_view json_text) {
  const json doc = parse_json(json_text);
  reject_unknown(doc,
                 {"truth", "periods", "per_period", "box", "gp_variance", "h_u", "h_xi", "v",
                  "eta", "beta", "gamma", "covariate_sd", "seed"},
                 "simulation config");
  std::string truth = "table";
  read_field(doc, "truth", truth);
  SimScenario s;
  if (truth == "table") {
    s = SimScenario::default_truth();
  } else if (truth == "prose") {
    s = SimScenario::prose_truth();
  } else {
    throw ConfigError(fmt::format("truth must be 'table' or 'prose', got '{}'", truth));
  }
  read_field(doc, "periods", s.periods);
  read_field(doc, "per_period", s.per_period);
  if (doc.contains("box")) {
    std::vector<double> box;
    read_field(doc, "box", box);
    if (box.size() != 2) throw ConfigError("box must be [min, max]");
    s.box_min = box[0];
    s.box_max = box[1];
  }
  read_field(doc, "gp_variance", s.gp_variance);
  read_field(doc, "h_u", s.h_u);
  read_field(doc, "h_xi", s.h_xi);
  read_field(doc, "covariate_sd", s.covariate_sd);
  read_field(doc, "seed", s.seed);
  for (auto [key, target] : {std::pair{"v", &s.v}, std::pair{"eta", &s.eta},
                             std::pair{"beta", &s.beta}, std::pair{"gamma", &s.gamma}}) {
    if (!doc.contains(key)) continue;
    std::vector<double> values;
    read_field(doc, key, values);
    *target = to_vector(values);
  }
  validate(s);
  return s;
}

std::string sim_config_json(const SimScenario& s) {
  ordered_json doc;
  doc["periods"] = s.periods;
  doc["per_period"] = s.per_period;
  doc["box"] = {s.box_min, s.box_max};
  doc["gp_variance"] = s.gp_variance;
  doc["h_u"] = s.h_u;
  doc["h_xi"] = s.h_xi;
  doc["v"] = from_vector(s.v);
  doc["eta"] = from_vector(s.eta);
  doc["beta"] = from_vector(s.beta);
  doc["gamma"] = from_vector(s.gamma);
  doc["covariate_sd"] = s.covariate_sd;
  doc["seed"] = s.seed;
  return doc.dump(2) + "\n";
}

// --- draws and summaries ---------------------------------------------------

std::string draws_csv(const PosteriorDraws& draws) {
  const FlatDraws flat = flatten(draws);
  std::string out = "iteration";
  for (const auto& n : flat.names) {
    out += ',';
    out += n;
  }
  out += '\n';
  for (Eigen::Index d = 0; d < flat.values.rows(); ++d) {
    out += std::to_string(draws.iteration[static_cast<std::size_t>(d)]);
    for (Eigen::Index j = 0; j < flat.values.cols(); ++j) {
      out += ',';
      out += format_double(flat.values(d, j));
    }
    out += '\n';
  }
  return out;
}

std::string draws_layout_json(const PosteriorDraws& draws) {
  ordered_json doc;
  doc["model"] = std::string(to_string(draws.model_kind));
  doc["num_periods"] = draws.num_periods;
  doc["num_covariates"] = draws.num_covariates;
  doc["num_knots"] = draws.knots ? draws.knots->size() : 0;
  doc["bandwidth_grid"] = draws.bandwidth_grid;
  if (draws.shrinkage) {
    doc["shrinkage"] = {{"start", draws.shrinkage->start}, {"length", draws.shrinkage->length}};
  } else {
    doc["shrinkage"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

namespace {

std::vector<Eigen::Index> block_columns(const std::vector<std::string>& names,
                                        const std::string& prefix) {
  std::vector<Eigen::Index> out;
  const std::string head = prefix + "_";
  for (std::size_t j = 0; j < names.size(); ++j) {
    const std::string& n = names[j];
    if (n.size() > head.size() && n.compare(0, head.size(), head) == 0 &&
        std::all_of(n.begin() + static_cast<long>(head.size()), n.end(),
                    [](char c) { return c >= '0' && c <= '9'; })) {
      out.push_back(static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

std::optional<Eigen::Index> scalar_column(const std::vector<std::string>& names,
                                          const std::string& name) {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return static_cast<Eigen::Index>(j);
  }
  return std::nullopt;
}

int grid_index(const std::vector<double>& grid, double h) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (std::abs(grid[k] - h) <= 1e-12 * std::max(1.0, std::abs(h))) return static_cast<int>(k);
  }
  throw InputError(fmt::format("bandwidth {} is not on the grid", h));
}

}  // namespace

PosteriorDraws parse_draws(std::string_view csv_text, std::string_view layout_json,
                           std::optional<KnotSet> knots) {
  const json layout = parse_json(layout_json);
  PosteriorDraws d;
  try {
    d.model_kind = parse_model_kind(layout.at("model").get<std::string>());
    d.num_periods = layout.at("num_periods").get<int>();
    d.num_covariates = layout.at("num_covariates").get<int>();
    d.bandwidth_grid = layout.at("bandwidth_grid").get<std::vector<double>>();
    if (!layout.at("shrinkage").is_null()) {
      d.shrinkage = CoefficientSpan{layout.at("shrinkage").at("start").get<int>(),
                                    layout.at("shrinkage").at("length").get<int>()};
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad draws layout: {}", e.what()));
  }
  d.knots = std::move(knots);

  const auto lines = split_lines(csv_text);
  if (lines.empty()) throw InputError("empty draws file", 0);
  const auto header = split_fields(lines[0]);
  if (header.empty() || header[0] != "iteration") {
    throw InputError("draws header must start with 'iteration'", 0);
  }
  std::vector<std::string> names(header.begin() + 1, header.end());
  const auto s = static_cast<Eigen::Index>(lines.size() - 1);
  Eigen::MatrixXd values(s, static_cast<Eigen::Index>(names.size()));
  for (Eigen::Index r = 0; r < s; ++r) {
    const long row = static_cast<long>(r) + 1;
    const auto f = split_fields(lines[static_cast<std::size_t>(row)]);
    if (f.size() != header.size()) throw InputError("wrong number of fields", row);
    d.iteration.push_back(field_int(f[0], "iteration", row));
    for (std::size_t j = 0; j < names.size(); ++j) {
      values(r, static_cast<Eigen::Index>(j)) = field_double(f[j + 1], "draw", row);
    }
  }
  auto block = [&](const char* prefix) {
    const auto cols = block_columns(names, prefix);
    Eigen::MatrixXd m(s, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = values.col(cols[k]);
    return m;
  };
  auto scalar = [&](const char* name) -> Eigen::VectorXd {
    const auto c = scalar_column(names, name);
    if (!c) return {};
    return values.col(*c);
  };
  auto bandwidth = [&](const char* name) {
    std::vector<int> idx;
    const auto c = scalar_column(names, name);
    if (!c) return idx;
    for (Eigen::Index r = 0; r < s; ++r) idx.push_back(grid_index(d.bandwidth_grid, values(r, *c)));
    return idx;
  };
  d.beta = block("beta");
  d.gamma = block("gamma");
  d.mu_u = block("mu_u");
  d.mu_xi = block("mu_xi");
  d.v = block("v");
  d.eta = block("eta");
  d.tau_u = scalar("tau_u");
  d.tau_xi = scalar("tau_xi");
  d.sigma2_v = scalar("sigma2_v");
  d.sigma2_eta = scalar("sigma2_eta");
  d.tau_p1 = scalar("tau_p1");
  d.tau_p2 = scalar("tau_p2");
  d.h_u_index = bandwidth("h_u");
  d.h_xi_index = bandwidth("h_xi");
  if (d.beta.cols() != d.num_covariates) throw InputError("draws do not match the layout");
  if (d.mu_u.cols() > 0 && (!d.knots || d.knots->size() != d.mu_u.cols())) {
    throw InputError("draws need the knot set they were fitted with");
  }
  return d;
}

std::string summary_json(const std::vector<ParameterSummary>& summary, ModelKind kind,
                         long num_draws, const std::optional<PredictiveLoss>& ppl) {
  ordered_json doc;
  doc["model"] = std::string(to_string(kind));
  doc["draws"] = num_draws;
  ordered_json params = ordered_json::object();
  for (const auto& ps : summary) {
    params[ps.name] = {{"mean", ps.mean}, {"sd", ps.sd},   {"q025", ps.q025},
                       {"q975", ps.q975}, {"ess", ps.ess}};
  }
  doc["parameters"] = std::move(params);
  if (ppl) {
    doc["ppl"] = {{"G", ppl->goodness}, {"P", ppl->penalty}, {"total", ppl->total}};
  }
  return doc.dump(2) + "\n";
}

std::string truth_json(const SimTruth& t) {
  ordered_json doc;
  doc["beta"] = from_vector(t.beta);
  doc["gamma"] = from_vector(t.gamma);
  doc["v"] = from_vector(t.v);
  doc["eta"] = from_vector(t.eta);
  doc["u"] = from_vector(t.u);
  doc["xi"] = from_vector(t.xi);
  doc["z"] = t.z;
  doc["lambda"] = from_vector(t.lambda);
  doc["expected_count"] = from_vector(t.expected_count);
  doc["zero_prob"] = from_vector(t.zero_prob);
  return doc.dump() + "\n";
}

std::string surface_csv(const std::vector<PredictionPoint>& points,
                        const std::vector<PointSummary>& summaries) {
  if (points.size() != summaries.size()) throw ConfigError("points and summaries differ in length");
  std::string out = "loc_x,loc_y,date_index,mean_count,p_zero,q025_count,q975_count\n";
  for (std::size_t j = 0; j < points.size(); ++j) {
    const PointSummary& s = summaries[j];
    if (s.count_quantiles.size() < 2) throw ConfigError("surface needs two count quantiles");
    out += fmt::format("{},{},{},{},{},{},{}\n", format_double(points[j].location.x()),
                       format_double(points[j].location.y()), points[j].period,
                       format_double(s.mean_count), format_double(s.p_zero),
                       format_double(s.count_quantiles[0]), format_double(s.count_quantiles[1]));
  }
  return out;
}

std::string score_json(const ModelScore& score, ModelKind kind) {
  ordered_json doc;
  doc["model"] = std::string(to_string(kind));
  doc["ppl"] = score.ppl.total;
  doc["ppl_G"] = score.ppl.goodness;
  doc["ppl_P"] = score.ppl.penalty;
  doc["mae"] = score.errors.mae;
  doc["mape1"] = score.errors.mape1;
  doc["mape2"] = score.errors.mape2;
  doc["mape2_defined"] = score.errors.mape2_defined;
  doc["n_test"] = score.errors.n_test;
  doc["n_positive"] = score.errors.n_positive;
  return doc.dump(2) + "\n";
}

std::string error_json(std::string_view kind, std::string_view message,
                       std::optional<long> row, std::optional<std::string> block,
                       std::optional<long> iteration) {
  ordered_json doc;
  doc["error"] = std::string(kind);
  doc["message"] = std::string(message);
  if (row) doc["row"] = *row;
  if (block && !block->empty()) doc["block"] = *block;
  if (iteration) doc["iteration"] = *iteration;
  return doc.dump();
}

}  // namespace stzip
