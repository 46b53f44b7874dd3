#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stzip/diagnostics.hpp"
#include "stzip/distributions.hpp"
#include "stzip/errors.hpp"
#include "stzip/io.hpp"
#include "stzip/kernel.hpp"
#include "stzip/predict.hpp"
#include "stzip/sampler.hpp"
#include "stzip/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr std::uint64_t kPplStream = 0x70706cULL;

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool holdout_last = false;
};

struct FitArgs {
  std::string data;
  std::string config;
  std::string out;
  std::string model = "stzip";
  std::optional<std::uint64_t> seed;
  std::optional<long> iters;
  std::optional<long> burnin;
  std::optional<long> thin;
  std::optional<std::string> knots;
  std::optional<double> delta;
  std::optional<std::string> bandwidth_grid;
  int chains = 1;
  bool lonlat = false;
  long progress = 0;
};

struct PredictArgs {
  std::string fit;
  std::string grid;
  std::string out;
  bool sample_future_walk = false;
  std::uint64_t seed = 1;
};

struct ValidateArgs {
  std::string fit;
  std::string test;
  std::string out;
  bool plug_in = false;
};

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                            : comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw stzip::ConfigError(fmt::format("not a number in list: '{}'", item));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

stzip::SurveyDataset with_locations(const stzip::SurveyDataset& data, const Eigen::MatrixXd& loc) {
  std::vector<stzip::Observation> obs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    obs[i] = data.observation(i);
    obs[i].location = loc.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return stzip::SurveyDataset(obs, data.num_periods());
}

// Block name of a flattened column: "mu_u_12" -> "mu_u", "tau_u" -> "tau_u".
std::string block_of(const std::string& name) {
  const auto pos = name.find_last_of('_');
  if (pos != std::string::npos && pos + 1 < name.size() &&
      name.find_first_not_of("0123456789", pos + 1) == std::string::npos) {
    return name.substr(0, pos);
  }
  return name;
}

void write(const fs::path& path, const std::string& content) {
  stzip::write_text_atomic(path, content);
}

int cmd_simulate(const SimulateArgs& a) {
  stzip::SimScenario s = a.config.empty() ? stzip::SimScenario::default_truth()
                                          : stzip::parse_sim_config(stzip::read_text(a.config));
  if (a.seed) s.seed = *a.seed;
  const stzip::SimResult sim = stzip::simulate(s);
  fs::create_directories(a.out);
  const fs::path out(a.out);
  write(out / "scenario.json", stzip::sim_config_json(s));
  write(out / "data.csv", stzip::observations_csv(sim.data));
  write(out / "truth.json", stzip::truth_json(sim.truth));
  if (a.holdout_last) {
    if (s.periods < 2) throw stzip::ConfigError("holding out the last period needs T >= 2");
    write(out / "train.csv",
          stzip::observations_csv(sim.data.select_periods(1, s.periods - 1)));
    write(out / "test.csv",
          stzip::observations_csv(sim.data.select_periods(s.periods, s.periods)));
  }
  return 0;
}

int cmd_fit(const FitArgs& a) {
  const auto started = std::chrono::steady_clock::now();
  const stzip::ModelKind kind = stzip::parse_model_kind(a.model);
  stzip::SurveyDataset raw = stzip::read_observations_csv(a.data);
  if (a.lonlat) raw = with_locations(raw, stzip::project_lonlat(raw.locations()));

  stzip::FitConfig cfg =
      a.config.empty() ? stzip::FitConfig{} : stzip::parse_fit_config(stzip::read_text(a.config));
  stzip::PriorConfig& prior = cfg.prior;
  if (a.seed) prior.mcmc.seed = *a.seed;
  if (a.iters) prior.mcmc.iterations = *a.iters;
  if (a.burnin) prior.mcmc.burn_in = *a.burnin;
  if (a.thin) prior.mcmc.thin = *a.thin;
  if (a.delta) prior.delta = *a.delta;
  if (a.bandwidth_grid) {
    prior.bandwidth_grid = parse_number_list(*a.bandwidth_grid);
    prior.bandwidth_weights.clear();
  }
  if (a.chains < 1) throw stzip::ConfigError("--chains must be at least 1");

  stzip::SurveyDataset data = raw;
  if (cfg.spline) {
    cfg.spline = stzip::resolve_spline(raw, *cfg.spline);
    data = stzip::expand_spline(raw, *cfg.spline);
    prior.shrinkage = stzip::spline_span(*cfg.spline);
  }

  std::optional<stzip::KnotSet> knots;
  if (stzip::has_spatio_temporal(kind)) {
    if (a.knots) {
      std::size_t used = 0;
      long m = -1;
      try {
        m = std::stol(*a.knots, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == a.knots->size() && used > 0) {
        prior.num_knots = static_cast<int>(m);
      } else {
        knots = stzip::parse_knots_csv(stzip::read_text(*a.knots));
        prior.num_knots = static_cast<int>(knots->size());
      }
    }
    if (!knots) knots = stzip::make_knots(data, prior.num_knots, prior.mcmc.seed);
    if (prior.bandwidth_grid.empty()) prior.bandwidth_grid = stzip::default_bandwidth_grid(*knots);
  }
  prior = stzip::resolve_prior(prior, data.num_covariates());

  stzip::SamplerPlan plan = stzip::SamplerPlan::from_controls(prior.mcmc, kind);
  plan.progress_every = a.progress;
  const std::vector<stzip::PosteriorDraws> chains =
      stzip::run_chains(data, prior, plan, a.chains, knots);
  const stzip::PosteriorDraws merged = stzip::concatenate(chains);

  std::vector<stzip::ParameterSummary> summary = stzip::summarize(merged);
  if (chains.size() > 1) {
    std::vector<double> ess(summary.size(), 0.0);
    for (const auto& c : chains) {
      const auto per_chain = stzip::summarize(c);
      for (std::size_t j = 0; j < ess.size(); ++j) ess[j] += per_chain[j].ess;
    }
    for (std::size_t j = 0; j < ess.size(); ++j) summary[j].ess = ess[j];
  }
  std::optional<stzip::PredictiveLoss> ppl;
  if (merged.size() >= 2) {
    ppl = stzip::posterior_predictive_loss(merged, data,
                                           stzip::derive_seed(prior.mcmc.seed, kPplStream));
  }

  fs::create_directories(a.out);
  const fs::path out(a.out);
  const std::string config_text = stzip::fit_config_json(cfg);
  const std::string data_text = stzip::observations_csv(raw);
  const std::string draws_text = stzip::draws_csv(merged);
  write(out / "config.json", config_text);
  write(out / "data.csv", data_text);
  if (knots) write(out / "knots.csv", stzip::knots_csv(*knots));
  write(out / "layout.json", stzip::draws_layout_json(merged));
  write(out / "draws.csv", draws_text);
  if (chains.size() > 1) {
    for (std::size_t c = 0; c < chains.size(); ++c) {
      write(out / fmt::format("draws_chain{}.csv", c + 1), stzip::draws_csv(chains[c]));
    }
  }
  write(out / "summary.json",
        stzip::summary_json(summary, kind, static_cast<long>(merged.size()), ppl));

  std::map<std::string, std::vector<double>> block_ess;
  for (const auto& ps : summary) block_ess[block_of(ps.name)].push_back(ps.ess);
  ordered_json blocks = ordered_json::object();
  for (const auto& [name, ess] : block_ess) {
    blocks[name] = {{"min_ess", *std::min_element(ess.begin(), ess.end())},
                    {"acceptance_rate", 1.0}};
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  ordered_json manifest;
  manifest["software_version"] = kVersion;
  manifest["model"] = std::string(stzip::to_string(kind));
  manifest["seed"] = prior.mcmc.seed;
  manifest["chains"] = a.chains;
  manifest["lonlat"] = a.lonlat;
  manifest["iterations"] = prior.mcmc.iterations;
  manifest["burn_in"] = prior.mcmc.burn_in;
  manifest["thin"] = prior.mcmc.thin;
  manifest["draws"] = merged.size();
  manifest["config_sha256"] = stzip::sha256_hex(config_text);
  manifest["data_sha256"] = stzip::sha256_hex(data_text);
  manifest["draws_sha256"] = stzip::sha256_hex(draws_text);
  manifest["wall_clock_seconds"] = seconds;
  manifest["blocks"] = std::move(blocks);
  write(out / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

struct LoadedFit {
  stzip::FitConfig config;
  stzip::PosteriorDraws draws;
};

LoadedFit load_fit(const fs::path& dir) {
  LoadedFit f;
  f.config = stzip::parse_fit_config(stzip::read_text(dir / "config.json"));
  std::optional<stzip::KnotSet> knots;
  if (fs::exists(dir / "knots.csv")) knots = stzip::parse_knots_csv(stzip::read_text(dir / "knots.csv"));
  f.draws = stzip::parse_draws(stzip::read_text(dir / "draws.csv"),
                               stzip::read_text(dir / "layout.json"), std::move(knots));
  return f;
}

std::vector<stzip::PredictionPoint> load_grid(const fs::path& path) {
  const std::string text = stzip::read_text(path);
  if (path.extension() != ".json") return stzip::parse_points_csv(text);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    const auto& l = doc.at("lattice");
    stzip::LatticeSpec spec;
    spec.x_min = l.at("x_min").get<double>();
    spec.x_max = l.at("x_max").get<double>();
    spec.y_min = l.at("y_min").get<double>();
    spec.y_max = l.at("y_max").get<double>();
    spec.resolution = l.at("resolution").get<double>();
    spec.periods = l.at("periods").get<std::vector<int>>();
    const auto cov = l.at("covariates").get<std::vector<double>>();
    spec.covariates = Eigen::Map<const Eigen::VectorXd>(cov.data(), static_cast<Eigen::Index>(cov.size()));
    return stzip::lattice_points(spec);
  } catch (const nlohmann::json::exception& e) {
    throw stzip::ConfigError(fmt::format("bad lattice spec: {}", e.what()));
  }
}

int cmd_predict(const PredictArgs& a) {
  const LoadedFit fit = load_fit(a.fit);
  std::vector<stzip::PredictionPoint> points = load_grid(a.grid);
  if (fit.config.spline) points = stzip::expand_spline(points, *fit.config.spline);
  stzip::PredictionOptions opt;
  opt.sample_future_walk = a.sample_future_walk;
  opt.seed = a.seed;
  const auto summaries = stzip::predict_surfaces(fit.draws, points, opt);
  write(a.out, stzip::surface_csv(points, summaries));
  return 0;
}

int cmd_validate(const ValidateArgs& a) {
  const fs::path dir(a.fit);
  const LoadedFit fit = load_fit(dir);
  stzip::SurveyDataset test = stzip::read_observations_csv(a.test);
  if (fit.config.spline) test = stzip::expand_spline(test, *fit.config.spline);
  stzip::ModelScore score;
  const Eigen::VectorXd pred = stzip::point_predict_holdout(fit.draws, test, a.plug_in);
  score.errors = stzip::validation_errors(pred, test.counts());
  try {
    const auto summary = nlohmann::json::parse(stzip::read_text(dir / "summary.json"));
    if (summary.contains("ppl")) {
      score.ppl.goodness = summary["ppl"].at("G").get<double>();
      score.ppl.penalty = summary["ppl"].at("P").get<double>();
      score.ppl.total = summary["ppl"].at("total").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw stzip::InputError(fmt::format("bad summary.json: {}", e.what()));
  }
  write(a.out, stzip::score_json(score, fit.draws.model_kind));
  return 0;
}

int fail(std::string_view kind, std::string_view message, int code,
         std::optional<long> row = std::nullopt, std::optional<std::string> block = std::nullopt,
         std::optional<long> iteration = std::nullopt) {
  std::cerr << stzip::error_json(kind, message, row, std::move(block), iteration) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  CLI::App app{"Spatio-temporal zero-inflated Poisson models: simulate, fit, predict, validate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic dataset with known truth");
  s->add_option("--config", sim.config, "Simulation config JSON");
  s->add_option("--out", sim.out, "Output directory")->required();
  s->add_option("--seed", sim.seed, "Overrides the config seed");
  s->add_flag("--holdout-last", sim.holdout_last, "Also write train.csv / test.csv split at T");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Run the Gibbs sampler");
  f->add_option("--data", fit.data, "Observation CSV")->required()->check(CLI::ExistingFile);
  f->add_option("--config", fit.config, "Prior / MCMC config JSON");
  f->add_option("--out", fit.out, "Run directory")->required();
  f->add_option("--model", fit.model, "stzip, stp or zip");
  f->add_option("--seed", fit.seed);
  f->add_option("--iters", fit.iters);
  f->add_option("--burnin", fit.burnin);
  f->add_option("--thin", fit.thin);
  f->add_option("--knots", fit.knots, "Knot count M or a knot CSV");
  f->add_option("--delta", fit.delta);
  f->add_option("--bandwidth-grid", fit.bandwidth_grid, "Comma-separated bandwidths");
  f->add_option("--chains", fit.chains, "Independent chains run in parallel");
  f->add_flag("--lonlat", fit.lonlat, "Locations are longitude/latitude degrees");
  f->add_option("--progress", fit.progress, "Log every N iterations");

  PredictArgs pred;
  auto* p = app.add_subcommand("predict", "Posterior surfaces at new points");
  p->add_option("--fit", pred.fit, "Run directory from fit")->required()->check(CLI::ExistingDirectory);
  p->add_option("--grid", pred.grid, "Point CSV or lattice JSON")->required()->check(CLI::ExistingFile);
  p->add_option("--out", pred.out, "Surface CSV")->required();
  p->add_flag("--sample-future-walk", pred.sample_future_walk);
  p->add_option("--seed", pred.seed);

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Hold-out errors and predictive loss");
  v->add_option("--fit", val.fit, "Run directory from fit")->required()->check(CLI::ExistingDirectory);
  v->add_option("--test", val.test, "Test observation CSV")->required()->check(CLI::ExistingFile);
  v->add_option("--out", val.out, "Score JSON")->required();
  v->add_flag("--plug-in", val.plug_in, "Evaluate at posterior-mean parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (fit.progress > 0) spdlog::set_level(spdlog::level::info);
    if (*s) return cmd_simulate(sim);
    if (*f) return cmd_fit(fit);
    if (*p) return cmd_predict(pred);
    if (*v) return cmd_validate(val);
  } catch (const stzip::InputError& e) {
    return fail("input", e.what(), 2, e.row());
  } catch (const stzip::ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const stzip::NumericalError& e) {
    return fail("numerical", e.what(), 3, std::nullopt, e.block(), e.iteration());
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
