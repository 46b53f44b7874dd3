#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "stzip/errors.hpp"
#include "stzip/io.hpp"
#include "stzip/simulate.hpp"

namespace stzip {
namespace {

TEST(FormatDouble, RoundTrips) {
  for (double x : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.1 + 0.2,
                   std::numeric_limits<double>::denorm_min()}) {
    EXPECT_EQ(std::strtod(format_double(x).c_str(), nullptr), x) << format_double(x);
  }
  EXPECT_EQ(format_double(2.0), format_double(2.0));
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Files, AtomicWriteAndRead) {
  const auto dir = std::filesystem::temp_directory_path() / "stzip_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "a.txt";
  write_text_atomic(path, "first");
  write_text_atomic(path, "second\n");
  EXPECT_EQ(read_text(path), "second\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(read_text(dir / "missing.txt"), InputError);
}

TEST(ObservationsCsv, ParseAndRoundTrip) {
  const auto d = parse_observations_csv("t,loc_x,loc_y,y,x1,x2\n1,0.5,-0.25,3,1,0.2\n2,1,1,0,1,-1.5\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.num_periods(), 2);
  EXPECT_EQ(d.counts()[0], 3);
  EXPECT_EQ(d.locations()(0, 1), -0.25);
  EXPECT_EQ(d.design()(1, 1), -1.5);
  const auto back = parse_observations_csv(observations_csv(d));
  EXPECT_EQ(back.design(), d.design());
  EXPECT_EQ(back.locations(), d.locations());
  EXPECT_EQ(back.counts(), d.counts());

  SimScenario s = SimScenario::default_truth();
  s.per_period = 20;
  const auto sim = simulate(s).data;
  EXPECT_EQ(observations_csv(parse_observations_csv(observations_csv(sim))), observations_csv(sim));
}

TEST(ObservationsCsv, ErrorsCarryRow) {
  const auto row_of = [](const std::string& text) -> long {
    try {
      parse_observations_csv(text);
    } catch (const InputError& e) {
      return e.row().value_or(-1);
    }
    return 0;
  };
  EXPECT_EQ(row_of("t,loc_x,loc_y,y,x1\n1,0,0,1,1\n1,0,0,-2,1\n"), 2);
  EXPECT_EQ(row_of("t,loc_x,loc_y,y,x1\n1,0,0,1,1\n1,0,0,1,1\n0,0,0,1,1\n"), 3);
  EXPECT_EQ(row_of("t,loc_x,loc_y,y,x1\n1,abc,0,1,1\n"), 1);
  EXPECT_EQ(row_of("t,loc_x,loc_y,y,x1\n1,0,0,1\n"), 1);
  EXPECT_EQ(row_of("t,loc_x,loc_y,y,x1\n1,0,0,1.5,1\n"), 1);
  EXPECT_THROW(parse_observations_csv("a,b,c\n"), InputError);
}

TEST(PointsCsv, OptionalCountColumn) {
  const auto a = parse_points_csv("t,loc_x,loc_y,x1,x2\n3,0.1,0.2,1,0.5\n");
  const auto b = parse_points_csv("t,loc_x,loc_y,y,x1,x2\n3,0.1,0.2,7,1,0.5\n");
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].period, 3);
  EXPECT_EQ(a[0].covariates, b[0].covariates);
  EXPECT_EQ(parse_points_csv("t,loc_x,loc_y,x1\n").size(), 0u);
}

TEST(ProjectLonLat, EquirectangularScale) {
  Eigen::MatrixXd ll(2, 2);
  ll << 10.0, 60.0, 11.0, 60.0;
  const Eigen::MatrixXd km = project_lonlat(ll);
  const double expect = 111.19 * std::cos(60.0 * M_PI / 180.0);
  EXPECT_NEAR(km(1, 0) - km(0, 0), expect, 0.01 * expect);
  EXPECT_NEAR(km(1, 1) - km(0, 1), 0.0, 1e-12);
}

TEST(FitConfig, ParseRoundTripAndRejectUnknown) {
  const auto cfg = parse_fit_config(R"({"delta": 5000, "M": 20, "d_tau_u": 2.0,
      "bandwidth_grid": [0.5, 1.0], "bandwidth_weights": [0.25, 0.75],
      "mcmc": {"iterations": 300, "burn_in": 100, "thin": 2, "seed": 11},
      "spline": {"q": 2, "K": 3, "column": 2}})");
  EXPECT_EQ(cfg.prior.delta, 5000.0);
  EXPECT_EQ(cfg.prior.num_knots, 20);
  EXPECT_EQ(cfg.prior.mcmc.iterations, 300);
  EXPECT_EQ(cfg.prior.mcmc.seed, 11u);
  ASSERT_TRUE(cfg.spline.has_value());
  EXPECT_EQ(cfg.spline->spec.num_knots(), 3);
  EXPECT_NEAR(cfg.spline->spec.knots[0], 0.25, 1e-15);
  EXPECT_EQ(cfg.spline->column, 2);
  const auto again = parse_fit_config(fit_config_json(cfg));
  EXPECT_EQ(fit_config_json(again), fit_config_json(cfg));

  EXPECT_THROW(parse_fit_config(R"({"detla": 1e4})"), ConfigError);
  EXPECT_THROW(parse_fit_config(R"({"mcmc": {"iters": 5}})"), ConfigError);
  EXPECT_THROW(parse_fit_config(R"({"delta": "big"})"), ConfigError);
  EXPECT_THROW(parse_fit_config("{not json"), ConfigError);
  EXPECT_NO_THROW(parse_fit_config("{}"));
}

TEST(SimConfig, RoundTrip) {
  SimScenario s = SimScenario::default_truth();
  s.seed = 42;
  s.per_period = 50;
  const auto back = parse_sim_config(sim_config_json(s));
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.per_period, 50);
  EXPECT_EQ(back.v, s.v);
  EXPECT_EQ(back.gamma, s.gamma);
  EXPECT_THROW(parse_sim_config(R"({"bogus": 1})"), ConfigError);
  EXPECT_DOUBLE_EQ(parse_sim_config(R"({"truth": "prose"})").v(5), 2.0);
}

TEST(Draws, CsvLayoutRoundTrip) {
  SimScenario s = SimScenario::default_truth();
  s.periods = 3;
  s.per_period = 40;
  s.v = s.v.head(3).eval();
  s.eta = s.eta.head(3).eval();
  const auto data = simulate(s).data;
  const KnotSet knots = make_knots(data, 6, 2);
  SamplerPlan plan;
  plan.iterations = 60;
  plan.burn_in = 20;
  plan.thin = 4;
  const auto d = run_chain(data, PriorConfig{}, plan, knots);
  const std::string csv = draws_csv(d);
  const auto back = parse_draws(csv, draws_layout_json(d), knots);
  EXPECT_EQ(back.size(), d.size());
  EXPECT_EQ(back.iteration, d.iteration);
  EXPECT_EQ(back.beta, d.beta);
  EXPECT_EQ(back.mu_xi, d.mu_xi);
  EXPECT_EQ(back.eta, d.eta);
  EXPECT_EQ(back.sigma2_eta, d.sigma2_eta);
  EXPECT_EQ(back.h_u_index, d.h_u_index);
  EXPECT_EQ(back.bandwidth_grid, d.bandwidth_grid);
  EXPECT_EQ(draws_csv(back), csv);
}

TEST(Json, SummaryScoreAndError) {
  const std::vector<ParameterSummary> s{{"beta_0", 0.5, 0.1, 0.3, 0.7, 900.0}};
  const auto js = nlohmann::json::parse(summary_json(s, ModelKind::kStp, 1000, PredictiveLoss{1, 2, 3}));
  EXPECT_EQ(js.dump().find("nan"), std::string::npos);
  ModelScore score;
  score.errors = validation_errors(Eigen::Vector2d(1.0, 1.0), {0, 2});
  const auto sj = nlohmann::json::parse(score_json(score, ModelKind::kZip));
  EXPECT_FALSE(sj.empty());
  const auto ej = nlohmann::json::parse(error_json("numerical", "bad", std::nullopt, "mu_u", 17));
  EXPECT_EQ(ej.at("error"), "numerical");
  EXPECT_EQ(ej.at("block"), "mu_u");
  EXPECT_EQ(ej.at("iteration"), 17);
  EXPECT_FALSE(ej.contains("row"));
}

TEST(SurfaceCsv, HeaderOnlyForEmptyGrid) {
  EXPECT_EQ(surface_csv({}, {}), "loc_x,loc_y,date_index,mean_count,p_zero,q025_count,q975_count\n");
}

}  // namespace
}  // namespace stzip
