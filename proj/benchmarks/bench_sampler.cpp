#include <benchmark/benchmark.h>

#include "stzip/kernel.hpp"
#include "stzip/polya_gamma.hpp"
#include "stzip/sampler.hpp"
#include "stzip/simulate.hpp"

namespace {

struct Fixture {
  stzip::SurveyDataset data;
  stzip::KnotSet knots;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    stzip::SimScenario s = stzip::SimScenario::default_truth();
    s.seed = 11;
    stzip::SimResult sim = stzip::simulate(s);
    stzip::KnotSet knots = stzip::make_knots(sim.data, 100, 11);
    return Fixture{std::move(sim.data), std::move(knots)};
  }();
  return f;
}

stzip::GibbsSampler warm_sampler(stzip::ModelKind kind) {
  const Fixture& f = fixture();
  std::optional<stzip::KnotSet> knots;
  if (stzip::has_spatio_temporal(kind)) knots = f.knots;
  stzip::GibbsSampler g(f.data, stzip::PriorConfig{}, kind, knots, 5);
  for (int i = 0; i < 50; ++i) g.sweep();
  return g;
}

template <void (stzip::GibbsSampler::*Update)()>
void BM_Block(benchmark::State& state) {
  stzip::GibbsSampler g = warm_sampler(stzip::ModelKind::kStzip);
  for (auto _ : state) (g.*Update)();
}

void BM_Sweep(benchmark::State& state) {
  stzip::GibbsSampler g = warm_sampler(static_cast<stzip::ModelKind>(state.range(0)));
  for (auto _ : state) g.sweep();
}

void BM_ProjectorBuild(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(stzip::PredictiveProjector::build(f.knots, 0.5));
  }
}

void BM_SampleOmega(benchmark::State& state) {
  stzip::Rng rng(3);
  double acc = 0.0;
  for (auto _ : state) acc += stzip::sample_omega(1e4 + 3, 0.4, rng);
  benchmark::DoNotOptimize(acc);
}

void BM_Simulate(benchmark::State& state) {
  stzip::SimScenario s = stzip::SimScenario::default_truth();
  for (auto _ : state) {
    benchmark::DoNotOptimize(stzip::simulate(s));
    ++s.seed;
  }
}

}  // namespace

BENCHMARK(BM_Block<&stzip::GibbsSampler::update_omega>)->Name("update_omega");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_beta>)->Name("update_beta");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_v>)->Name("update_v");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_mu_u>)->Name("update_mu_u");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_bandwidth_u>)->Name("update_bandwidth_u");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_z>)->Name("update_z");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_g>)->Name("update_g");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_gamma>)->Name("update_gamma");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_eta>)->Name("update_eta");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_mu_xi>)->Name("update_mu_xi");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_bandwidth_xi>)->Name("update_bandwidth_xi");
BENCHMARK(BM_Block<&stzip::GibbsSampler::update_precisions>)->Name("update_precisions");
BENCHMARK(BM_Sweep)->Name("sweep")->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectorBuild)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleOmega);
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
