#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "bvm/engine.hpp"

namespace {

using namespace bvm;

void BM_McThreshold(benchmark::State& state) {
  const Scenario s{StudentT{0.0, 4.0, 1.0}, Normal{0.2, 0.5},
                   AgreementRule::threshold(ComparisonKind::abs_diff, 0.5), {}};
  const auto samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_bvm_mc(s, samples, 1).p);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_McThreshold)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

Scenario taylor_scenario(std::size_t terms) {
  const std::vector<double> means = {1.0, -0.5, 1.0 / 24.0, -1.0 / 720.0};
  const std::vector<double> stds = {0.1, 0.05, 0.005, 0.0005};
  std::vector<double> powers;
  IndependentProduct prior;
  for (std::size_t i = 0; i < terms; ++i) {
    powers.push_back(2.0 * static_cast<double>(i));
    prior.components.emplace_back(Normal{means[i], stds[i]});
  }
  const auto grid = InputGrid::linspace(0.0, std::numbers::pi, 50);
  Path data;
  for (double x : grid.points()) data.push_back(std::cos(x));
  return Scenario{push_forward(prior, ModelFunction::polynomial(powers), grid), DiracDelta{data},
                  AgreementRule::always(true), {}};
}

void BM_SweepGrid(benchmark::State& state) {
  const auto s = taylor_scenario(static_cast<std::size_t>(state.range(0)));
  const auto gammas = axis_values(0.75, 1.0, 0.01);
  const auto epsilons = axis_values(0.0, 1.0, 0.01);
  SweepEstimator est;
  est.grid = {20, 3.0};
  for (auto _ : state) benchmark::DoNotOptimize(sweep(s, gammas, epsilons, 5.0, est).total());
}
BENCHMARK(BM_SweepGrid)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SweepProfilesOnly(benchmark::State& state) {
  const auto s = taylor_scenario(3);
  const auto profiles = profiles_from_grid(discretize(s.model, {20, 3.0}), discretize(s.data));
  const auto gammas = axis_values(0.75, 1.0, 0.01);
  const auto epsilons = axis_values(0.0, 1.0, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(sweep(profiles, gammas, epsilons, 5.0).total());
}
BENCHMARK(BM_SweepProfilesOnly)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
