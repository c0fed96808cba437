#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "emos/emos.hpp"
#include "emos/scoring.hpp"

namespace {

using namespace emos;

std::vector<TrainingSample> training_set(int n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.3, 1.5);
  std::vector<TrainingSample> out;
  for (int i = 0; i < n; ++i) {
    TrainingSample s;
    s.init_time = make_hour(2020, 1, 1, 0) + std::chrono::days{i};
    s.valid_time = s.init_time + std::chrono::hours{24};
    const double truth = 5.0 + 4.0 * z(rng);
    s.observation = truth;
    s.stats_per_model["A"] = {truth + 0.5 + z(rng), u(rng), 21};
    s.stats_per_model["B"] = {truth - 1.0 + 1.5 * z(rng), 1.5 * u(rng), 51};
    out.push_back(std::move(s));
  }
  return out;
}

void BM_GaussianCrps(benchmark::State& state) {
  double y = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_crps({0.3, 1.2}, y));
    y += 1e-3;
  }
}
BENCHMARK(BM_GaussianCrps);

void BM_GaussianCrpsGradient(benchmark::State& state) {
  CrpsGradient g;
  double y = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_crps_with_gradient(0.3, 1.2, y, g));
    y += 1e-3;
  }
}
BENCHMARK(BM_GaussianCrpsGradient);

void BM_EnsembleCrps(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> members(static_cast<std::size_t>(state.range(0)));
  for (auto& x : members) x = z(rng);
  for (auto _ : state) benchmark::DoNotOptimize(ensemble_crps(members, 0.4));
}
BENCHMARK(BM_EnsembleCrps)->Arg(21)->Arg(51);

void BM_FitSingle(benchmark::State& state) {
  const auto set = training_set(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_single(set, "A", FitOptions{}));
}
BENCHMARK(BM_FitSingle)->Arg(45);

void BM_FitMixed(benchmark::State& state) {
  const auto set = training_set(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_mixed(set, {"A", "B"}, FitOptions{}));
}
BENCHMARK(BM_FitMixed)->Arg(45);

}  // namespace

BENCHMARK_MAIN();
