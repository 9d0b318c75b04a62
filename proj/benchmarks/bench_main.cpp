#include <benchmark/benchmark.h>

#include <random>

#include "adasi/harness.hpp"
#include "adasi/inference.hpp"
#include "adasi/intervals.hpp"
#include "adasi/sfs.hpp"

namespace {

adasi::IntervalUnion random_union(std::mt19937_64& rng, int parts) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<adasi::Interval> iv;
  for (int i = 0; i < parts; ++i) {
    double a = u(rng), b = u(rng);
    iv.push_back({std::min(a, b), std::max(a, b)});
  }
  return adasi::IntervalUnion::canonicalize(std::move(iv));
}

void BM_SetIntersect(benchmark::State& state) {
  std::mt19937_64 rng(7);
  auto a = random_union(rng, static_cast<int>(state.range(0)));
  auto b = random_union(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(adasi::set_intersect(a, b));
  }
}
BENCHMARK(BM_SetIntersect)->Arg(4)->Arg(64);

void BM_GaussianMass(benchmark::State& state) {
  std::mt19937_64 rng(11);
  auto dist = adasi::NullDistribution::gaussian(1.3);
  auto u = random_union(rng, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dist.mass(u));
  }
}
BENCHMARK(BM_GaussianMass);

void BM_ChiMass(benchmark::State& state) {
  std::mt19937_64 rng(13);
  auto dist = adasi::NullDistribution::chi(4.0);
  auto u = random_union(rng, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dist.mass(u));
  }
}
BENCHMARK(BM_ChiMass);

void BM_SfsDecisionRun(benchmark::State& state) {
  std::mt19937_64 rng(17);
  adasi::SfsProblem problem = adasi::gen_sfs_data(100, 10, 0.0, rng);
  problem.K = 5;
  adasi::SfsHistory history = adasi::run_sfs(problem.X, problem.D_obs, 5);
  adasi::ZDirection dir =
      adasi::z_direction(problem, history, history.order.front());
  for (auto _ : state) {
    adasi::SfsOracle oracle(problem, history, dir.line);
    benchmark::DoNotOptimize(
        adasi::run(dir.line.z_obs, adasi::TestSide::TwoSided, dir.dist, oracle,
                   adasi::Strategy::Pi2, adasi::TerminationRule::decision(0.05)));
  }
}
BENCHMARK(BM_SfsDecisionRun);

}  // namespace

BENCHMARK_MAIN();
