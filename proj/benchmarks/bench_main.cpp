#include <benchmark/benchmark.h>

#include "edgeboot/bootstrap.hpp"
#include "edgeboot/edgeworth.hpp"
#include "edgeboot/population.hpp"
#include "edgeboot/tensors.hpp"

using namespace edgeboot;

static void BM_MomentsToCumulants(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  StreamRng rng(1, 0);
  const CumulantSet m = empirical_moments(make_population("exp", d).sample(50, rng), 6);
  for (auto _ : state) benchmark::DoNotOptimize(moments_to_cumulants(m));
}
BENCHMARK(BM_MomentsToCumulants)->Arg(1)->Arg(2)->Arg(3);

static void BM_BuildExpansion(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  const int nu = static_cast<int>(state.range(1));
  const CumulantSet c = make_population("exp", q).cumulants(4);
  const Eigen::MatrixXd V = Eigen::MatrixXd::Identity(q, q);
  for (auto _ : state) benchmark::DoNotOptimize(build_expansion(c, V, nu));
}
BENCHMARK(BM_BuildExpansion)->Args({1, 2})->Args({2, 2})->Args({3, 2})->Args({4, 2});

static void BM_BootstrapDistribution(benchmark::State& state) {
  StreamRng rng(2, 0);
  const SampleSet s({make_population("exp").sample(static_cast<int>(state.range(0)), rng)});
  const SmoothStatistic mean = make_statistic("mean", 1);
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_distribution(mean, s, 10000, 3));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_BootstrapDistribution)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_ExactBootstrap(benchmark::State& state) {
  StreamRng rng(4, 0);
  const SampleSet s({make_population("exp").sample(static_cast<int>(state.range(0)), rng)});
  const SmoothStatistic mean = make_statistic("mean", 1);
  for (auto _ : state) benchmark::DoNotOptimize(exact_bootstrap_law(mean, s));
}
BENCHMARK(BM_ExactBootstrap)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
