// Serial reference vs OpenMP kernels. Not part of ctest; run
// build/bench/deffuant_bench (OMP_NUM_THREADS controls the parallel side).

#include <benchmark/benchmark.h>

#include <vector>

#include "deffuant/distribution.hpp"
#include "deffuant/kernels.hpp"
#include "deffuant/opinion.hpp"
#include "deffuant/random.hpp"
#include "deffuant/sweep.hpp"

using namespace deffuant;

namespace {

std::vector<double> cloud(std::size_t n, std::size_t k) {
  Rng rng(5);
  std::vector<double> flat(n * k);
  for (auto& x : flat) x = uniform01(rng);
  return flat;
}

template <bool Parallel>
void min_pair(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0)), k = 3;
  const auto pts = cloud(n, k);
  const auto dist = [&](std::size_t i, std::size_t j) {
    return euclidean_distance({pts.data() + i * k, k}, {pts.data() + j * k, k});
  };
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? kernels::min_pair_parallel(n, dist) : kernels::min_pair_serial(n, dist));
  }
}

template <bool Parallel>
void pairs_within(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0)), k = 3;
  const auto pts = cloud(n, k);
  const auto dist = [&](std::size_t i, std::size_t j) {
    return euclidean_distance({pts.data() + i * k, k}, {pts.data() + j * k, k});
  };
  for (auto _ : state) {
    auto r = Parallel ? kernels::pairs_within_parallel(n, dist, 0.1) : kernels::pairs_within_serial(n, dist, 0.1);
    benchmark::DoNotOptimize(r.data());
  }
}

template <bool Parallel>
void sweep(benchmark::State& state) {
  SweepSpec s;
  s.base.lattice = {200, Boundary::cycle};
  s.base.t_max = 200.0;
  s.theta_grid = {0.3, 0.4, 0.5, 0.6};
  s.trials = 8;
  for (auto _ : state) {
    const SweepResult r = Parallel ? run_sweep(s) : run_sweep_serial(s);
    benchmark::DoNotOptimize(r.records.data());
  }
}

}  // namespace

BENCHMARK(min_pair<false>)->Arg(500)->Arg(2000);
BENCHMARK(min_pair<true>)->Arg(500)->Arg(2000);
BENCHMARK(pairs_within<false>)->Arg(2000);
BENCHMARK(pairs_within<true>)->Arg(2000);
BENCHMARK(sweep<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(sweep<true>)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
