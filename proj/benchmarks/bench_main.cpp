#include <benchmark/benchmark.h>

#include "kglab/counting.hpp"
#include "kglab/experiments.hpp"
#include "kglab/lattice_space.hpp"

namespace {

kglab::ProblemInstance headline_instance() {
  return {2, 1, kglab::NormSpec::sup(2), kglab::NormSpec::sup(1),
          kglab::ApproxFunction::power(1.0, 0.5), kglab::CongruenceClass({1, 1, 1}, 2)};
}

void BM_CountSolutionsGrid(benchmark::State& state) {
  const auto instance = headline_instance();
  kglab::ThetaMatrix theta(2, 1);
  theta(0, 0) = 0.41421356;
  theta(1, 0) = 0.73205081;
  const auto grid = kglab::geometric_grid({10.0, static_cast<double>(state.range(0)), 25});
  for (auto _ : state) {
    benchmark::DoNotOptimize(kglab::count_solutions_grid(instance, theta, grid));
  }
}
BENCHMARK(BM_CountSolutionsGrid)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_CountSolutionsLp2(benchmark::State& state) {
  const kglab::ProblemInstance instance(2, 1, kglab::NormSpec::lp(2.0, 2),
                                        kglab::NormSpec::sup(1),
                                        kglab::ApproxFunction::power(1.0, 0.5),
                                        kglab::CongruenceClass::trivial(3));
  kglab::ThetaMatrix theta(2, 1);
  theta(0, 0) = 0.41421356;
  theta(1, 0) = 0.73205081;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kglab::count_solutions(instance, theta, 1e5));
  }
}
BENCHMARK(BM_CountSolutionsLp2)->Unit(benchmark::kMillisecond);

void BM_CountInRegion(benchmark::State& state) {
  kglab::LatticeSamplerConfig config;
  const auto volume = static_cast<double>(state.range(0));
  const auto regions = kglab::cube_family(3, std::span(&volume, 1));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto lattice = kglab::sample_lattice(config, i++);
    benchmark::DoNotOptimize(kglab::count_in_region(lattice, regions.front()));
  }
}
BENCHMARK(BM_CountInRegion)->Arg(10)->Arg(1000);

void BM_PartialSums(benchmark::State& state) {
  const auto psi = kglab::ApproxFunction::power(1.0, 0.5);
  const auto grid = kglab::geometric_grid({10.0, 1e6, 61});
  for (auto _ : state) {
    benchmark::DoNotOptimize(kglab::partial_sums(psi, grid));
  }
}
BENCHMARK(BM_PartialSums)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
