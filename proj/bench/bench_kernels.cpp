// Serial vs OpenMP kernels on the grid sizes used by the experiments.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "nullwave/kernels.hpp"

namespace k = nullwave::kernels;

namespace {

std::vector<double> wave(std::size_t n, double phase) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sin(0.001 * static_cast<double>(i) + phase);
  return out;
}

template <void (*Step)(const k::RadialStep&)>
void BM_RadialStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto lag = wave(n, 0.0), now = wave(n, 0.1), lead = std::vector<double>(n);
  const double h = 100.0 / static_cast<double>(n);
  const k::RadialStep s{lag.data(), now.data(), nullptr, nullptr, lead.data(), n, 0.9 * h, h};
  for (auto _ : state) {
    Step(s);
    benchmark::DoNotOptimize(lead.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <void (*Step)(const k::CartesianStep&)>
void BM_CartesianStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t total = n * n * n;
  auto lag = wave(total, 0.0), now = wave(total, 0.1), lead = std::vector<double>(total);
  std::vector<std::uint8_t> mask(total, 0);
  const double h = 8.0 / static_cast<double>(n);
  const k::CartesianStep s{lag.data(), now.data(), nullptr, nullptr, mask.data(),
                           lead.data(), n,         0.5 * h, h};
  for (auto _ : state) {
    Step(s);
    benchmark::DoNotOptimize(lead.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(total));
}

template <double (*Sum)(const double*, std::size_t)>
void BM_Sum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = wave(n, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(Sum(x.data(), n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK(BM_RadialStep<k::serial::radial_step>)->Name("radial_step/serial")->Arg(2001)->Arg(200001);
BENCHMARK(BM_RadialStep<k::omp::radial_step>)->Name("radial_step/omp")->Arg(2001)->Arg(200001);
BENCHMARK(BM_CartesianStep<k::serial::cartesian_step>)->Name("cartesian_step/serial")->Arg(64)->Arg(128);
BENCHMARK(BM_CartesianStep<k::omp::cartesian_step>)->Name("cartesian_step/omp")->Arg(64)->Arg(128);
BENCHMARK(BM_Sum<k::serial::sum>)->Name("sum/serial")->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_Sum<k::omp::sum>)->Name("sum/omp")->Arg(1 << 16)->Arg(1 << 22);

BENCHMARK_MAIN();
