#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include <hlx/hopflax.hpp>
#include <hlx/levykernel.hpp>
#include <hlx/scheme.hpp>

namespace {

hlx::GridFunction cosine_line(int nodes) {
  const double h = 0.01;
  const std::vector<double> lo{0.0}, hi{h * (nodes - 1)};
  const auto d = hlx::GridDomain::from_spacing(lo, hi, h);
  return hlx::GridFunction::sample(d, [](const hlx::Point& x) { return std::cos(x[0]) + 0.3 * std::sin(2.7 * x[0]); });
}

void BM_HopfLaxFast(benchmark::State& state) {
  const auto f = cosine_line(static_cast<int>(state.range(0)));
  const auto step = hlx::make_hopf_lax_step(hlx::CostFunction::quadratic(0.5), 1.0, f);
  for (auto _ : state) benchmark::DoNotOptimize(hlx::apply_fast(f, step));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HopfLaxBrute(benchmark::State& state) {
  const auto f = cosine_line(static_cast<int>(state.range(0)));
  const auto step = hlx::make_hopf_lax_step(hlx::CostFunction::quadratic(0.5), 1.0, f);
  for (auto _ : state) benchmark::DoNotOptimize(hlx::apply_bruteforce(f, step));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HopfLaxPowerFast(benchmark::State& state) {
  const auto f = cosine_line(static_cast<int>(state.range(0)));
  const auto step = hlx::make_hopf_lax_step(hlx::CostFunction::power(3.0, 1.0), 1.0, f);
  for (auto _ : state) benchmark::DoNotOptimize(hlx::apply_fast(f, step));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void convolution(benchmark::State& state, hlx::ConvolutionPath path) {
  const auto f = cosine_line(static_cast<int>(state.range(0)));
  const auto k = hlx::discretize(hlx::KernelModel::gaussian(1, {0, 0}, {1, 0}), state.range(1) / 100.0, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(hlx::apply_kernel(f, k, path));
  state.counters["atoms"] = static_cast<double>(k.offsets.size());
}

void BM_ConvolutionDirect(benchmark::State& state) { convolution(state, hlx::ConvolutionPath::Direct); }
void BM_ConvolutionSpectral(benchmark::State& state) { convolution(state, hlx::ConvolutionPath::Spectral); }

void BM_IterateBoth(benchmark::State& state) {
  const auto f = cosine_line(2515);
  hlx::SchemeConfig cfg;
  cfg.n = static_cast<int>(state.range(0));
  cfg.kernel = hlx::KernelModel::gaussian(1, {0, 0}, {0.05, 0});
  for (auto _ : state) benchmark::DoNotOptimize(hlx::iterate_both(f, cfg));
}

}  // namespace

BENCHMARK(BM_HopfLaxFast)->Arg(1000)->Arg(10000)->Arg(100000);
BENCHMARK(BM_HopfLaxBrute)->Arg(1000)->Arg(10000);
BENCHMARK(BM_HopfLaxPowerFast)->Arg(1000)->Arg(10000)->Arg(100000);
BENCHMARK(BM_ConvolutionDirect)->Args({10000, 1})->Args({10000, 25})->Args({10000, 100});
BENCHMARK(BM_ConvolutionSpectral)->Args({10000, 1})->Args({10000, 25})->Args({10000, 100});
BENCHMARK(BM_IterateBoth)->Arg(1)->Arg(16);

BENCHMARK_MAIN();
