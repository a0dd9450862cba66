#include <benchmark/benchmark.h>

#include <vector>

#include "paccert/grid_noise.hpp"
#include "paccert/rng.hpp"

using namespace paccert;

static void BM_XiSample(benchmark::State& state) {
    const auto spec = noise::GridNoiseSpec::make(0.1, static_cast<int>(state.range(0)));
    Rng rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(noise::xi_sample(spec, rng));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_XiSample)->Arg(16)->Arg(256);

static void BM_PerStepKlBound(benchmark::State& state) {
    const long d = state.range(0);
    const auto spec = noise::GridNoiseSpec::make(0.01, static_cast<int>(d));
    Rng rng(2);
    std::vector<double> diff(d);
    for (double& x : diff) x = rng.normal();
    for (auto _ : state)
        benchmark::DoNotOptimize(noise::per_step_kl_bound(diff, 0.1, 0.01, spec));
}
BENCHMARK(BM_PerStepKlBound)->Arg(64)->Arg(4096);

static void BM_FloorSignMag(benchmark::State& state) {
    Rng rng(3);
    std::vector<double> x(state.range(0));
    for (double& v : x) v = rng.normal() * 10.0;
    for (auto _ : state) benchmark::DoNotOptimize(noise::floor_signmag(x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FloorSignMag)->Arg(4096);
