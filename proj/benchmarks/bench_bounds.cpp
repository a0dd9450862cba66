#include <benchmark/benchmark.h>

#include "paccert/bounds.hpp"

using namespace paccert::bounds;

static void BM_PhiRoundTrip(benchmark::State& state) {
    double x = 0.3;
    for (auto _ : state) {
        const double y = phi(x, 50.0, 100);
        benchmark::DoNotOptimize(phi_inv(y, 50.0, 100));
        x = x < 0.9 ? x + 1e-6 : 0.3;
    }
}
BENCHMARK(BM_PhiRoundTrip);

static void BM_CDelta(benchmark::State& state) {
    double d = 0.05;
    for (auto _ : state) {
        benchmark::DoNotOptimize(c_delta(d));
        d = d < 0.9 ? d + 1e-6 : 0.05;
    }
}
BENCHMARK(BM_CDelta);

static void BM_FgdBound(benchmark::State& state) {
    const CatoniParams p{1.0, 60000, 30000, 0.1};
    double sum = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fgd_bound(0.02, sum, 1000000, 1000, p));
        sum += 1e-6;
    }
}
BENCHMARK(BM_FgdBound);

static void BM_CldBound(benchmark::State& state) {
    const CatoniParams p{1.0, 2000, 1000, 0.1};
    double T = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cld_bound(0.05, 1.0, 1.0, 0.5, 1.0, T, p));
        T = T < 100.0 ? T + 1e-4 : 1.0;
    }
}
BENCHMARK(BM_CldBound);
