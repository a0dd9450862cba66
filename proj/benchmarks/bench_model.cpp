#include <benchmark/benchmark.h>

#include "paccert/dataset.hpp"
#include "paccert/net.hpp"

using namespace paccert;

static void BM_LossGradLinear(benchmark::State& state) {
    const long n = state.range(0);
    const auto ds = data::synth_blobs(n, 8, 4, 3.0, 1);
    nets::SoftmaxNet net({nets::ModelArch::Kind::LinearSoftmax, {}, 8, 4});
    const auto params = nets::init_params(net.arch(), 2);
    const auto view = nets::full_view(n);
    for (auto _ : state) benchmark::DoNotOptimize(net.loss_grad(params, ds, view));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LossGradLinear)->Arg(256)->Arg(2048);

static void BM_LossGradMlp(benchmark::State& state) {
    const long n = state.range(0);
    const auto ds = data::synth_blobs(n, 16, 4, 3.0, 1);
    nets::SoftmaxNet net({nets::ModelArch::Kind::Mlp, {64, 32}, 16, 4});
    const auto params = nets::init_params(net.arch(), 2);
    const auto view = nets::full_view(n);
    for (auto _ : state) benchmark::DoNotOptimize(net.loss_grad(params, ds, view));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LossGradMlp)->Arg(256);

static void BM_PerExampleGradNormMax(benchmark::State& state) {
    const long n = state.range(0);
    const auto ds = data::synth_blobs(n, 8, 4, 3.0, 1);
    nets::SoftmaxNet net({nets::ModelArch::Kind::LinearSoftmax, {}, 8, 4});
    const auto params = nets::init_params(net.arch(), 2);
    const auto view = nets::full_view(n);
    for (auto _ : state)
        benchmark::DoNotOptimize(net.per_example_grad_norm_max(params, ds, view));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PerExampleGradNormMax)->Arg(2048);
