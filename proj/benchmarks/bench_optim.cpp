#include <benchmark/benchmark.h>

#include "paccert/optim.hpp"

using namespace paccert;

namespace {

struct Fixture {
    data::Dataset ds;
    data::IndexSplit split;
    nets::SoftmaxNet net;
    std::vector<double> w0;
    optim::Schedule sch;

    explicit Fixture(long n, long T)
        : ds(data::synth_blobs(n, 2, 2, 4.0, 1)),
          split(data::sample_prior_indices(n, n / 2, 2)),
          net({nets::ModelArch::Kind::LinearSoftmax, {}, 2, 2}),
          w0(nets::init_params(net.arch(), 3)) {
        sch.T = T;
        sch.gamma = optim::Schedule::constant(T, 0.1);
        sch.eps = optim::Schedule::constant(T, 0.05);
        sch.sigma = optim::Schedule::constant(T, 0.1);
    }
};

}  // namespace

static void BM_StepFgd(benchmark::State& state) {
    Fixture f(state.range(0), 1);
    optim::OptimState st{f.w0, f.w0};
    for (auto _ : state) benchmark::DoNotOptimize(optim::step_fgd(st, f.net, f.ds, f.split, f.sch, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StepFgd)->Arg(512)->Arg(2000);

static void BM_StepGld(benchmark::State& state) {
    Fixture f(state.range(0), 1);
    optim::OptimState st{f.w0, f.w0};
    Rng rng(4);
    for (auto _ : state)
        benchmark::DoNotOptimize(optim::step_gld(st, f.net, f.ds, f.split, f.sch, 1, rng));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StepGld)->Arg(512);

static void BM_RunFgd(benchmark::State& state) {
    Fixture f(512, state.range(0));
    optim::RunSpec spec;
    spec.algo = optim::Algorithm::Fgd;
    spec.schedule = f.sch;
    for (auto _ : state)
        benchmark::DoNotOptimize(optim::run(f.net, f.w0, f.ds, f.split, spec));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunFgd)->Arg(50);
