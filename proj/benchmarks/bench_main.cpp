#include <benchmark/benchmark.h>

#include "freeknot/paths.hpp"
#include "freeknot/random.hpp"
#include "freeknot/schemes.hpp"
#include "freeknot/sde.hpp"
#include "freeknot/tau11.hpp"

namespace fk = freeknot;

namespace {

fk::GridPath bench_path(std::size_t n) {
    fk::RandomStream rng(17);
    return fk::sample_grid_path(n, rng);
}

void BM_DetectKnotsHull(benchmark::State& state) {
    const fk::GridPath path = bench_path(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fk::detect_knots_on_grid(path, 0.1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectKnotsHull)->Arg(10000)->Arg(100000);

void BM_DetectKnotsNaive(benchmark::State& state) {
    const fk::GridPath path = bench_path(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fk::detect_knots_on_grid_naive(path, 0.1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectKnotsNaive)->Arg(10000);

void BM_TauSample(benchmark::State& state) {
    const fk::Tau11Dist dist;
    fk::RandomStream rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(dist.sample(rng));
}
BENCHMARK(BM_TauSample);

void BM_BuildXtilde(benchmark::State& state) {
    const fk::ScalarSde sde = fk::make_gbm(0.1, 0.5, 1.0);
    fk::RandomStream rng(5);
    const fk::KnotPath knots = fk::sample_knot_sequence(state.range(0) / 1000.0, rng);
    for (auto _ : state) benchmark::DoNotOptimize(fk::build_xtilde(sde, knots));
    state.counters["knots"] = static_cast<double>(knots.n_knots());
}
BENCHMARK(BM_BuildXtilde)->Arg(100)->Arg(25);

}  // namespace

BENCHMARK_MAIN();
