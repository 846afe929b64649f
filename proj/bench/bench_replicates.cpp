//! Serial reference against the OpenMP replicate engine on three workloads.

#include <benchmark/benchmark.h>

#include "wfsim/chains.hpp"
#include "wfsim/engine.hpp"
#include "wfsim/meanfield.hpp"
#include "wfsim/nonlinear.hpp"

using namespace wfsim;

namespace
{
auto neutral_chain = [](std::uint64_t, ReplicateStream& s) { return run_chain(0.6, DriftSpec::identity(), 0.5, 200, s); };

void BM_ChainSerial(benchmark::State& state)
{
    auto reps = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(map_replicates_serial<double>(reps, 1, neutral_chain));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ChainParallel(benchmark::State& state)
{
    auto reps = static_cast<std::size_t>(state.range(0));
    set_thread_count(static_cast<int>(state.range(1)));
    for (auto _ : state)
        benchmark::DoNotOptimize(map_replicates<double>(reps, 1, neutral_chain));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SystemSerial(benchmark::State& state)
{
    auto M = static_cast<std::size_t>(state.range(0));
    auto drift = NonLinearDrift::affine(0.1, 0.2, 0.3);
    GridSampler mu0(GridDensity::uniform(256));
    auto job = [&](std::uint64_t, ReplicateStream& s) {
        auto init = s.split(1);
        return system_run(system_init(M, mu0, init), 0.5, drift, 50, s.split(2)).mean();
    };
    for (auto _ : state)
        benchmark::DoNotOptimize(map_replicates_serial<double>(64, 2, job));
}

void BM_SystemParallel(benchmark::State& state)
{
    auto M = static_cast<std::size_t>(state.range(0));
    set_thread_count(static_cast<int>(state.range(1)));
    auto drift = NonLinearDrift::affine(0.1, 0.2, 0.3);
    GridSampler mu0(GridDensity::uniform(256));
    auto job = [&](std::uint64_t, ReplicateStream& s) {
        auto init = s.split(1);
        return system_run(system_init(M, mu0, init), 0.5, drift, 50, s.split(2)).mean();
    };
    for (auto _ : state)
        benchmark::DoNotOptimize(map_replicates<double>(64, 2, job));
}
}  // namespace

BENCHMARK(BM_ChainSerial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainParallel)->ArgsProduct({{10000, 100000}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SystemSerial)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SystemParallel)->ArgsProduct({{64, 1024}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
