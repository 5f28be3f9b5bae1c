#include <benchmark/benchmark.h>

#include "gfflab/clusters.hpp"
#include "gfflab/fps.hpp"
#include "gfflab/gff.hpp"
#include "gfflab/network.hpp"
#include "gfflab/soups.hpp"

using namespace gfflab;

static void BM_GffSample(benchmark::State& state) {
    Network net = grid_network(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
    BoundaryFunction u = BoundaryFunction::constant(net, 0.0);
    green_function(net);  // warm the factorization
    uint64_t r = 0;
    for (auto _ : state) {
        RngStream rng(1, r++, 0);
        FieldSample f = sample_discrete_gff(net, u, rng);
        benchmark::DoNotOptimize(f.values.data());
    }
}
BENCHMARK(BM_GffSample)->Arg(9)->Arg(17)->Arg(33);

static void BM_LoopSoup(benchmark::State& state) {
    Network net = grid_network(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
    LoopSoupSampler sampler(net);
    uint64_t r = 0;
    for (auto _ : state) {
        RngStream rng(1, r++, 1);
        SoupSample s = sampler.sample(0.5, rng);
        benchmark::DoNotOptimize(s.trajectories.data());
    }
}
BENCHMARK(BM_LoopSoup)->Arg(9)->Arg(17);

static void BM_AssembleAndFlood(benchmark::State& state) {
    Network net = grid_network(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
    BoundaryFunction u = BoundaryFunction::constant(net, 1.0);
    LoopSoupSampler ls(net);
    ExcursionSampler es(net);
    uint64_t r = 0;
    for (auto _ : state) {
        RngStream rng(1, r++, 2);
        SoupSample soup = ls.sample(0.5, rng);
        SoupSample exc = es.sample(u, rng);
        FieldSample f = assemble_field(soup, exc, rng);
        MetricSubset fps = first_passage_set(f, 0.0, false);
        benchmark::DoNotOptimize(fps.vertices.data());
    }
}
BENCHMARK(BM_AssembleAndFlood)->Arg(9)->Arg(17);

static void BM_ExactEdgeFlood(benchmark::State& state) {
    Network net = grid_network(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
    BoundaryFunction u = BoundaryFunction::constant(net, 0.0);
    uint64_t r = 0;
    for (auto _ : state) {
        RngStream rng(1, r++, 3);
        FieldSample f = sample_discrete_gff(net, u, rng);
        MetricSubset fps = first_passage_set(f, 0.5, true);
        benchmark::DoNotOptimize(fps.vertices.data());
    }
}
BENCHMARK(BM_ExactEdgeFlood)->Arg(17)->Arg(33);

BENCHMARK_MAIN();
