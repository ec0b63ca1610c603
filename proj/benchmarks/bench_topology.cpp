// Microbenchmarks for the topology pipeline: complex construction,
// reduction, and bottleneck matching at the batch sizes the evaluator
// uses. Clouds are circles so the filtration has real structure.

#include <benchmark/benchmark.h>

#include <cmath>

#include "topogen/bottleneck.hpp"
#include "topogen/persistence.hpp"
#include "topogen/pointcloud.hpp"
#include "topogen/rips.hpp"
#include "topogen/rng.hpp"

using namespace topogen;

namespace {

PointCloud circle(int n) {
    Matrix m(n, 2);
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * 3.14159265358979323846 * i / n;
        m(i, 0) = std::cos(a);
        m(i, 1) = std::sin(a);
    }
    PointCloud pc;
    pc.points = std::move(m);
    return pc;
}

void BM_rips_build(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    DistanceMatrix dist = pairwise_distances(circle(n));
    double cap = max_pairwise_distance(dist);
    for (auto _ : state) {
        FilteredComplex f = build_vietoris_rips(dist, cap, 2);
        benchmark::DoNotOptimize(f.simplices.data());
    }
}
BENCHMARK(BM_rips_build)->Arg(32)->Arg(64)->Arg(128);

void BM_persistence(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    DistanceMatrix dist = pairwise_distances(circle(n));
    FilteredComplex f = build_vietoris_rips(dist, max_pairwise_distance(dist), 2);
    for (auto _ : state) {
        PersistenceDiagram d = compute_persistence(f);
        benchmark::DoNotOptimize(d.h[0].data());
    }
}
BENCHMARK(BM_persistence)->Arg(32)->Arg(64)->Arg(128);

void BM_h0_union_find(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    DistanceMatrix dist = pairwise_distances(circle(n));
    double cap = max_pairwise_distance(dist);
    for (auto _ : state) {
        PersistenceDiagram d = h0_via_union_find(dist, cap);
        benchmark::DoNotOptimize(d.h[0].data());
    }
}
BENCHMARK(BM_h0_union_find)->Arg(128)->Arg(512);

PersistenceDiagram noisy_diagram(int bars, uint64_t seed) {
    Rng rng(seed);
    PersistenceDiagram d;
    for (int i = 0; i < bars; ++i) {
        Bar b;
        b.birth = rng.uniform(0.0, 2.0);
        b.death = b.birth + rng.uniform(1e-3, 2.0);
        d.h[0].push_back(b);
    }
    return d;
}

void BM_bottleneck(benchmark::State& state) {
    int bars = static_cast<int>(state.range(0));
    PersistenceDiagram a = noisy_diagram(bars, 1);
    PersistenceDiagram b = noisy_diagram(bars, 2);
    for (auto _ : state) {
        double v = bottleneck_distance(a, b, 0);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_bottleneck)->Arg(8)->Arg(32)->Arg(128);

} // namespace

BENCHMARK_MAIN();
