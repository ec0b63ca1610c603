// Microbenchmarks for the optimization side: one training step per
// model kind at the default batch size, and the double backprop inside
// the gradient penalty. Each iteration reruns train() with a one-step
// budget, so setup cost (batch draw, tape build) is included the same
// way the real loop pays it.

#include <benchmark/benchmark.h>

#include "topogen/autodiff.hpp"
#include "topogen/genmodels.hpp"
#include "topogen/pointcloud.hpp"
#include "topogen/rng.hpp"

using namespace topogen;

namespace {

PointCloud gaussian_cloud(int n, int d, uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    PointCloud pc;
    pc.points = std::move(m);
    return pc;
}

void BM_train_step(benchmark::State& state) {
    ModelKind kind = static_cast<ModelKind>(state.range(0));
    PointCloud data = gaussian_cloud(256, 29, 7);
    TrainConfig cfg;
    cfg.steps = 1;
    GenerativeModel m = make_model(kind, data.points.cols(), cfg);
    for (auto _ : state) {
        auto trace = train(m, data, cfg);
        benchmark::DoNotOptimize(trace.data());
    }
    state.SetLabel(kind_name(kind));
}
BENCHMARK(BM_train_step)
    ->Arg(static_cast<int>(ModelKind::GpWgan))
    ->Arg(static_cast<int>(ModelKind::Wgan))
    ->Arg(static_cast<int>(ModelKind::Wae))
    ->Arg(static_cast<int>(ModelKind::Vae));

void BM_gradient_penalty(benchmark::State& state) {
    Rng rng(11);
    Network critic = make_network(29, {64, 64, 1}, {Act::Relu, Act::Relu, Act::Identity}, rng);
    Matrix x_hat(64, 29);
    for (double& v : x_hat.data()) v = rng.normal();
    for (auto _ : state) {
        PenaltyResult p = grad_of_gradient_penalty(critic, x_hat, 10.0);
        benchmark::DoNotOptimize(p.value);
    }
}
BENCHMARK(BM_gradient_penalty);

} // namespace

BENCHMARK_MAIN();
