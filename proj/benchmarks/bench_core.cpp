#include <benchmark/benchmark.h>

#include <random>

#include "trail/adam.hpp"
#include "trail/encoder.hpp"
#include "trail/net.hpp"
#include "trail/policy.hpp"
#include "trail/replay.hpp"

using namespace trail;

namespace {

std::vector<double> random_batch(int n, int dim, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> batch(static_cast<std::size_t>(n) * dim);
    for (double& v : batch) v = u(rng);
    return batch;
}

void BM_net_forward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    DenseNet net({4, 64, 64, 4});
    net.init_he(rng);
    const auto inputs = random_batch(256, 4, rng);
    for (auto _ : state) benchmark::DoNotOptimize(net.forward(inputs, 256));
}
BENCHMARK(BM_net_forward);

void BM_net_forward_backward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    DenseNet net({4, 64, 64, 4});
    net.init_he(rng);
    const auto inputs = random_batch(256, 4, rng);
    const auto upstream = random_batch(256, 4, rng);
    std::vector<double> grad(net.n_params());
    for (auto _ : state) {
        DenseNet::Cache cache;
        benchmark::DoNotOptimize(net.forward(inputs, 256, &cache));
        std::fill(grad.begin(), grad.end(), 0.0);
        net.backward(cache, upstream, grad);
        benchmark::DoNotOptimize(grad.data());
    }
}
BENCHMARK(BM_net_forward_backward);

ReplayBuffer filled_buffer() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ReplayBuffer buffer(256);
    for (int e = 0; e < 256; ++e) {
        Trajectory traj;
        for (int i = 0; i < 40; ++i) traj.states.push_back({u(rng), u(rng)});
        traj.actions.assign(39, Action{0});
        buffer.push(std::move(traj));
    }
    return buffer;
}

void BM_sample_gcsl(benchmark::State& state) {
    const ReplayBuffer buffer = filled_buffer();
    std::mt19937_64 rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(sample_gcsl(buffer, 256, rng));
}
BENCHMARK(BM_sample_gcsl);

void BM_sample_trail(benchmark::State& state) {
    const ReplayBuffer buffer = filled_buffer();
    std::mt19937_64 rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(sample_trail(buffer, 256, rng));
}
BENCHMARK(BM_sample_trail);

void BM_gcsl_train_step(benchmark::State& state) {
    const ReplayBuffer buffer = filled_buffer();
    std::mt19937_64 rng(4);
    Policy policy = Policy::make_discrete(2, 4, {64, 64}, rng);
    AdamState opt(policy.net.n_params());
    for (auto _ : state) {
        const auto batch = sample_gcsl(buffer, 256, rng);
        benchmark::DoNotOptimize(gcsl_train_step(policy, batch, opt));
    }
}
BENCHMARK(BM_gcsl_train_step);

void BM_trail_train_step(benchmark::State& state) {
    const ReplayBuffer buffer = filled_buffer();
    std::mt19937_64 rng(5);
    TrajectoryEncoder enc(2, 2, {64, 64}, rng);
    AdamState opt(enc.net().n_params());
    TrailLossConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(trail_train_step(enc, buffer, cfg, opt, 256, rng));
}
BENCHMARK(BM_trail_train_step);

} // namespace

BENCHMARK_MAIN();
