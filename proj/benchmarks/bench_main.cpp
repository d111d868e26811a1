// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "moop/hybrid.hpp"
#include "moop/metrics.hpp"
#include "moop/moea.hpp"
#include "moop/reinforce.hpp"
#include "moop/rng.hpp"

namespace {

using namespace moop;

std::vector<std::vector<double>> random_front(std::size_t n, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> pts(n, std::vector<double>(m));
    for (auto& p : pts)
        for (auto& v : p) v = rng.uniform();
    return pts;
}

void BM_Hypervolume2D(benchmark::State& state) {
    const auto pts = random_front(static_cast<std::size_t>(state.range(0)), 2, 1);
    const std::vector<double> ref{0.0, 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(hypervolume(pts, ref));
}
BENCHMARK(BM_Hypervolume2D)->Arg(100)->Arg(1000);

void BM_Hypervolume3D(benchmark::State& state) {
    const auto pts = pareto_filter(random_front(static_cast<std::size_t>(state.range(0)), 3, 2));
    const std::vector<double> ref{0.0, 0.0, 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(hypervolume(pts, ref));
}
BENCHMARK(BM_Hypervolume3D)->Arg(100)->Arg(400);

void BM_NondominatedSort(benchmark::State& state) {
    const auto pts = random_front(static_cast<std::size_t>(state.range(0)), 3, 3);
    const std::vector<double> cv(pts.size(), 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(nondominated_sort(pts, cv));
}
BENCHMARK(BM_NondominatedSort)->Arg(200);

void BM_GreedyDecode(benchmark::State& state) {
    Rng rng(4);
    const auto actor = ActorParameters::initialize(128, rng, 0.0);
    const auto coords = random_coords(static_cast<int>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(decode_tour(actor, coords, DecodeMode::greedy).log_prob);
}
BENCHMARK(BM_GreedyDecode)->Arg(20)->Arg(100);

void BM_ReinforceInstanceGradient(benchmark::State& state) {
    ModelConfig mc;
    mc.init_range = 0.0;
    PolicyModel model = PolicyModel::initialize(mc);
    Rng rng(5);
    const auto batch = sample_tsp_batch(1, static_cast<int>(state.range(0)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(accumulate_batch_gradients(model, batch, rng).actor_loss);
}
BENCHMARK(BM_ReinforceInstanceGradient)->Arg(20);

void BM_SingleChromosomeDecode(benchmark::State& state) {
    const auto inst = generate_instance(static_cast<int>(state.range(0)), 1, grid_t_max(static_cast<int>(state.range(0))), 6);
    const auto dist = distance_matrix(inst);
    Rng rng(7);
    const auto g = random_permutation_genomes(inst, 1, false, rng).front();
    for (auto _ : state) benchmark::DoNotOptimize(decode_single_chromosome(inst, dist, g.order).length);
}
BENCHMARK(BM_SingleChromosomeDecode)->Arg(200);

} // namespace
BENCHMARK_MAIN();
