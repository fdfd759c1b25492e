#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "bwgame/demand_curve.hpp"
#include "bwgame/oracle.hpp"
#include "bwgame/protocol.hpp"
#include "bwgame/simulator.hpp"
#include "bwgame/solver.hpp"
#include "support/generators.hpp"

namespace {

using namespace bwgame;

std::vector<GameInstance> instances(std::size_t peers, std::size_t count) {
  std::mt19937_64 rng(peers);
  std::vector<GameInstance> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(testing::random_oversubscribed(rng, {peers, peers}));
  return out;
}

void BM_SolveExample4(benchmark::State& state) {
  const GameInstance g = testing::example4();
  for (auto _ : state) benchmark::DoNotOptimize(solve(g));
}
BENCHMARK(BM_SolveExample4);

void BM_SolveRandom(benchmark::State& state) {
  const auto games = instances(static_cast<std::size_t>(state.range(0)), 64);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(solve(games[i++ % games.size()]));
}
BENCHMARK(BM_SolveRandom)->RangeMultiplier(4)->Range(2, 512);

void BM_BuildDemandCurve(benchmark::State& state) {
  const auto games = instances(static_cast<std::size_t>(state.range(0)), 16);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(DemandCurve(games[i++ % games.size()]));
}
BENCHMARK(BM_BuildDemandCurve)->RangeMultiplier(4)->Range(2, 512);

void BM_BargainExample4(benchmark::State& state) {
  const GameInstance g = testing::example4();
  BargainConfig cfg;
  cfg.initial_price = 288.539;
  for (auto _ : state) benchmark::DoNotOptimize(run_bargaining(g, cfg));
}
BENCHMARK(BM_BargainExample4)->Unit(benchmark::kMillisecond);

void BM_DirectExample4(benchmark::State& state) {
  const GameInstance g = testing::example4();
  for (auto _ : state) benchmark::DoNotOptimize(run_direct(g));
}
BENCHMARK(BM_DirectExample4);

void BM_GridOracle(benchmark::State& state) {
  const auto games = instances(6, 8);
  std::size_t i = 0;
  for (auto _ : state) {
    const GameInstance& g = games[i++ % games.size()];
    benchmark::DoNotOptimize(grid_search_price(g, GridSpec::for_game(g, 1e-4)));
  }
}
BENCHMARK(BM_GridOracle)->Unit(benchmark::kMicrosecond);

void BM_RandomScenario(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const auto events = testing::random_scenario(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(2.0, events));
}
BENCHMARK(BM_RandomScenario)->Arg(30)->Arg(300)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
