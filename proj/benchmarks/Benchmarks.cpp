#include <benchmark/benchmark.h>

#include <random>

#include "sparqlog/hypergraph/Ged.h"
#include "sparqlog/intent/Intent.h"
#include "sparqlog/sparql/QueryAst.h"
#include "support/GraphOracles.h"
#include "support/HmmOracles.h"
#include "support/SyntheticLog.h"

using namespace sparqlog;

static void BM_ParseQuery(benchmark::State& state) {
  std::vector<std::string> queries;
  for (size_t shape = 0; shape < 9; ++shape) {
    queries.push_back(testing::syntheticQuery("bench", shape, shape));
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sparql::parseQuery(queries[i++ % queries.size()]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ParseQuery);

static void BM_ExactGed(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto size = static_cast<size_t>(state.range(0));
  std::vector<std::pair<hypergraph::Hypergraph, hypergraph::Hypergraph>> pairs;
  for (int i = 0; i < 32; ++i) {
    pairs.emplace_back(testing::randomHypergraph(rng, size, size),
                       testing::randomHypergraph(rng, size, size));
  }
  size_t i = 0;
  for (auto _ : state) {
    const auto& [g1, g2] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(hypergraph::ged(g1, g2));
  }
}
BENCHMARK(BM_ExactGed)->Arg(4)->Arg(6)->Arg(8);

static void BM_GreedyGed(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto g1 = testing::randomHypergraph(rng, 10, 16);
  const auto g2 = testing::randomHypergraph(rng, 10, 16);
  for (auto _ : state) benchmark::DoNotOptimize(hypergraph::greedyGedCost(g1, g2));
}
BENCHMARK(BM_GreedyGed);

static void BM_Forward(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto model = testing::randomHmm(rng, intent::kRcStateCount, intent::kSymbolCount);
  std::vector<size_t> os(static_cast<size_t>(state.range(0)));
  for (auto& u : os) u = rng() % intent::kSymbolCount;
  for (auto _ : state) benchmark::DoNotOptimize(intent::logForward(model, os));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(10)->Arg(100)->Arg(1000);

static void BM_Decode(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto model = testing::randomHmm(rng, intent::kRcStateCount, intent::kSymbolCount);
  std::vector<size_t> os(static_cast<size_t>(state.range(0)));
  for (auto& u : os) u = rng() % intent::kSymbolCount;
  for (auto _ : state) benchmark::DoNotOptimize(intent::decode(model, os));
}
BENCHMARK(BM_Decode)->Arg(100);

BENCHMARK_MAIN();
