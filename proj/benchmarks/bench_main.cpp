#include <benchmark/benchmark.h>

#include <random>

#include "mdr/closed_form.hpp"
#include "mdr/entropy_engine.hpp"
#include "mdr/gf256.hpp"
#include "mdr/range_coder.hpp"
#include "mdr/region_explorer.hpp"
#include "mdr/repair_sim.hpp"

namespace {

mdr::ChannelParams bench_params(int n) {
  mdr::ChannelParams p = mdr::ChannelParams::all_absent(n);
  p.layers[0] = {0.8, 0.5, 0.2};
  p.top_sigma_sq = 1.3;
  return p;
}

void BM_CondEntropy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto model = mdr::CovarianceModel::build(bench_params(n));
  mdr::VariableSet a{mdr::y_label(1, n)};
  mdr::VariableSet b{"U1"};
  for (int i = 1; i < n; ++i) b.add(mdr::y_label(1, i));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdr::cond_entropy(model, a, b));
  }
}
BENCHMARK(BM_CondEntropy)->Arg(3)->Arg(5)->Arg(8);

void BM_Theorem3Rates(benchmark::State& state) {
  const auto params = bench_params(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdr::theorem3_rates(params));
  }
}
BENCHMARK(BM_Theorem3Rates);

void BM_TwoNodeOptimal(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdr::two_node_optimal({0.3, 0.22}));
  }
}
BENCHMARK(BM_TwoNodeOptimal);

void BM_ThreeNodeOptimal(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdr::three_node_optimal({0.3, 0.2}));
  }
}
BENCHMARK(BM_ThreeNodeOptimal);

void BM_SweepRow(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdr::sweep(0.3, {0.2}));
  }
}
BENCHMARK(BM_SweepRow);

void BM_ReedSolomonEncode(benchmark::State& state) {
  mdr::ReedSolomon rs(5, 3);
  std::vector<std::vector<uint8_t>> data(3, std::vector<uint8_t>(4096));
  std::mt19937_64 rng(1);
  for (auto& shard : data) {
    for (auto& b : shard) b = static_cast<uint8_t>(rng());
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(rs.encode(data));
  }
  state.SetBytesProcessed(state.iterations() * 3 * 4096);
}
BENCHMARK(BM_ReedSolomonEncode);

void BM_PackIndices(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.5);
  std::vector<int32_t> v(10000);
  for (auto& x : v) x = static_cast<int32_t>(std::lround(g(rng)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdr::pack_indices(v));
  }
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_PackIndices);

void BM_SimTrial(benchmark::State& state) {
  const mdr::SimConfig cfg = mdr::make_sim_config(3, {0.3, 0.2}, 4000, 77);
  mdr::RepairSimulator sim(cfg);
  uint32_t trial = 0;
  for (auto _ : state) {
    const auto x = sim.make_source(trial);
    const auto nodes = sim.encode_block(x, trial);
    const mdr::NodeContent repaired = sim.repair_node({&nodes[0], &nodes[1]}, 2);
    benchmark::DoNotOptimize(repaired);
    ++trial;
  }
  state.SetItemsProcessed(state.iterations() * cfg.block_len);
}
BENCHMARK(BM_SimTrial);

}  // namespace

BENCHMARK_MAIN();
