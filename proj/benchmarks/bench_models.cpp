/*
 * Copyright 2026 The bhest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <map>

#include "bh/explain.hpp"
#include "bh/models.hpp"
#include "bh/synth.hpp"

namespace {

const bh::Dataset& friedman(std::size_t n) {
  static std::map<std::size_t, bh::Dataset> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, bh::to_dataset(bh::friedman_table(n, 3))).first;
  return it->second;
}

void BM_FitTree(benchmark::State& state) {
  const auto& d = friedman(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bh::fit_tree(d, bh::TreeParams{}));
}
BENCHMARK(BM_FitTree)->Arg(1000)->Arg(10000);

void BM_FitForest(benchmark::State& state) {
  const auto& d = friedman(static_cast<std::size_t>(state.range(0)));
  bh::ForestParams p;
  p.n_trees = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(bh::fit_forest(d, p));
}
BENCHMARK(BM_FitForest)->Args({1000, 100})->Args({1000, 500})->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  const auto& d = friedman(1000);
  bh::ForestParams p;
  p.n_trees = 500;
  const auto forest = bh::fit_forest(d, p);
  for (auto _ : state) benchmark::DoNotOptimize(forest->predict_all(d));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(d.n_rows));
}
BENCHMARK(BM_ForestPredict)->Unit(benchmark::kMillisecond);

void BM_PermutationImportance(benchmark::State& state) {
  const auto& d = friedman(1000);
  bh::ForestParams p;
  p.n_trees = 100;
  const auto forest = bh::fit_forest(d, p);
  for (auto _ : state) benchmark::DoNotOptimize(bh::permutation_importance(*forest, d, 5, 1));
}
BENCHMARK(BM_PermutationImportance)->Unit(benchmark::kMillisecond);

void BM_ShapleyExact(benchmark::State& state) {
  const auto& d = friedman(300);
  bh::ForestParams p;
  p.n_trees = 50;
  const auto forest = bh::fit_forest(d, p);
  const auto bg = bh::sample_rows(d, 20, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bh::shapley_values(*forest, d.row(0), bg, bh::ShapleyOptions{}));
  }
}
BENCHMARK(BM_ShapleyExact)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
