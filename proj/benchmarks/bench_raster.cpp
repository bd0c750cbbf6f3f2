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

#include <cmath>

#include "bh/raster.hpp"
#include "bh/rng.hpp"

namespace {

bh::GridGeometry grid(std::size_t n) {
  return bh::GridGeometry{n, n, 0.0, static_cast<double>(n) * 10.0, 10.0};
}

bh::RasterGrid random_grid(std::size_t n) {
  bh::Rng rng(1);
  bh::RasterGrid g(grid(n));
  for (float& v : g.values()) v = static_cast<float>(bh::uniform(rng, 0, 1));
  return g;
}

void BM_WindowMedian(benchmark::State& state) {
  const auto g = random_grid(static_cast<std::size_t>(state.range(0)));
  const double window = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(bh::window_median(g, window));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_WindowMedian)->Args({256, 30})->Args({256, 50})->Args({512, 50})->Args({256, 100});

void BM_Rasterize(benchmark::State& state) {
  const auto g = grid(512);
  bh::Polygon p;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * 3.141592653589793 * static_cast<double>(i) / static_cast<double>(n);
    p.exterior.push_back({2560.0 + 2000.0 * std::cos(a), 2560.0 + 2000.0 * std::sin(a)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(bh::rasterize(p, g));
}
BENCHMARK(BM_Rasterize)->Arg(4)->Arg(64)->Arg(1024);

void BM_BufferMask(benchmark::State& state) {
  const auto g = grid(256);
  bh::Rng rng(2);
  bh::MaskGrid m(g);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, bh::uniform01(rng) < 0.05);
  const double d = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bh::buffer_mask(m, d));
}
BENCHMARK(BM_BufferMask)->Arg(10)->Arg(50)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
