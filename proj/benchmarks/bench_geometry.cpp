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

#include "bh/geometry.hpp"
#include "bh/rng.hpp"

namespace {

bh::FootprintSet random_footprints(std::size_t n) {
  bh::Rng rng(4);
  const double extent = 40.0 * std::sqrt(static_cast<double>(n));
  bh::FootprintSet out;
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = bh::uniform(rng, 0, extent), cy = bh::uniform(rng, 0, extent);
    const double a = bh::uniform(rng, 0, 3.14), c = std::cos(a), s = std::sin(a);
    const double hl = bh::uniform(rng, 4, 12), hw = bh::uniform(rng, 3, 8);
    bh::Polygon p;
    for (auto [u, v] : {std::pair{-hl, -hw}, {hl, -hw}, {hl, hw}, {-hl, hw}}) {
      p.exterior.push_back({cx + u * c - v * s, cy + u * s + v * c});
    }
    out.push_back({std::to_string(i), std::move(p), std::nullopt});
  }
  return out;
}

void BM_NearDistances(benchmark::State& state) {
  const auto fps = random_footprints(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bh::near_distances(fps));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NearDistances)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_MinBoundingRect(benchmark::State& state) {
  bh::Rng rng(5);
  bh::Polygon p;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * 3.141592653589793 * static_cast<double>(i) / static_cast<double>(n);
    const double r = bh::uniform(rng, 0.9, 1.0) * 50.0;
    p.exterior.push_back({r * std::cos(a), r * std::sin(a)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(bh::min_bounding_rect(p));
}
BENCHMARK(BM_MinBoundingRect)->Arg(8)->Arg(256)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
