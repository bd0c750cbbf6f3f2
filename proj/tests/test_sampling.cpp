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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "bh/error.hpp"
#include "bh/sampling.hpp"
#include "bh/synth.hpp"
#include "test_util.hpp"

namespace bh {
namespace {

using testing::square_grid;

Footprint square_fp(std::string id, double x0, double y0, double side,
                    std::optional<double> h = std::nullopt) {
  return {std::move(id), {{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}}, {}}, h};
}

FeatureTable height_table(const std::vector<double>& heights) {
  FeatureTable t({"a", "b", kHeightColumn}, std::string(kHeightColumn));
  for (std::size_t i = 0; i < heights.size(); ++i) {
    const double row[] = {static_cast<double>(i), -static_cast<double>(i) * 0.5, heights[i]};
    t.add_row("r" + std::to_string(i), row);
  }
  return t;
}

TEST(ZonalMedian, HandCases) {
  const auto g = square_grid(3);
  const RasterGrid c = RasterGrid::filled(g, 3.3f);
  MaskGrid m(g);
  m.set(std::size_t{4});
  m.set(std::size_t{0});
  EXPECT_NEAR(*zonal_median(c, m), 3.3, 1e-6);
  RasterGrid v(g);
  v.values()[0] = 1;
  v.values()[1] = 2;
  v.values()[2] = 100;
  MaskGrid top(g);
  for (std::size_t i = 0; i < 3; ++i) top.set(i);
  EXPECT_EQ(*zonal_median(v, top), 2.0);
  EXPECT_FALSE(zonal_median(c, MaskGrid(g)).has_value());
  // Nodata is ignored.
  top.set(std::size_t{5});
  EXPECT_EQ(*zonal_median(v, top), 2.0);
  EXPECT_THROW(zonal_median(c, MaskGrid(square_grid(4))), Error);
}

TEST(ReferenceHeight, MedianOverFootprint) {
  const GridGeometry g{3, 3, 0, 30, 10.0};
  RasterGrid flat = RasterGrid::filled(g, 12.0f);
  EXPECT_EQ(*reference_height(flat, square_fp("a", 0, 0, 30)).height_m, 12.0);

  RasterGrid roof = RasterGrid::filled(g, 0.0f);
  roof.at(0, 0) = 10;
  roof.at(0, 1) = 10;
  roof.at(0, 2) = 30;
  EXPECT_EQ(*reference_height(roof, square_fp("b", 0, 20, 30)).height_m, 10.0);

  const HeightOutcome off = reference_height(flat, square_fp("c", 500, 500, 20));
  EXPECT_FALSE(off.height_m.has_value());
  EXPECT_EQ(off.reason, DropReason::kSubPixelFootprint);
}

TEST(Assemble, ConstantGridsNoBuffer) {
  const auto g = square_grid(10);
  FeatureRasters f;
  f.add("A", RasterGrid::filled(g, 1.5f));
  f.add("B", RasterGrid::filled(g, -2.0f));
  const FootprintSet fps = {square_fp("x", 20, 20, 30, 15.0)};
  AssemblyOptions o;
  o.buffer_m = 0;
  const FeatureTable t = assemble_samples(f, fps, o);
  ASSERT_EQ(t.rows(), 1u);
  EXPECT_EQ(t.value(0, 0), 1.5);
  EXPECT_EQ(t.value(0, 1), -2.0);
  EXPECT_EQ(t.target_values()[0], 15.0);
  EXPECT_EQ(t.target(), std::string(kHeightColumn));
}

TEST(Assemble, BufferedZoneMatchesComposedOracle) {
  const auto g = square_grid(40);
  const RasterGrid grid = testing::random_grid(g, 12);
  FeatureRasters f;
  f.add("A", grid);
  FootprintSet fps;
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    fps.push_back({"f" + std::to_string(i),
                   testing::rotated_rect(uniform(rng, 30, 370), uniform(rng, 30, 370),
                                         uniform(rng, 12, 40), uniform(rng, 12, 30),
                                         uniform(rng, 0, 3)),
                   10.0 + i});
  }
  AssemblyOptions o;
  o.buffer_m = 50;
  AssemblyReport rep;
  const FeatureTable t = assemble_samples(f, fps, o, &rep);
  EXPECT_EQ(t.rows() + rep.dropped.size(), fps.size());
  std::size_t r = 0;
  for (const Footprint& fp : fps) {
    const MaskGrid own = rasterize(fp.polygon, g);
    if (own.count() == 0) continue;
    // Brute force: every pixel within 50 m of a footprint pixel center.
    std::vector<float> vals;
    for (std::size_t p = 0; p < g.size(); ++p) {
      for (std::size_t s : own.set_indices()) {
        const double dx = g.center_x(p % g.cols) - g.center_x(s % g.cols);
        const double dy = g.center_y(p / g.cols) - g.center_y(s / g.cols);
        if (dx * dx + dy * dy <= 2500.0) {
          vals.push_back(grid.values()[p]);
          break;
        }
      }
    }
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    const double med = n % 2 ? vals[n / 2] : 0.5 * (static_cast<double>(vals[n / 2 - 1]) + vals[n / 2]);
    ASSERT_EQ(t.ids()[r], fp.id);
    EXPECT_EQ(t.value(r, 0), med);
    ++r;
  }
}

TEST(Assemble, DropsAndReports) {
  const auto g = square_grid(10);
  RasterGrid a = RasterGrid::filled(g, 1.0f);
  for (std::size_t c = 0; c < 10; ++c) a.at(0, c) = a.nodata();
  FeatureRasters f;
  f.add("A", a);
  FootprintSet fps = {square_fp("nodata", 0, 90, 10, 5.0),  // top row only
                      square_fp("sub", 51, 51, 2, 5.0),     // misses all centers
                      square_fp("noh", 40, 40, 20),         // no reference height
                      square_fp("ok", 20, 20, 20, 9.0)};
  AssemblyOptions o;
  o.buffer_m = 0;
  AssemblyReport rep;
  const FeatureTable t = assemble_samples(f, fps, o, &rep);
  ASSERT_EQ(t.rows(), 1u);
  EXPECT_EQ(t.ids()[0], "ok");
  EXPECT_EQ(rep.kept, 1u);
  ASSERT_EQ(rep.dropped.size(), 3u);
  std::set<std::pair<std::string, DropReason>> got;
  for (const auto& d : rep.dropped) got.insert({d.id, d.reason});
  EXPECT_TRUE(got.count({"nodata", DropReason::kMissingFeature}));
  EXPECT_TRUE(got.count({"sub", DropReason::kSubPixelFootprint}));
  EXPECT_TRUE(got.count({"noh", DropReason::kNoTarget}));
}

TEST(Assemble, GeometryColumnsFromFootprints) {
  const auto g = square_grid(20);
  FeatureRasters f;
  f.add("A", RasterGrid::filled(g, 1.0f));
  f.add("MBG_Width", RasterGrid::filled(g, 0.0f));
  f.add("MBG_Length", RasterGrid::filled(g, 0.0f));
  f.add("Near_Distance", RasterGrid::filled(g, 0.0f));
  FootprintSet fps = {{"a", {{{10, 10}, {50, 10}, {50, 30}, {10, 30}}, {}}, 5.0},
                      {"b", {{{80, 10}, {100, 10}, {100, 30}, {80, 30}}, {}}, 7.0}};
  const FeatureTable t = assemble_samples(f, fps, AssemblyOptions{});
  ASSERT_EQ(t.rows(), 2u);
  EXPECT_DOUBLE_EQ(t.value(0, t.column_index("MBG_Width")), 20.0);
  EXPECT_DOUBLE_EQ(t.value(0, t.column_index("MBG_Length")), 40.0);
  EXPECT_DOUBLE_EQ(t.value(1, t.column_index("Near_Distance")), 30.0);
}

TEST(ClipTarget, PercentileBand) {
  std::vector<double> h(100);
  for (std::size_t i = 0; i < 100; ++i) h[i] = static_cast<double>(i + 1);
  const FeatureTable t = clip_target(height_table(h), 1.0, 99.0);
  EXPECT_EQ(t.rows(), 98u);
  std::size_t prev = t.rows();
  for (double lo : {2.0, 5.0, 10.0}) {
    const std::size_t n = clip_target(height_table(h), lo, 99.0).rows();
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(LogTransform, NaturalLogClampedAtOneMeter) {
  const FeatureTable t = log_transform_target(height_table({0.5, 1.0, std::exp(2.0), 812.0}));
  EXPECT_EQ(t.target(), std::string(kLogHeightColumn));
  const auto y = t.target_values();
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 0.0);
  EXPECT_DOUBLE_EQ(y[2], 2.0);
  EXPECT_NEAR(y[3], 6.70, 0.005);
}

TEST(BinByTarget, HandMedians) {
  FeatureTable t({"a", "b", kLogHeightColumn}, std::string(kLogHeightColumn));
  const double rows[3][3] = {{1, 10, 2.003}, {5, 30, 2.007}, {2, 20, 2.009}};
  for (int i = 0; i < 3; ++i) t.add_row(std::to_string(i), rows[i]);
  const BinnedTable b = bin_by_target(t, 0.01);
  ASSERT_EQ(b.table.rows(), 1u);
  EXPECT_EQ(b.bin_index[0], 200);
  EXPECT_EQ(b.source_count[0], 3u);
  EXPECT_EQ(b.table.value(0, 0), 2.0);
  EXPECT_EQ(b.table.value(0, 1), 20.0);
  EXPECT_EQ(b.table.value(0, 2), 2.007);
}

TEST(PrepareTraining, EqualHeightsGiveOneBin) {
  const BinnedTable b = prepare_training(height_table(std::vector<double>(20, 25.0)));
  EXPECT_EQ(b.table.rows(), 1u);
  EXPECT_EQ(b.source_count[0], 20u);
  EXPECT_THROW(prepare_training(height_table({})), Error);
}

TEST(PrepareTraining, BinContractOnRandomHeights) {
  Rng rng(7);
  std::vector<double> h(3000);
  for (double& v : h) v = std::exp(uniform(rng, 0.0, 6.7));
  const FeatureTable src = height_table(h);
  const BinnedTable b = prepare_training(src);
  const FeatureTable logged = log_transform_target(clip_target(src, 1, 99));
  const auto y = b.table.target_values();
  EXPECT_LE(b.table.rows(), 670u);
  EXPECT_LE(b.table.rows(), logged.rows());
  for (std::size_t r = 0; r < b.table.rows(); ++r) {
    const double lo = static_cast<double>(b.bin_index[r]) * 0.01;
    EXPECT_GE(y[r], lo);
    EXPECT_LT(y[r], lo + 0.01 + 1e-12);
    if (r > 0) {
      EXPECT_GT(b.bin_index[r], b.bin_index[r - 1]);
    }
    EXPECT_GE(b.source_count[r], 1u);
  }
  // Shuffling the input rows does not change the output.
  std::vector<std::size_t> perm(src.rows());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng prng(3);
  shuffle(std::span<std::size_t>(perm), prng);
  const BinnedTable shuffled = prepare_training(src.select_rows(perm));
  EXPECT_EQ(std::vector<double>(shuffled.table.values().begin(), shuffled.table.values().end()),
            std::vector<double>(b.table.values().begin(), b.table.values().end()));
}

TEST(Split, DeterministicDisjointExhaustive) {
  const auto [a, b] = split_indices(10, 0.2, 5);
  EXPECT_EQ(a.size(), 8u);
  EXPECT_EQ(b.size(), 2u);
  const auto again = split_indices(10, 0.2, 5);
  EXPECT_EQ(again.first, a);
  EXPECT_EQ(again.second, b);
  std::set<std::size_t> all(a.begin(), a.end());
  all.insert(b.begin(), b.end());
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(split_indices(100, 0.001, 1).second.size(), 1u);
  EXPECT_NE(split_indices(1000, 0.3, 1).second, split_indices(1000, 0.3, 2).second);
  EXPECT_THROW(split_indices(1, 0.5, 1), Error);
  EXPECT_THROW(split_indices(10, 0.0, 1), Error);
  EXPECT_THROW(split_indices(10, 1.0, 1), Error);
  const auto [tr, te] = split(height_table({1, 2, 3, 4, 5}), 0.4, 9);
  EXPECT_EQ(tr.rows() + te.rows(), 5u);
}

TEST(Table, CsvRoundTripAndValidation) {
  testing::TempDir dir("table");
  FeatureTable t = height_table({1.25, 3.0000000000000004, 1e-300});
  write_csv(t, dir / "t.csv");
  const FeatureTable back = read_csv(dir / "t.csv", std::string(kHeightColumn));
  EXPECT_EQ(back, t);
  EXPECT_THROW(FeatureTable({"a", "a"}), Error);
  EXPECT_THROW(FeatureTable({"a"}, std::string("b")), Error);
  const double nan_row[] = {1, std::nan(""), 2};
  EXPECT_THROW(t.add_row("bad", nan_row), Error);
  const double short_row[] = {1};
  EXPECT_THROW(t.add_row("short", short_row), Error);
}

}  // namespace
}  // namespace bh
