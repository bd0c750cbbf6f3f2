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
#include <cstring>
#include <fstream>

#include "bh/error.hpp"
#include "bh/raster.hpp"
#include "test_util.hpp"

namespace bh {
namespace {

using testing::random_grid;
using testing::random_mask;
using testing::square_grid;

// Per-center crossing count, written independently of the library: a center
// is inside when an odd number of edges straddle its scanline (lower end
// inclusive) and cross strictly to its right.
bool oracle_inside(const Polygon& poly, double px, double py) {
  int crossings = 0;
  const auto& ring = poly.exterior;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Point& a = ring[j];
    const Point& b = ring[i];
    const bool a_above = a.y >= py;
    const bool b_above = b.y >= py;
    if (a_above == b_above) continue;
    const double t = (py - a.y) / (b.y - a.y);
    const double x = a.x + t * (b.x - a.x);
    if (px < x) ++crossings;
  }
  return crossings % 2 == 1;
}

float oracle_window_median(const RasterGrid& g, long row, long col, long r) {
  std::vector<float> v;
  for (long rr = row - r; rr <= row + r; ++rr) {
    for (long cc = col - r; cc <= col + r; ++cc) {
      if (rr < 0 || cc < 0 || rr >= static_cast<long>(g.rows()) ||
          cc >= static_cast<long>(g.cols())) {
        continue;
      }
      const float x = g.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
      if (!g.is_nodata(x)) v.push_back(x);
    }
  }
  if (v.empty()) return g.nodata();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return static_cast<float>(0.5 * (static_cast<double>(v[n / 2 - 1]) + v[n / 2]));
}

TEST(GridGeometry, ValidateRejectsEmptyAndBadPixelSize) {
  EXPECT_THROW(GridGeometry({0, 3, 0, 0, 1}).validate(), Error);
  EXPECT_THROW(GridGeometry({3, 3, 0, 0, 0}).validate(), Error);
  EXPECT_THROW(GridGeometry({3, 3, 0, 0, -1}).validate(), Error);
  EXPECT_NO_THROW(GridGeometry({3, 3, 0, 0, 1}).validate());
}

TEST(RasterGrid, RejectsNonFiniteValues) {
  RasterGrid g(square_grid(2));
  g.at(0, 0) = std::numeric_limits<float>::infinity();
  EXPECT_THROW(g.validate(), Error);
}

TEST(RasterIo, SinglePixelLayout) {
  RasterGrid g(GridGeometry{1, 1, 100.0, 200.0, 10.0}, -9999.0f);
  g.at(0, 0) = 7.5f;
  const auto bytes = encode_raster(g);
  ASSERT_EQ(bytes.size(), 4u + 2 + 4 + 4 + 8 + 8 + 8 + 4 + 4);
  EXPECT_EQ(std::memcmp(bytes.data(), "BHGR", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  float v;
  std::memcpy(&v, bytes.data() + bytes.size() - 4, 4);
  EXPECT_EQ(v, 7.5f);
  const RasterGrid back = decode_raster(bytes);
  EXPECT_EQ(back.geometry(), g.geometry());
  EXPECT_EQ(back.at(0, 0), 7.5f);
}

TEST(RasterIo, AllNodataRoundTrip) {
  RasterGrid g(square_grid(4), -1.0f);
  const RasterGrid back = decode_raster(encode_raster(g));
  EXPECT_EQ(back.count_valid(), 0u);
  EXPECT_EQ(back.nodata(), -1.0f);
}

TEST(RasterIo, RandomGridFileRoundTripIsBitExact) {
  testing::TempDir dir("raster_io");
  const RasterGrid g = random_grid(square_grid(256), 17, 0.05);
  write_raster(g, dir / "g.bhgr");
  const RasterGrid back = read_raster(dir / "g.bhgr");
  ASSERT_EQ(back.geometry(), g.geometry());
  ASSERT_EQ(std::memcmp(back.values().data(), g.values().data(), g.size() * 4), 0);
  write_raster(back, dir / "h.bhgr");
  std::ifstream a(dir / "g.bhgr", std::ios::binary), b(dir / "h.bhgr", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
}

TEST(RasterIo, FormatErrorsCarryOffsets) {
  RasterGrid g(square_grid(3));
  auto bytes = encode_raster(g);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  try {
    decode_raster(bad_magic);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }

  auto bad_version = bytes;
  bad_version[4] = 2;
  try {
    decode_raster(bad_version);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(decode_raster(truncated), FormatError);
  truncated.resize(10);
  EXPECT_THROW(decode_raster(truncated), FormatError);
}

TEST(RasterIo, NonFiniteValueIsValidationError) {
  RasterGrid g(square_grid(2));
  auto bytes = encode_raster(g);
  const float nan = std::nanf("");
  std::memcpy(bytes.data() + bytes.size() - 4, &nan, 4);
  try {
    decode_raster(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kValidation);
  }
}

TEST(Rasterize, SquareOverFourCenters) {
  const GridGeometry g{4, 4, 0.0, 40.0, 10.0};
  Polygon p{{{1, 21}, {19, 21}, {19, 39}, {1, 39}}, {}};
  const MaskGrid m = rasterize(p, g);
  EXPECT_EQ(m.count(), 4u);
  EXPECT_TRUE(m.test(0, 0) && m.test(0, 1) && m.test(1, 0) && m.test(1, 1));
}

TEST(Rasterize, HalfOpenBoundaryConvention) {
  // Edges pass exactly through centers (5, 35), (15, 25) etc.
  const GridGeometry g{4, 4, 0.0, 40.0, 10.0};
  Polygon p{{{5, 15}, {25, 15}, {25, 35}, {5, 35}}, {}};
  const MaskGrid m = rasterize(p, g);
  // Centers x in {5, 15}, y in {35, 25}: left and top edges are inside,
  // right (x = 25) and bottom (y = 15) are outside.
  MaskGrid expect(g);
  for (std::size_t r : {0u, 1u}) {
    for (std::size_t c : {0u, 1u}) expect.set(r, c);
  }
  EXPECT_EQ(m, expect);
}

TEST(Rasterize, SliverMissingCentersIsEmpty) {
  const GridGeometry g{4, 4, 0.0, 40.0, 10.0};
  Polygon p{{{0, 11}, {40, 11}, {40, 12}, {0, 12}}, {}};
  EXPECT_EQ(rasterize(p, g).count(), 0u);
}

TEST(Rasterize, OutsideGridIsEmpty) {
  const GridGeometry g{4, 4, 0.0, 40.0, 10.0};
  Polygon p{{{100, 100}, {120, 100}, {120, 120}}, {}};
  EXPECT_EQ(rasterize(p, g).count(), 0u);
}

TEST(Rasterize, MatchesPointInPolygonOracle) {
  const GridGeometry g = square_grid(50, 1.0);
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Polygon p = testing::random_convex(rng, uniform(rng, -5, 55), uniform(rng, -5, 55),
                                             uniform(rng, 1, 30), 3 + trial % 12);
    const MaskGrid m = rasterize(p, g);
    for (std::size_t r = 0; r < g.rows; ++r) {
      for (std::size_t c = 0; c < g.cols; ++c) {
        ASSERT_EQ(m.test(r, c), oracle_inside(p, g.center_x(c), g.center_y(r)))
            << "trial " << trial << " pixel " << r << "," << c;
      }
    }
  }
}

TEST(Rasterize, HolesAreExcluded) {
  const GridGeometry g = square_grid(10, 1.0);
  Polygon p{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}, {{{3, 3}, {7, 3}, {7, 7}, {3, 7}}}};
  const MaskGrid m = rasterize(p, g);
  EXPECT_EQ(m.count(), 100u - 16u);
  EXPECT_FALSE(m.test(5, 5));
}

TEST(Rasterize, DisjointPolygonsGiveDisjointMasks) {
  const GridGeometry g = square_grid(40, 1.0);
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const double split = uniform(rng, 10, 30);
    Polygon a{{{0, 0}, {split, 0}, {split, 40}, {0, 40}}, {}};
    Polygon b{{{split, 0}, {40, 0}, {40, 40}, {split, 40}}, {}};
    const MaskGrid ma = rasterize(a, g), mb = rasterize(b, g);
    for (std::size_t i = 0; i < ma.size(); ++i) ASSERT_FALSE(ma.test(i) && mb.test(i));
    EXPECT_EQ(ma.count() + mb.count(), g.size());
  }
}

TEST(WindowMedian, ConstantGridIsFixedPoint) {
  const RasterGrid g = RasterGrid::filled(square_grid(9), 2.0f);
  for (double w : {10.0, 30.0, 50.0, 90.0}) {
    const RasterGrid out = window_median(g, w);
    for (float v : out.values()) EXPECT_EQ(v, 2.0f);
  }
}

TEST(WindowMedian, SingleSpikeIsRemoved) {
  RasterGrid g = RasterGrid::filled(GridGeometry{5, 5, 0, 5, 1.0}, 1.0f);
  g.at(2, 2) = 100.0f;
  const RasterGrid out = window_median(g, 3.0);
  for (float v : out.values()) EXPECT_EQ(v, 1.0f);
}

TEST(WindowMedian, RadiusFromWindowWidth) {
  EXPECT_EQ(window_radius(50.0, 10.0), 2u);
  EXPECT_EQ(window_radius(10.0, 10.0), 0u);
  EXPECT_EQ(window_radius(30.0, 10.0), 1u);
  EXPECT_THROW(window_median(RasterGrid(square_grid(3)), 5.0), Error);
}

TEST(WindowMedian, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RasterGrid g = random_grid(square_grid(64), seed, seed % 2 ? 0.1 : 0.0);
    for (double w : {30.0, 50.0}) {
      const RasterGrid out = window_median(g, w);
      const long r = static_cast<long>(window_radius(w, 10.0));
      for (std::size_t row = 0; row < 64; ++row) {
        for (std::size_t col = 0; col < 64; ++col) {
          ASSERT_EQ(out.at(row, col),
                    oracle_window_median(g, static_cast<long>(row), static_cast<long>(col), r));
        }
      }
    }
  }
}

TEST(WindowMedian, AllNodataWindowStaysNodata) {
  RasterGrid g(square_grid(12));
  g.at(0, 0) = 3.0f;
  const RasterGrid out = window_median(g, 30.0);
  EXPECT_EQ(out.at(1, 1), 3.0f);
  EXPECT_TRUE(out.is_nodata(out.at(5, 5)));
}

TEST(WindowMedian, CommutesWithAddingConstant) {
  // Integer-valued floats so the shift is exact.
  RasterGrid g(square_grid(32));
  Rng rng(3);
  for (float& v : g.values()) v = static_cast<float>(uniform_index(rng, 1000));
  RasterGrid shifted = g;
  for (float& v : shifted.values()) v += 64.0f;
  const RasterGrid a = window_median(g, 50.0);
  const RasterGrid b = window_median(shifted, 50.0);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.values()[i] + 64.0f, b.values()[i]);
}

TEST(BufferMask, ZeroIsIdentity) {
  const MaskGrid m = random_mask(square_grid(20), 2, 0.1);
  EXPECT_EQ(buffer_mask(m, 0.0), m);
  EXPECT_THROW(buffer_mask(m, -1.0), Error);
}

TEST(BufferMask, OnePixelDistanceGivesFourNeighborhood) {
  MaskGrid m(square_grid(5));
  m.set(std::size_t{2}, std::size_t{2});
  const MaskGrid out = buffer_mask(m, 10.0);
  EXPECT_EQ(out.count(), 5u);
  EXPECT_TRUE(out.test(1, 2) && out.test(3, 2) && out.test(2, 1) && out.test(2, 3));
  EXPECT_FALSE(out.test(1, 1));
}

TEST(BufferMask, MatchesAllPairsOracle) {
  const GridGeometry g = square_grid(80);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const MaskGrid m = random_mask(g, seed, 0.01);
    const auto set = m.set_indices();
    for (double d : {50.0, 25.0, 14.2}) {
      const MaskGrid out = buffer_mask(m, d);
      for (std::size_t r = 0; r < g.rows; ++r) {
        for (std::size_t c = 0; c < g.cols; ++c) {
          bool near = false;
          for (std::size_t s : set) {
            const double dx = g.center_x(c) - g.center_x(s % g.cols);
            const double dy = g.center_y(r) - g.center_y(s / g.cols);
            if (dx * dx + dy * dy <= d * d) {
              near = true;
              break;
            }
          }
          ASSERT_EQ(out.test(r, c), near) << r << "," << c << " d=" << d;
        }
      }
    }
  }
}

TEST(BufferMask, IsMonotoneInDistance) {
  const MaskGrid m = random_mask(square_grid(40), 4, 0.02);
  MaskGrid prev = m;
  for (double d : {5.0, 10.0, 20.0, 35.0, 50.0}) {
    const MaskGrid cur = buffer_mask(m, d);
    for (std::size_t i = 0; i < cur.size(); ++i) ASSERT_TRUE(!prev.test(i) || cur.test(i));
    prev = cur;
  }
}

TEST(NearestSetPixel, MatchesBruteForceDistance) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const GridGeometry g{37, 53, 0, 0, 1.0};
    const MaskGrid m = random_mask(g, seed, seed == 1 ? 0.001 : 0.03);
    const auto near = nearest_set_pixel(m);
    const auto set = m.set_indices();
    for (std::size_t i = 0; i < g.size(); ++i) {
      long best = -1;
      for (std::size_t s : set) {
        const long dr = static_cast<long>(s / g.cols) - static_cast<long>(i / g.cols);
        const long dc = static_cast<long>(s % g.cols) - static_cast<long>(i % g.cols);
        const long d = dr * dr + dc * dc;
        if (best < 0 || d < best) best = d;
      }
      if (set.empty()) {
        ASSERT_EQ(near[i], -1);
        continue;
      }
      ASSERT_GE(near[i], 0);
      const auto p = static_cast<std::size_t>(near[i]);
      ASSERT_TRUE(m.test(p));
      const long dr = static_cast<long>(p / g.cols) - static_cast<long>(i / g.cols);
      const long dc = static_cast<long>(p % g.cols) - static_cast<long>(i % g.cols);
      ASSERT_EQ(dr * dr + dc * dc, best);
    }
  }
}

TEST(NearestSetPixel, EmptyMask) {
  const auto near = nearest_set_pixel(MaskGrid(square_grid(4)));
  for (long v : near) EXPECT_EQ(v, -1);
}

TEST(PercentileClip, HandComputedInterpolation) {
  RasterGrid g(GridGeometry{10, 10, 0, 10, 1.0});
  for (std::size_t i = 0; i < 100; ++i) g.values()[i] = static_cast<float>(i + 1);
  const MaskGrid m = percentile_clip_mask(g, 1.0, 99.0);
  EXPECT_EQ(m.count(), 98u);
  EXPECT_FALSE(m.test(0));
  EXPECT_FALSE(m.test(99));
  EXPECT_EQ(percentile_clip_mask(g, 0.0, 100.0).count(), 100u);
}

TEST(PercentileClip, ConstantGridAndNodata) {
  RasterGrid g = RasterGrid::filled(square_grid(5), 4.0f);
  g.at(0, 0) = g.nodata();
  EXPECT_EQ(percentile_clip_mask(g, 1.0, 99.0).count(), 24u);
  EXPECT_EQ(percentile_clip_mask(RasterGrid(square_grid(3)), 1, 99).count(), 0u);
  EXPECT_THROW(percentile_clip_mask(g, 50.0, 50.0), Error);
}

TEST(RasterStack, RejectsMisalignedLayers) {
  RasterStack s(square_grid(4));
  s.add({"B3", "2023-01-01"}, RasterGrid(square_grid(4)));
  EXPECT_THROW(s.add({"B3", "2023-02-01"}, RasterGrid(square_grid(5))), Error);
  EXPECT_THROW(s.add({"B3", "2022-12-01"}, RasterGrid(square_grid(4))), Error);
  EXPECT_EQ(s.layer_indices("B3").size(), 1u);
}

}  // namespace
}  // namespace bh
