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

// bh_acceptance: end-to-end acceptance checks. Prints one PASS/FAIL line per
// criterion and exits non-zero when any fails. Pass criterion numbers as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "bh/error.hpp"
#include "bh/evaluation.hpp"
#include "bh/explain.hpp"
#include "bh/geometry.hpp"
#include "bh/models.hpp"
#include "bh/pipeline.hpp"
#include "bh/raster.hpp"
#include "bh/rng.hpp"
#include "bh/sampling.hpp"
#include "bh/synth.hpp"

namespace {

using namespace bh;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- criteria 1 and 2: synthetic two-city analog -----------------------------

struct TwoCities {
  SynthCity train, test;
  FeatureRasters train_features, test_features;
};

const TwoCities& two_cities() {
  static const TwoCities cities = [] {
    TwoCities c;
    SynthOptions o;
    o.seed = 101;
    c.train = synth_generate(o);
    o.seed = 202;
    c.test = synth_generate(o);
    const auto recipe = FeatureRecipe::default_recipe();
    const std::vector<RasterStack> a = {c.train.optical, c.train.sar};
    const std::vector<RasterStack> b = {c.test.optical, c.test.sar};
    c.train_features = build_feature_rasters(a, recipe, &c.train.footprints);
    c.test_features = build_feature_rasters(b, recipe, &c.test.footprints);
    return c;
  }();
  return cities;
}

double held_out_r2(double setting, double* elapsed) {
  const auto t0 = std::chrono::steady_clock::now();
  const TwoCities& c = two_cities();
  PipelineConfig cfg;  // 500 trees, k = 13
  cfg.buffer_m = setting;
  cfg.window_m = setting;
  const auto result = train(cfg, c.train_features, c.train.footprints, &c.train.ndsm);
  const auto heights = predict_heights(*result.model, c.test_features, c.test.footprints, setting);
  const auto ev = evaluate_buildings(building_heights(heights, c.test.footprints),
                                     reference_heights(c.test.footprints, &c.test.ndsm));
  if (elapsed) *elapsed = seconds_since(t0);
  return ev.report.r2.value_or(-1e9);
}

std::optional<double> g_r2_50;

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  two_cities();
  double fit = 0;
  g_r2_50 = held_out_r2(50.0, &fit);
  const double total = seconds_since(t0);
  Outcome o;
  o.pass = *g_r2_50 >= 0.70 && total <= 300.0;
  o.detail = "held-out R2 " + fmt("%.4f", *g_r2_50) + " (>= 0.70), " + fmt("%.1f s", total) +
             " (<= 300 s)";
  return o;
}

Outcome criterion2() {
  if (!g_r2_50) g_r2_50 = held_out_r2(50.0, nullptr);
  const double r0 = held_out_r2(0.0, nullptr);
  Outcome o;
  o.pass = *g_r2_50 - r0 >= 0.03;
  o.detail = "R2 at 50 m " + fmt("%.4f", *g_r2_50) + " vs 0 m " + fmt("%.4f", r0) + ", gain " +
             fmt("%.4f", *g_r2_50 - r0) + " (>= 0.03)";
  return o;
}

// --- criterion 3: model comparison ------------------------------------------------

Outcome criterion3() {
  const auto data = to_dataset(friedman_table(1000, 7));
  const auto models = default_comparison_models(200);
  const auto table = compare_models(data, models, 30, 0.3, 11);
  double rf = 0, lm = 0, tree = 0;
  std::string detail = "medians:";
  for (const auto& row : table.rows) {
    if (row.model == "RF") rf = row.summary.median;
    if (row.model == "LM") lm = row.summary.median;
    if (row.model == "RPART") tree = row.summary.median;
    detail += " " + row.model + fmt(" %.3f", row.summary.median);
  }
  return {rf > lm && rf > tree, detail};
}

// --- criterion 4: exact oracles ---------------------------------------------------

GridGeometry grid(std::size_t n, double ps) {
  return GridGeometry{n, n, 0.0, static_cast<double>(n) * ps, ps};
}

bool window_oracle(std::string& why) {
  Rng rng(401);
  for (int trial = 0; trial < 6; ++trial) {
    const GridGeometry g = grid(64, 10.0);
    RasterGrid in(g);
    for (float& v : in.values()) {
      v = uniform01(rng) < 0.1 ? in.nodata() : static_cast<float>(uniform(rng, 0, 100));
    }
    const double window = 10.0 * static_cast<double>(1 + 2 * (trial % 3) + 2);  // 30, 50, 70
    const auto fast = window_median(in, window);
    const long r = static_cast<long>(std::floor(window / 10.0 / 2.0));
    std::vector<double> buf;
    for (long y = 0; y < 64; ++y) {
      for (long x = 0; x < 64; ++x) {
        buf.clear();
        for (long yy = y - r; yy <= y + r; ++yy) {
          for (long xx = x - r; xx <= x + r; ++xx) {
            if (yy < 0 || xx < 0 || yy >= 64 || xx >= 64) continue;
            const float v = in.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
            if (v != in.nodata()) buf.push_back(v);
          }
        }
        float want = in.nodata();
        if (!buf.empty()) {
          std::sort(buf.begin(), buf.end());
          const std::size_t m = buf.size() / 2;
          want = static_cast<float>(buf.size() % 2 ? buf[m] : 0.5 * (buf[m - 1] + buf[m]));
        }
        if (fast.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) != want) {
          why = "window_median differs at " + std::to_string(y) + "," + std::to_string(x);
          return false;
        }
      }
    }
  }
  return true;
}

bool inside(const Polygon& poly, double px, double py) {
  bool in = false;
  auto ring_cross = [&](const Ring& ring) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const Point& a = ring[j];
      const Point& b = ring[i];
      if ((a.y >= py) == (b.y >= py)) continue;
      const double x = a.x + (py - a.y) / (b.y - a.y) * (b.x - a.x);
      if (px < x) in = !in;
    }
  };
  ring_cross(poly.exterior);
  for (const auto& h : poly.holes) ring_cross(h);
  return in;
}

bool rasterize_oracle(std::string& why) {
  Rng rng(402);
  const GridGeometry g = grid(60, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double cx = uniform(rng, -5, 65), cy = uniform(rng, -5, 65), rad = uniform(rng, 2, 30);
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 12);
    std::vector<double> ang(n);
    for (double& a : ang) a = uniform(rng, 0, 2 * 3.141592653589793);
    std::sort(ang.begin(), ang.end());
    Polygon p;
    for (double a : ang) p.exterior.push_back({cx + rad * std::cos(a), cy + rad * std::sin(a)});
    const auto m = rasterize(p, g);
    for (std::size_t r = 0; r < g.rows; ++r) {
      for (std::size_t c = 0; c < g.cols; ++c) {
        if (m.test(r, c) != inside(p, g.center_x(c), g.center_y(r))) {
          why = "rasterize differs in trial " + std::to_string(trial);
          return false;
        }
      }
    }
  }
  return true;
}

bool buffer_oracle(std::string& why) {
  Rng rng(403);
  const GridGeometry g = grid(80, 10.0);
  for (double d : {10.0, 25.0, 50.0, 73.0}) {
    MaskGrid m(g);
    std::vector<std::pair<long, long>> set;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (uniform01(rng) < 0.01) {
        m.set(i);
        set.emplace_back(static_cast<long>(i / 80), static_cast<long>(i % 80));
      }
    }
    const auto fast = buffer_mask(m, d);
    for (long r = 0; r < 80; ++r) {
      for (long c = 0; c < 80; ++c) {
        bool want = false;
        for (auto [sr, sc] : set) {
          const double dy = static_cast<double>(r - sr) * 10.0, dx = static_cast<double>(c - sc) * 10.0;
          if (dy * dy + dx * dx <= d * d) {
            want = true;
            break;
          }
        }
        if (fast.test(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) != want) {
          why = "buffer_mask differs at distance " + fmt("%g", d);
          return false;
        }
      }
    }
  }
  return true;
}

Polygon rect(double cx, double cy, double len, double wid, double ang) {
  const double c = std::cos(ang), s = std::sin(ang);
  Polygon p;
  for (auto [u, v] : {std::pair{-len / 2, -wid / 2}, {len / 2, -wid / 2}, {len / 2, wid / 2}, {-len / 2, wid / 2}}) {
    p.exterior.push_back({cx + u * c - v * s, cy + u * s + v * c});
  }
  return p;
}

bool near_oracle(std::string& why) {
  Rng rng(404);
  for (int trial = 0; trial < 3; ++trial) {
    FootprintSet fps;
    for (int i = 0; i < 200; ++i) {
      const double side = uniform(rng, 2, 15);
      fps.push_back({"f" + std::to_string(i),
                     rect(uniform(rng, 0, 1500), uniform(rng, 0, 1500), side,
                          side * uniform(rng, 0.5, 1.0), uniform(rng, 0, 3.14)),
                     std::nullopt});
    }
    const auto fast = near_distances(fps);
    for (std::size_t i = 0; i < fps.size(); ++i) {
      double best = 1e300;
      const Ring& a = fps[i].polygon.exterior;
      for (std::size_t j = 0; j < fps.size(); ++j) {
        if (j == i) continue;
        const Ring& b = fps[j].polygon.exterior;
        for (std::size_t e = 0; e < a.size(); ++e) {
          for (std::size_t f = 0; f < b.size(); ++f) {
            best = std::min(best, segment_distance(a[e], a[(e + 1) % a.size()], b[f],
                                                   b[(f + 1) % b.size()]));
          }
        }
        if (inside(fps[j].polygon, a[0].x, a[0].y) ||
            inside(fps[i].polygon, b[0].x, b[0].y)) {
          best = 0.0;
        }
      }
      if (!fast[i] || *fast[i] != best) {
        why = "near_distance differs for footprint " + std::to_string(i);
        return false;
      }
    }
  }
  return true;
}

// Exhaustive CART on integer targets: first maximal gain in (feature,
// threshold) order.
bool same_as_exhaustive(const Dataset& d, const RegressionTree& t, std::size_t node,
                        const std::vector<std::size_t>& rows, std::size_t min_leaf) {
  const TreeNode& n = t.nodes()[node];
  double sum = 0, lo = 1e300, hi = -1e300;
  for (auto r : rows) {
    sum += d.y[r];
    lo = std::min(lo, d.y[r]);
    hi = std::max(hi, d.y[r]);
  }
  if (n.n != rows.size() || n.value != sum / static_cast<double>(rows.size())) return false;
  int best_f = -1;
  double best_t = 0, best_g = 0;
  if (rows.size() >= 2 * min_leaf && lo != hi) {
    for (std::size_t f = 0; f < d.n_features(); ++f) {
      std::vector<double> xs;
      for (auto r : rows) xs.push_back(d.at(r, f));
      std::sort(xs.begin(), xs.end());
      xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        double sl = 0;
        std::size_t nl = 0;
        for (auto r : rows) {
          if (d.at(r, f) <= xs[k]) {
            sl += d.y[r];
            ++nl;
          }
        }
        const std::size_t nr = rows.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double g = split_gain(sl, nl, sum - sl, nr);
        if (g > best_g) {
          best_g = g;
          best_f = static_cast<int>(f);
          best_t = split_threshold(xs[k], xs[k + 1]);
        }
      }
    }
  }
  if (n.feature != best_f) return false;
  if (best_f < 0) return true;
  if (n.threshold != best_t) return false;
  std::vector<std::size_t> l, r;
  for (auto i : rows) (d.at(i, static_cast<std::size_t>(best_f)) <= best_t ? l : r).push_back(i);
  return same_as_exhaustive(d, t, static_cast<std::size_t>(n.left), l, min_leaf) &&
         same_as_exhaustive(d, t, static_cast<std::size_t>(n.right), r, min_leaf);
}

bool tree_oracle(std::string& why) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Rng rng(sub_seed(405, seed));
    const std::size_t n = 20 + static_cast<std::size_t>(seed * 37 % 181);
    const std::size_t p = 1 + seed % 5;
    Dataset d;
    for (std::size_t f = 0; f < p; ++f) d.features.push_back("x" + std::to_string(f));
    d.n_rows = n;
    for (std::size_t i = 0; i < n * p; ++i) d.x.push_back(static_cast<double>(uniform_index(rng, 30)));
    for (std::size_t i = 0; i < n; ++i) {
      d.y.push_back(static_cast<double>(uniform_index(rng, 50)) + 3.0 * d.x[i * p]);
    }
    for (std::size_t min_leaf : {1, 5}) {
      const auto t = fit_tree(d, TreeParams{0, min_leaf, 0});
      std::vector<std::size_t> rows(n);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      if (!same_as_exhaustive(d, t, 0, rows, min_leaf)) {
        why = "fit_tree differs for seed " + std::to_string(seed);
        return false;
      }
    }
  }
  return true;
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string why;
  const bool ok = window_oracle(why) && rasterize_oracle(why) && buffer_oracle(why) &&
                  near_oracle(why) && tree_oracle(why);
  const double s = seconds_since(t0);
  Outcome o;
  o.pass = ok && s <= 60.0;
  o.detail = ok ? "window, rasterize, buffer, near distance and tree oracles equal, " + fmt("%.1f s", s)
                : why;
  return o;
}

// --- criterion 5: minimum bounding rectangle --------------------------------------

Outcome criterion5() {
  Rng rng(501);
  double worst_excess = 0, worst_gap = 0, worst_rot = 0;
  constexpr double kDeg = 3.141592653589793 / 180.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial % 20);
    const double rad = uniform(rng, 5, 60);
    std::vector<double> ang(n);
    for (double& a : ang) a = uniform(rng, 0, 2 * 3.141592653589793);
    std::sort(ang.begin(), ang.end());
    Polygon p;
    for (double a : ang) p.exterior.push_back({rad * std::cos(a), rad * std::sin(a)});
    const auto m = min_bounding_rect(p);
    const double area = m.width_m * m.length_m;
    double scan_min = 1e300;
    for (int k = 0; k < 1800; ++k) {
      const double t = k * 0.1 * kDeg, c = std::cos(t), s = std::sin(t);
      double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300;
      for (const auto& q : p.exterior) {
        const double u = q.x * c + q.y * s, v = -q.x * s + q.y * c;
        u0 = std::min(u0, u);
        u1 = std::max(u1, u);
        v0 = std::min(v0, v);
        v1 = std::max(v1, v);
      }
      scan_min = std::min(scan_min, (u1 - u0) * (v1 - v0));
    }
    worst_excess = std::max(worst_excess, area / scan_min - 1.0);
    worst_gap = std::max(worst_gap, 1.0 - area / scan_min);

    const double theta = uniform(rng, 0, 360);
    const double c = std::cos(theta * kDeg), s = std::sin(theta * kDeg);
    Polygon r = p;
    for (auto& q : r.exterior) q = {q.x * c - q.y * s, q.x * s + q.y * c};
    const auto mr = min_bounding_rect(r);
    double diff = std::fmod(mr.orientation_deg - m.orientation_deg - theta, 180.0);
    if (diff < -90) diff += 180;
    if (diff > 90) diff -= 180;
    // Squares have two equally valid long sides.
    if (std::abs(m.length_m - m.width_m) < 1e-6 * m.length_m) {
      diff = std::fmod(diff + 90.0, 90.0);
      if (diff > 45) diff -= 90;
    }
    worst_rot = std::max(worst_rot, std::abs(diff));
  }
  Outcome o;
  o.pass = worst_excess <= 1e-12 && worst_gap <= 0.005 && worst_rot <= 1e-9;
  o.detail = "area vs 0.1 deg scan: max excess " + fmt("%.2e", worst_excess) + ", max shortfall " +
             fmt("%.2e", worst_gap) + " (<= 0.5%), rotation error " + fmt("%.2e deg", worst_rot);
  return o;
}

// --- criterion 6: Shapley axioms ---------------------------------------------------

Dataset random_dataset(std::size_t n, std::size_t p, std::uint64_t seed,
                       const std::function<double(std::span<const double>)>& f) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t j = 0; j < p; ++j) d.features.push_back("x" + std::to_string(j));
  d.n_rows = n;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(p);
    for (double& v : row) v = uniform01(rng);
    d.x.insert(d.x.end(), row.begin(), row.end());
    d.y.push_back(f(row) + 0.1 * normal(rng));
  }
  return d;
}

Outcome criterion6() {
  // Forest on 8 features; x7 is constant in training, so no tree uses it.
  auto train_set = random_dataset(400, 8, 601, [](std::span<const double> x) {
    return 10 * std::sin(3.14159 * x[0] * x[1]) + 5 * x[2] + 3 * x[3] * x[4];
  });
  for (std::size_t i = 0; i < train_set.n_rows; ++i) train_set.x[i * 8 + 7] = 0.5;
  ForestParams fp;
  fp.n_trees = 50;
  fp.seed = 602;
  const auto forest = fit_forest(train_set, fp);
  const auto rows = random_dataset(50, 8, 603, [](std::span<const double>) { return 0.0; });
  const auto background = random_dataset(30, 8, 604, [](std::span<const double>) { return 0.0; });
  ShapleyOptions opt;
  double eff = 0, dummy = 0;
  for (std::size_t r = 0; r < rows.n_rows; ++r) {
    const auto res = shapley_values(*forest, rows.row(r), background, opt);
    const double sum = std::accumulate(res.phi.begin(), res.phi.end(), 0.0);
    eff = std::max(eff, std::abs(sum - (forest->predict(rows.row(r)) - res.base)));
    dummy = std::max(dummy, std::abs(res.phi[7]));
  }

  // Additive model: phi_j = beta_j (x_j - mean background x_j).
  const auto lin_data = random_dataset(200, 6, 605, [](std::span<const double> x) {
    return 2 * x[0] - 3 * x[1] + 0.5 * x[2] + 4 * x[3] - x[4] + 1.5 * x[5];
  });
  const auto lm = fit_ols(lin_data);
  std::vector<double> bg_mean(6, 0.0);
  const auto lin_bg = random_dataset(25, 6, 606, [](std::span<const double>) { return 0.0; });
  for (std::size_t r = 0; r < lin_bg.n_rows; ++r) {
    for (std::size_t j = 0; j < 6; ++j) bg_mean[j] += lin_bg.at(r, j) / 25.0;
  }
  double additive = 0;
  for (std::size_t r = 0; r < 50; ++r) {
    const auto row = rows.row(r).subspan(0, 6);
    const auto res = shapley_values(*lm, row, lin_bg, opt);
    for (std::size_t j = 0; j < 6; ++j) {
      additive = std::max(additive, std::abs(res.phi[j] - lm->coefficients()[j] * (row[j] - bg_mean[j])));
    }
  }
  Outcome o;
  o.pass = eff < 1e-9 && dummy == 0.0 && additive < 1e-9;
  o.detail = "efficiency " + fmt("%.1e", eff) + ", dummy " + fmt("%.1e", dummy) + ", additive " +
             fmt("%.1e", additive);
  return o;
}

// --- criterion 7: permutation importance -------------------------------------------

Outcome criterion7() {
  auto f = [](std::span<const double> x) { return 10 * x[0] + 4 * std::sin(3 * x[1]) + 2 * x[2]; };
  // x3 is pure noise; x4 is constant in training and therefore unused.
  auto train_set = random_dataset(600, 5, 701, f);
  for (std::size_t i = 0; i < train_set.n_rows; ++i) train_set.x[i * 5 + 4] = 0.0;
  const auto holdout = random_dataset(600, 5, 702, f);
  ForestParams fp;
  fp.n_trees = 200;
  fp.seed = 703;
  const auto forest = fit_forest(train_set, fp);
  const auto pred = forest->predict_all(holdout);
  const double e_orig = mse(holdout.y, pred);
  const auto fi = permutation_importance(*forest, holdout, 20, 704);
  const bool unused_zero = fi.scores[4] == 0.0;
  const double noise_ratio = std::abs(fi.scores[3]) / e_orig;

  int first = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    const auto d = random_dataset(200, 5, sub_seed(710, run), f);
    ForestParams small;
    small.n_trees = 50;
    small.seed = sub_seed(712, run);
    const auto m = fit_forest(d, small);
    const auto rep = permutation_importance(*m, d, 5, sub_seed(711, run));
    if (rep.rank[0] == 1) ++first;
  }
  Outcome o;
  o.pass = unused_zero && noise_ratio <= 0.02 && first >= 95;
  o.detail = std::string("unused FI ") + (unused_zero ? "0" : fmt("%.3g", fi.scores[4])) +
             ", noise |FI|/e_orig " + fmt("%.4f", noise_ratio) + " (<= 0.02), informative first in " +
             std::to_string(first) + "/100";
  return o;
}

// --- criterion 8: binning -------------------------------------------------------------

Outcome criterion8() {
  Rng rng(801);
  FeatureTable t({"a", kHeightColumn}, std::string(kHeightColumn));
  for (int i = 0; i < 20000; ++i) {
    const double h = std::clamp(std::exp(2.3 + 0.9 * normal(rng)), 1.0, 550.0);
    const std::vector<double> row = {uniform01(rng), h};
    t.add_row("r" + std::to_string(i), row);
  }
  const auto binned = prepare_training(t, 1.0, 99.0, 0.01);
  const auto members = log_transform_target(clip_target(t, 1.0, 99.0));
  const auto y = members.target_values();
  const auto ti = binned.table.target_index();
  std::size_t bad = 0;
  for (std::size_t r = 0; r < binned.table.rows(); ++r) {
    std::vector<double> in_bin;
    for (double v : y) {
      if (static_cast<long>(std::floor(v / 0.01)) == binned.bin_index[r]) in_bin.push_back(v);
    }
    std::sort(in_bin.begin(), in_bin.end());
    const std::size_t m = in_bin.size() / 2;
    const double med = in_bin.empty() ? std::nan("")
                       : in_bin.size() % 2 ? in_bin[m] : 0.5 * (in_bin[m - 1] + in_bin[m]);
    if (binned.table.value(r, ti) != med || in_bin.size() != binned.source_count[r]) ++bad;
  }
  Outcome o;
  o.pass = binned.table.rows() <= 670 && bad == 0;
  o.detail = std::to_string(binned.table.rows()) + " bins (<= 670), " + std::to_string(bad) +
             " bin medians differ from recomputation";
  return o;
}

// --- criterion 9: OOB band ----------------------------------------------------------------

Outcome criterion9() {
  int inside_band = 0;
  std::string ratios;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto train_set = to_dataset(friedman_table(1000, sub_seed(901, s)));
    const auto holdout = to_dataset(friedman_table(1000, sub_seed(902, s)));
    ForestParams fp;
    fp.n_trees = 500;
    fp.seed = sub_seed(903, s);
    const auto forest = fit_forest(train_set, fp);
    const double oob = oob_error(*forest, train_set).mse;
    const double hold = mse(holdout.y, forest->predict_all(holdout));
    const double ratio = oob / hold;
    if (ratio >= 0.8 && ratio <= 1.2) ++inside_band;
    ratios += fmt(" %.3f", ratio);
  }
  return {inside_band >= 8, std::to_string(inside_band) + "/10 seeds in [0.8, 1.2]; ratios" + ratios};
}

// --- criterion 10: determinism and persistence ------------------------------------

Outcome criterion10() {
  SynthOptions so;
  so.seed = 31;
  so.size = 96;
  so.n_buildings = 60;
  so.n_cores = 1;
  const auto city = synth_generate(so);
  const std::vector<RasterStack> stacks = {city.optical, city.sar};
  const auto features = build_feature_rasters(stacks, FeatureRecipe::default_recipe(), &city.footprints);
  PipelineConfig cfg;
  cfg.forest.n_trees = 60;
  cfg.selection.k = 10;
  cfg.seed = 77;

  const auto dir = std::filesystem::temp_directory_path() / ("bh_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto a = train(cfg, features, city.footprints, &city.ndsm);
  const auto b = train(cfg, features, city.footprints, &city.ndsm);
  save_model(*a.model, dir / "a.json");
  save_model(*b.model, dir / "b.json");
  const auto slurp = [](const std::filesystem::path& p) {
    std::FILE* fh = std::fopen(p.c_str(), "rb");
    std::string s;
    if (!fh) return s;
    char buf[65536];
    std::size_t k;
    while ((k = std::fread(buf, 1, sizeof buf, fh)) > 0) s.append(buf, k);
    std::fclose(fh);
    return s;
  };
  const bool same_model = slurp(dir / "a.json") == slurp(dir / "b.json");

  const auto ha = predict_heights(*a.model, features, city.footprints, 50.0);
  const auto hb = predict_heights(*b.model, features, city.footprints, 50.0);
  write_raster(ha, dir / "a.bhgr");
  write_raster(hb, dir / "b.bhgr");
  const bool same_raster = slurp(dir / "a.bhgr") == slurp(dir / "b.bhgr");

  const auto loaded = load_model(dir / "a.json");
  const auto data = to_dataset(a.training.table.select_columns(a.features));
  const auto p0 = a.model->predict_all(data);
  const auto p1 = loaded->predict_all(data);
  const bool same_pred = p0 == p1;
  const auto hl = predict_heights(*loaded, features, city.footprints, 50.0);
  const bool same_loaded_raster = encode_raster(hl) == encode_raster(ha);
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);

  Outcome o;
  o.pass = same_model && same_raster && same_pred && same_loaded_raster;
  o.detail = std::string("model JSON ") + (same_model ? "identical" : "differs") + ", BHGR " +
             (same_raster ? "identical" : "differs") + ", reloaded predictions " +
             (same_pred && same_loaded_raster ? "bit-exact" : "differ");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d: %s  %s  [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
