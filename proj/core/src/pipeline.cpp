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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "bh/error.hpp"
#include "bh/geometry.hpp"
#include "bh/pipeline.hpp"

namespace bh {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {
    "stacks",   "footprints", "ndsm",   "regions", "features_dir", "out_dir", "recipe",
    "buffer_m", "window_m",   "clip",   "bin_step", "forest",      "selection", "seed"};
const std::set<std::string> kForestKeys = {"n_trees", "mtry", "min_leaf", "max_depth"};
const std::set<std::string> kSelectionKeys = {"enabled",   "k",         "weights",
                                              "forced",    "repeats",   "shap_rows",
                                              "shap_background", "shap_samples"};

void check_keys(const json& obj, const std::set<std::string>& allowed, const char* where) {
  if (!obj.is_object()) throw Error(ErrorKind::kConfig, std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorKind::kConfig, std::string("unknown key '") + key + "' in " + where);
    }
  }
}

template <class T>
void read_key(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

double log_height(double h) { return std::log(std::max(h, 1.0)); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "nodata"; }

}  // namespace

// --- config ---------------------------------------------------------------------

json PipelineConfig::to_json() const {
  return {{"stacks", stacks},
          {"footprints", footprints},
          {"ndsm", ndsm},
          {"regions", regions},
          {"features_dir", features_dir},
          {"out_dir", out_dir},
          {"recipe", recipe},
          {"buffer_m", buffer_m},
          {"window_m", window_m},
          {"clip", {clip_lo, clip_hi}},
          {"bin_step", bin_step},
          {"forest",
           {{"n_trees", forest.n_trees},
            {"mtry", forest.mtry},
            {"min_leaf", forest.min_leaf},
            {"max_depth", forest.max_depth}}},
          {"selection",
           {{"enabled", selection.enabled},
            {"k", selection.k},
            {"weights", selection.weights},
            {"forced", selection.forced},
            {"repeats", selection.repeats},
            {"shap_rows", selection.shap_rows},
            {"shap_background", selection.shap_background},
            {"shap_samples", selection.shap_samples}}},
          {"seed", seed}};
}

PipelineConfig PipelineConfig::from_json(const json& doc) {
  PipelineConfig c;
  try {
    check_keys(doc, kConfigKeys, "config");
    read_key(doc, "stacks", c.stacks);
    read_key(doc, "footprints", c.footprints);
    read_key(doc, "ndsm", c.ndsm);
    read_key(doc, "regions", c.regions);
    read_key(doc, "features_dir", c.features_dir);
    read_key(doc, "out_dir", c.out_dir);
    read_key(doc, "recipe", c.recipe);
    read_key(doc, "buffer_m", c.buffer_m);
    read_key(doc, "window_m", c.window_m);
    if (doc.contains("clip")) {
      const auto clip = doc.at("clip").get<std::vector<double>>();
      if (clip.size() != 2) throw Error(ErrorKind::kConfig, "clip must be [lo, hi]");
      c.clip_lo = clip[0];
      c.clip_hi = clip[1];
    }
    read_key(doc, "bin_step", c.bin_step);
    if (doc.contains("forest")) {
      const auto& f = doc.at("forest");
      check_keys(f, kForestKeys, "forest");
      read_key(f, "n_trees", c.forest.n_trees);
      read_key(f, "mtry", c.forest.mtry);
      read_key(f, "min_leaf", c.forest.min_leaf);
      read_key(f, "max_depth", c.forest.max_depth);
    }
    if (doc.contains("selection")) {
      const auto& s = doc.at("selection");
      check_keys(s, kSelectionKeys, "selection");
      read_key(s, "enabled", c.selection.enabled);
      read_key(s, "k", c.selection.k);
      read_key(s, "weights", c.selection.weights);
      read_key(s, "forced", c.selection.forced);
      read_key(s, "repeats", c.selection.repeats);
      read_key(s, "shap_rows", c.selection.shap_rows);
      read_key(s, "shap_background", c.selection.shap_background);
      read_key(s, "shap_samples", c.selection.shap_samples);
    }
    read_key(doc, "seed", c.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  PipelineConfig c = from_json(doc);
  // Relative paths are taken relative to the config file.
  const auto base = path.parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal();
  };
  for (auto& s : c.stacks) resolve(s);
  resolve(c.footprints);
  resolve(c.ndsm);
  resolve(c.regions);
  resolve(c.features_dir);
  resolve(c.out_dir);
  return c;
}

void PipelineConfig::save(const std::filesystem::path& path) const {
  write_text(path, to_json().dump(2) + "\n");
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kConfig, msg); };
  if (!(buffer_m >= 0.0)) fail("buffer_m must be >= 0");
  if (!(window_m >= 0.0)) fail("window_m must be >= 0");
  if (!(clip_lo >= 0.0 && clip_lo < clip_hi && clip_hi <= 100.0)) {
    fail("clip must satisfy 0 <= lo < hi <= 100");
  }
  if (!(bin_step > 0.0)) fail("bin_step must be > 0");
  if (forest.n_trees == 0) fail("forest.n_trees must be >= 1");
  if (forest.min_leaf == 0) fail("forest.min_leaf must be >= 1");
  if (selection.k == 0) fail("selection.k must be >= 1");
  if (selection.repeats == 0) fail("selection.repeats must be >= 1");
  if (selection.shap_rows == 0 || selection.shap_background == 0 || selection.shap_samples == 0) {
    fail("selection Shapley sizes must be >= 1");
  }
  if (!selection.weights.empty() && selection.weights.size() != 3) {
    fail("selection.weights needs 3 entries (rf_vi, permutation, shapley)");
  }
}

FeatureRecipe PipelineConfig::feature_recipe() const {
  return recipe.empty() ? FeatureRecipe::default_recipe() : FeatureRecipe::from_names(recipe);
}

// --- features -----------------------------------------------------------------

std::vector<RasterStack> load_stacks(const PipelineConfig& config) {
  if (config.stacks.empty()) throw Error(ErrorKind::kConfig, "no stack manifests configured");
  std::vector<RasterStack> stacks;
  for (const auto& s : config.stacks) stacks.push_back(read_stack(s));
  return stacks;
}

namespace {

FootprintSet load_footprints(const PipelineConfig& config) {
  if (config.footprints.empty()) throw Error(ErrorKind::kConfig, "no footprints configured");
  return read_footprints(config.footprints);
}

std::optional<RasterGrid> load_ndsm(const PipelineConfig& config) {
  if (config.ndsm.empty()) return std::nullopt;
  return read_raster(config.ndsm);
}

}  // namespace

FeatureRasters compute_features(const PipelineConfig& config) {
  const auto stacks = run_stage("features", [&] { return load_stacks(config); });
  const auto recipe = config.feature_recipe();
  FootprintSet footprints;
  if (!recipe.geometry_features.empty()) {
    footprints = run_stage("features", [&] { return load_footprints(config); });
  }
  return run_stage("features", [&] {
    return build_feature_rasters(stacks, recipe,
                                 recipe.geometry_features.empty() ? nullptr : &footprints);
  });
}

std::size_t cmd_features(const PipelineConfig& config) {
  const auto features = compute_features(config);
  run_stage("features", [&] {
    write_feature_dir(features, config.features_dir);
    return 0;
  });
  return features.size();
}

// --- training -----------------------------------------------------------------

TrainResult train(const PipelineConfig& config, const FeatureRasters& features,
                  const FootprintSet& footprints, const RasterGrid* ndsm) {
  config.validate();
  TrainResult out;
  out.samples = run_stage("assemble", [&] {
    return assemble_samples(features, footprints, AssemblyOptions{config.buffer_m, ndsm},
                            &out.assembly);
  });
  out.training = run_stage("prepare", [&] {
    return prepare_training(out.samples, config.clip_lo, config.clip_hi, config.bin_step);
  });
  const Dataset full = to_dataset(out.training.table);

  ForestParams fp = config.forest;
  fp.seed = named_seed(config.seed, "train");
  const std::size_t p = full.n_features();
  const auto& sel = config.selection;

  out.features = full.features;
  if (sel.enabled && sel.k < p) {
    const auto full_model = run_stage("importance", [&] { return fit_forest(full, fp); });
    run_stage("importance", [&] {
      const std::uint64_t s = named_seed(config.seed, "importance");
      out.reports.push_back(rf_importance_report(*full_model, full, sel.repeats, sub_seed(s, 0)));
      out.reports.push_back(permutation_importance(*full_model, full, sel.repeats, sub_seed(s, 1)));
      const Dataset rows = sample_rows(full, sel.shap_rows, sub_seed(s, 2));
      const Dataset background = sample_rows(full, sel.shap_background, sub_seed(s, 3));
      ShapleyOptions so;
      so.mode = p <= kMaxExactFeatures ? ShapleyMode::kExact : ShapleyMode::kSampled;
      so.samples = sel.shap_samples;
      so.seed = sub_seed(s, 4);
      out.reports.push_back(shapley_global(*full_model, rows, background, so));
      return 0;
    });
    out.selection = run_stage("selection", [&] {
      return consensus_select(out.reports, sel.k, sel.weights, sel.forced);
    });
    const std::set<std::string> chosen(out.selection->selected.begin(),
                                       out.selection->selected.end());
    out.features.clear();
    for (const auto& f : full.features) {
      if (chosen.count(f)) out.features.push_back(f);
    }
  }
  const Dataset data = out.features.size() == p
                           ? full
                           : to_dataset(out.training.table.select_columns(out.features));
  out.model = run_stage("train", [&]() -> std::unique_ptr<Regressor> {
    return fit_forest(data, fp);
  });
  const auto pred = out.model->predict_all(data);
  out.train_eval = evaluate(data.y, pred, unit_bin_edges(data.y));
  return out;
}

TrainResult cmd_train(const PipelineConfig& config) {
  const auto footprints = run_stage("load", [&] { return load_footprints(config); });
  const auto ndsm = run_stage("load", [&] { return load_ndsm(config); });
  const auto recipe = config.feature_recipe();
  const auto names = recipe.feature_names();
  const auto features = run_stage("load", [&] {
    return read_feature_dir(config.features_dir, config.recipe.empty() ? std::span<const std::string>{}
                                                                       : std::span<const std::string>(names));
  });
  TrainResult result = train(config, features, footprints, ndsm ? &*ndsm : nullptr);

  run_stage("write", [&] {
    const std::filesystem::path dir = config.out_dir;
    std::filesystem::create_directories(dir);
    save_model(*result.model, dir / "model.json");
    write_csv(result.samples, dir / "samples.csv");
    write_csv(result.training.table, dir / "training.csv");
    write_text(dir / "train_eval.json", result.train_eval.to_json().dump(2) + "\n");
    json dropped = json::array();
    for (const auto& d : result.assembly.dropped) {
      dropped.push_back({{"id", d.id}, {"reason", to_string(d.reason)}, {"detail", d.detail}});
    }
    write_text(dir / "assembly.json",
               json{{"kept", result.assembly.kept}, {"dropped", dropped}}.dump(2) + "\n");
    for (const auto& r : result.reports) write_report_csv(r, dir / ("importance_" + r.method + ".csv"));
    if (result.selection) write_selection(*result.selection, dir / "selection.json");
    return 0;
  });
  return result;
}

// --- prediction -----------------------------------------------------------------

RasterGrid predict_heights(const Regressor& model, const FeatureRasters& features,
                           const FootprintSet& footprints, double window_m, bool unmasked) {
  std::vector<const RasterGrid*> grids;
  std::string missing;
  for (const auto& name : model.feature_names()) {
    const RasterGrid* g = features.find(name);
    if (g == nullptr) {
      missing += " " + name;
    } else {
      grids.push_back(g);
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kLookup, "feature rasters missing for model features:" + missing);
  }
  if (grids.empty()) throw Error(ErrorKind::kData, "model has no features");
  const GridGeometry& geom = grids.front()->geometry();
  for (const auto* g : grids) require_aligned(geom, g->geometry(), "feature rasters");
  if (!(window_m >= 0.0)) throw Error(ErrorKind::kParameter, "window_m must be >= 0");

  MaskGrid buildings(geom);
  for (const auto& fp : footprints) {
    for (auto p : rasterize(fp.polygon, geom).set_indices()) buildings.set(p);
  }

  // Pixels whose prediction can reach the output.
  const std::size_t radius = window_m > 0.0 ? window_radius(window_m, geom.pixel_size) : 0;
  std::vector<std::uint8_t> needed(geom.size(), unmasked ? 1 : 0);
  if (!unmasked) {
    const auto rows = static_cast<long>(geom.rows), cols = static_cast<long>(geom.cols);
    const auto r = static_cast<long>(radius);
    for (auto p : buildings.set_indices()) {
      const auto pr = static_cast<long>(p / geom.cols), pc = static_cast<long>(p % geom.cols);
      for (long rr = std::max(0L, pr - r); rr <= std::min(rows - 1, pr + r); ++rr) {
        for (long cc = std::max(0L, pc - r); cc <= std::min(cols - 1, pc + r); ++cc) {
          needed[static_cast<std::size_t>(rr * cols + cc)] = 1;
        }
      }
    }
  }

  RasterGrid pred(geom);
  std::vector<double> row(grids.size());
  for (std::size_t p = 0; p < geom.size(); ++p) {
    if (!needed[p]) continue;
    bool ok = true;
    for (std::size_t f = 0; f < grids.size() && ok; ++f) {
      ok = grids[f]->is_valid(p);
      if (ok) row[f] = grids[f]->values()[p];
    }
    if (ok) pred.values()[p] = static_cast<float>(model.predict(row));
  }
  if (window_m > 0.0) pred = window_median(pred, window_m);

  RasterGrid out(geom);
  for (std::size_t p = 0; p < geom.size(); ++p) {
    if (!unmasked && !buildings.test(p)) continue;
    if (!pred.is_valid(p)) continue;
    out.values()[p] = static_cast<float>(std::exp(static_cast<double>(pred.values()[p])));
  }
  return out;
}

RasterGrid cmd_predict(const PipelineConfig& config, const std::filesystem::path& model_path,
                       const std::filesystem::path& output, bool unmasked) {
  const auto model = run_stage("load", [&] { return load_model(model_path); });
  const auto features = run_stage("load", [&] {
    return read_feature_dir(config.features_dir, model->feature_names());
  });
  const auto footprints = run_stage("load", [&] { return load_footprints(config); });
  auto heights = run_stage("predict", [&] {
    return predict_heights(*model, features, footprints, config.window_m, unmasked);
  });
  run_stage("write", [&] {
    if (output.has_parent_path()) std::filesystem::create_directories(output.parent_path());
    write_raster(heights, output);
    return 0;
  });
  return heights;
}

std::vector<std::optional<double>> building_heights(const RasterGrid& heights,
                                                    const FootprintSet& footprints) {
  std::vector<std::optional<double>> out;
  out.reserve(footprints.size());
  for (const auto& fp : footprints) {
    out.push_back(zonal_median(heights, rasterize(fp.polygon, heights.geometry())));
  }
  return out;
}

// --- evaluation -----------------------------------------------------------------

BuildingEvaluation evaluate_buildings(std::span<const std::optional<double>> predicted,
                                      std::span<const std::optional<double>> reference) {
  if (predicted.size() != reference.size()) {
    throw Error(ErrorKind::kShape, "prediction and reference counts differ");
  }
  BuildingEvaluation ev;
  std::vector<double> y, yhat;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!reference[i]) {
      ++ev.missing_reference;
      continue;
    }
    if (!predicted[i]) {
      ++ev.missing_prediction;
      continue;
    }
    y.push_back(log_height(*reference[i]));
    yhat.push_back(log_height(*predicted[i]));
  }
  ev.report = evaluate(y, yhat, unit_bin_edges(y));
  return ev;
}

std::vector<std::optional<double>> reference_heights(const FootprintSet& footprints,
                                                     const RasterGrid* ndsm) {
  std::vector<std::optional<double>> out;
  out.reserve(footprints.size());
  for (const auto& fp : footprints) {
    out.push_back(ndsm ? reference_height(*ndsm, fp).height_m : fp.ref_height_m);
  }
  return out;
}

// --- comparison and sweeps ------------------------------------------------------

std::vector<NamedSpec> default_comparison_models(std::size_t n_trees) {
  std::vector<NamedSpec> out;
  ModelSpec s;
  s.forest.n_trees = n_trees;
  s.kind = "tree";
  out.push_back({"RPART", s});
  s.kind = "ols";
  out.push_back({"LM", s});
  s.kind = "forest";
  out.push_back({"RF", s});
  s.kind = "knn";
  out.push_back({"KNN", s});
  s.kind = "boosted";
  out.push_back({"Boosting", s});
  s.kind = "stacked";
  out.push_back({"Stacking", s});
  return out;
}

std::vector<SweepRow> sweep(const PipelineConfig& config, const FeatureRasters& features,
                            const FootprintSet& footprints, const RasterGrid* ndsm,
                            std::span<const double> candidates, double test_fraction) {
  if (candidates.empty()) throw Error(ErrorKind::kParameter, "no sweep candidates");
  const auto [train_idx, test_idx] =
      split_indices(footprints.size(), test_fraction, named_seed(config.seed, "split"));
  FootprintSet train_fps, test_fps;
  for (auto i : train_idx) train_fps.push_back(footprints[i]);
  for (auto i : test_idx) test_fps.push_back(footprints[i]);
  const auto reference = reference_heights(test_fps, ndsm);

  std::vector<SweepRow> rows;
  for (double c : candidates) {
    SweepRow row;
    row.setting = c;
    try {
      PipelineConfig cfg = config;
      cfg.buffer_m = c;
      cfg.window_m = c;
      const auto result = train(cfg, features, train_fps, ndsm);
      const auto heights = predict_heights(*result.model, features, footprints, c);
      row.report = evaluate_buildings(building_heights(heights, test_fps), reference).report;
    } catch (const Error& e) {
      row.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    const double ra = a.report && a.report->r2 ? *a.report->r2 : -std::numeric_limits<double>::infinity();
    const double rb = b.report && b.report->r2 ? *b.report->r2 : -std::numeric_limits<double>::infinity();
    return ra > rb;
  });
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out = "rank,buffer_m,window_m,r2,mse,n,error\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out += std::to_string(i + 1) + "," + fmt(r.setting) + "," + fmt(r.setting) + ",";
    if (r.report) {
      out += fmt_opt(r.report->r2) + "," + fmt(r.report->mse) + "," + std::to_string(r.report->n);
    } else {
      out += ",,";
    }
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out += "," + err + "\n";
  }
  return out;
}

// --- aggregation ------------------------------------------------------------------

std::vector<RegionStats> aggregate(std::span<const std::optional<double>> heights,
                                   const FootprintSet& footprints, const FootprintSet& regions) {
  if (heights.size() != footprints.size()) {
    throw Error(ErrorKind::kShape, "one height per footprint is required");
  }
  std::vector<Point> centers;
  std::vector<double> areas;
  for (const auto& fp : footprints) {
    centers.push_back(centroid(fp.polygon));
    areas.push_back(polygon_area(fp.polygon));
  }
  std::vector<RegionStats> out;
  for (const auto& region : regions) {
    RegionStats s;
    s.id = region.id;
    s.land_area_m2 = polygon_area(region.polygon);
    double sum = 0.0;
    std::size_t with_height = 0;
    for (std::size_t i = 0; i < footprints.size(); ++i) {
      if (!contains(region.polygon, centers[i])) continue;
      ++s.count;
      s.footprint_area_m2 += areas[i];
      if (heights[i]) {
        sum += *heights[i];
        ++with_height;
        s.max_height_m = std::max(s.max_height_m.value_or(*heights[i]), *heights[i]);
      }
    }
    if (with_height > 0) s.mean_height_m = sum / static_cast<double>(with_height);
    s.footprint_ratio = s.land_area_m2 > 0.0 ? s.footprint_area_m2 / s.land_area_m2 : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

std::string regions_to_csv(std::span<const RegionStats> stats) {
  std::string out =
      "region,count,mean_height_m,max_height_m,footprint_area_m2,land_area_m2,footprint_ratio\n";
  for (const auto& s : stats) {
    out += s.id + "," + std::to_string(s.count) + "," + fmt_opt(s.mean_height_m) + "," +
           fmt_opt(s.max_height_m) + "," + fmt(s.footprint_area_m2) + "," + fmt(s.land_area_m2) +
           "," + fmt(s.footprint_ratio) + "\n";
  }
  return out;
}

}  // namespace bh
