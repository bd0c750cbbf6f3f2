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

// bh: command line front end for the building-height pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "bh/error.hpp"
#include "bh/evaluation.hpp"
#include "bh/geometry.hpp"
#include "bh/pipeline.hpp"
#include "bh/synth.hpp"

namespace {

struct Overrides {
  std::string config;
  std::vector<std::string> stacks;
  std::string footprints, ndsm, regions, features_dir, out_dir;
  std::optional<double> buffer_m, window_m;
  std::optional<std::size_t> k, n_trees;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--stacks", o.stacks, "stack manifests");
  cmd->add_option("--footprints", o.footprints, "footprint GeoJSON");
  cmd->add_option("--ndsm", o.ndsm, "reference height raster");
  cmd->add_option("--regions", o.regions, "region GeoJSON");
  cmd->add_option("--features-dir", o.features_dir, "feature raster directory");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--buffer-m", o.buffer_m, "training buffer in meters (0 = none)");
  cmd->add_option("--window-m", o.window_m, "prediction window in meters (0 = none)");
  cmd->add_option("--k", o.k, "number of selected features");
  cmd->add_option("--n-trees", o.n_trees, "forest size");
  cmd->add_option("--seed", o.seed, "master seed");
}

bh::PipelineConfig resolve(const Overrides& o) {
  bh::PipelineConfig c = o.config.empty() ? bh::PipelineConfig{} : bh::PipelineConfig::load(o.config);
  if (!o.stacks.empty()) c.stacks = o.stacks;
  if (!o.footprints.empty()) c.footprints = o.footprints;
  if (!o.ndsm.empty()) c.ndsm = o.ndsm;
  if (!o.regions.empty()) c.regions = o.regions;
  if (!o.features_dir.empty()) c.features_dir = o.features_dir;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.buffer_m) c.buffer_m = *o.buffer_m;
  if (o.window_m) c.window_m = *o.window_m;
  if (o.k) c.selection.k = *o.k;
  if (o.n_trees) c.forest.n_trees = *o.n_trees;
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bh::Error(bh::ErrorKind::kIo, "cannot write " + path);
  out << text;
}

std::vector<std::optional<double>> heights_from_csv(const std::string& path,
                                                    const bh::FootprintSet& fps) {
  const auto table = bh::read_csv(path);
  const auto col = table.column_index(bh::kHeightColumn);
  std::map<std::string, double> by_id;
  for (std::size_t r = 0; r < table.rows(); ++r) by_id[table.ids()[r]] = table.value(r, col);
  std::vector<std::optional<double>> out;
  for (const auto& fp : fps) {
    auto it = by_id.find(fp.id);
    out.push_back(it == by_id.end() ? std::nullopt : std::optional<double>(it->second));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Building height estimation from multi-temporal raster stacks"};
  app.require_subcommand(1);

  Overrides o;

  // features
  auto* features = app.add_subcommand("features", "compute feature rasters");
  add_common(features, o);

  // train
  auto* train = app.add_subcommand("train", "assemble samples, select features, fit the model");
  add_common(train, o);

  // predict
  std::string model_path, output, dump_csv;
  bool unmasked = false;
  auto* predict = app.add_subcommand("predict", "predict a height raster");
  add_common(predict, o);
  predict->add_option("--model", model_path, "model JSON")->required();
  predict->add_option("--out", output, "output BHGR raster")->required();
  predict->add_flag("--unmasked", unmasked, "keep non-building pixels");
  predict->add_option("--dump-csv", dump_csv, "also write the raster as CSV");

  // evaluate
  std::string heights_path, truth_path, report_path;
  auto* evaluate = app.add_subcommand("evaluate", "per-building accuracy in log space");
  add_common(evaluate, o);
  evaluate->add_option("--heights", heights_path, "predicted height raster")->required();
  evaluate->add_option("--truth", truth_path, "CSV with id and height_m (instead of the nDSM)");
  evaluate->add_option("--report", report_path, "write the report JSON here");

  // compare
  std::string table_path, target = bh::kLogHeightColumn, compare_out;
  std::size_t n_splits = 30, compare_trees = 500;
  double test_fraction = 0.3;
  std::uint64_t compare_seed = 42;
  auto* compare = app.add_subcommand("compare", "repeated-split model comparison");
  compare->add_option("--table", table_path, "CSV table")->required();
  compare->add_option("--target", target, "target column");
  compare->add_option("--splits", n_splits, "number of random splits");
  compare->add_option("--test-fraction", test_fraction, "held-out fraction");
  compare->add_option("--n-trees", compare_trees, "trees for forest-based models");
  compare->add_option("--seed", compare_seed, "split seed");
  compare->add_option("--out", compare_out, "write the table CSV here");

  // sweep
  std::vector<double> candidates = {10, 30, 50, 80, 100};
  std::string sweep_out;
  double sweep_test = 0.3;
  auto* sweep = app.add_subcommand("sweep", "buffer/window sensitivity");
  add_common(sweep, o);
  sweep->add_option("--candidates", candidates, "settings in meters")->delimiter(',');
  sweep->add_option("--test-fraction", sweep_test, "held-out footprint fraction");
  sweep->add_option("--out", sweep_out, "write the table CSV here");

  // aggregate
  std::string buildings_csv, aggregate_out;
  auto* aggregate = app.add_subcommand("aggregate", "per-region building statistics");
  add_common(aggregate, o);
  aggregate->add_option("--heights", heights_path, "predicted height raster");
  aggregate->add_option("--buildings", buildings_csv, "CSV with id and height_m");
  aggregate->add_option("--out", aggregate_out, "write the table CSV here");

  // synth
  bh::SynthOptions so;
  std::string synth_dir;
  bool no_halo = false;
  auto* synth = app.add_subcommand("synth", "generate a synthetic city");
  synth->add_option("--out", synth_dir, "output directory")->required();
  synth->add_option("--seed", so.seed, "generator seed");
  synth->add_option("--size", so.size, "pixels per side");
  synth->add_option("--buildings", so.n_buildings, "number of buildings");
  synth->add_option("--dates", so.n_dates, "acquisitions per sensor");
  synth->add_flag("--no-halo", no_halo, "disable double-bounce halos");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*features) {
      const auto n = bh::cmd_features(resolve(o));
      std::cout << "wrote " << n << " feature rasters\n";
    } else if (*train) {
      const auto cfg = resolve(o);
      const auto result = bh::cmd_train(cfg);
      std::cout << "trained on " << result.training.table.rows() << " binned rows ("
                << result.assembly.kept << " buildings, " << result.assembly.dropped.size()
                << " dropped)\nfeatures:";
      for (const auto& f : result.features) std::cout << ' ' << f;
      std::cout << "\ntraining " << result.train_eval.to_json().dump() << '\n';
    } else if (*predict) {
      const auto cfg = resolve(o);
      const auto heights = bh::cmd_predict(cfg, model_path, output, unmasked);
      if (!dump_csv.empty()) bh::dump_raster_csv(heights, dump_csv);
      std::cout << "wrote " << output << " (" << heights.count_valid() << " pixels)\n";
    } else if (*evaluate) {
      const auto cfg = resolve(o);
      const auto fps = bh::read_footprints(cfg.footprints);
      const auto heights = bh::read_raster(heights_path);
      std::vector<std::optional<double>> reference;
      if (!truth_path.empty()) {
        reference = heights_from_csv(truth_path, fps);
      } else {
        std::optional<bh::RasterGrid> ndsm;
        if (!cfg.ndsm.empty()) ndsm = bh::read_raster(cfg.ndsm);
        reference = bh::reference_heights(fps, ndsm ? &*ndsm : nullptr);
      }
      const auto ev = bh::evaluate_buildings(bh::building_heights(heights, fps), reference);
      auto doc = ev.report.to_json();
      doc["missing_prediction"] = ev.missing_prediction;
      doc["missing_reference"] = ev.missing_reference;
      if (!report_path.empty()) write_file(report_path, doc.dump(2) + "\n");
      std::cout << doc.dump(2) << '\n';
    } else if (*compare) {
      auto table = bh::read_csv(table_path, target);
      const auto data = bh::to_dataset(table);
      const auto models = bh::default_comparison_models(compare_trees);
      const auto result = bh::compare_models(data, models, n_splits, test_fraction, compare_seed);
      if (!compare_out.empty()) write_file(compare_out, result.to_csv());
      std::cout << result.to_csv();
    } else if (*sweep) {
      const auto cfg = resolve(o);
      const auto fps = bh::read_footprints(cfg.footprints);
      std::optional<bh::RasterGrid> ndsm;
      if (!cfg.ndsm.empty()) ndsm = bh::read_raster(cfg.ndsm);
      const auto feats = bh::read_feature_dir(cfg.features_dir);
      const auto rows = bh::sweep(cfg, feats, fps, ndsm ? &*ndsm : nullptr, candidates, sweep_test);
      const auto csv = bh::sweep_to_csv(rows);
      if (!sweep_out.empty()) write_file(sweep_out, csv);
      std::cout << csv;
    } else if (*aggregate) {
      const auto cfg = resolve(o);
      if (cfg.regions.empty()) throw bh::Error(bh::ErrorKind::kConfig, "no regions configured");
      const auto fps = bh::read_footprints(cfg.footprints);
      const auto regions = bh::read_footprints(cfg.regions);
      std::vector<std::optional<double>> heights;
      if (!buildings_csv.empty()) {
        heights = heights_from_csv(buildings_csv, fps);
      } else if (!heights_path.empty()) {
        heights = bh::building_heights(bh::read_raster(heights_path), fps);
      } else {
        throw bh::Error(bh::ErrorKind::kConfig, "aggregate needs --heights or --buildings");
      }
      const auto csv = bh::regions_to_csv(bh::aggregate(heights, fps, regions));
      if (!aggregate_out.empty()) write_file(aggregate_out, csv);
      std::cout << csv;
    } else if (*synth) {
      so.halo = !no_halo;
      bh::write_synth(bh::synth_generate(so), synth_dir);
      std::cout << "wrote synthetic city to " << synth_dir << '\n';
    }
  } catch (const bh::Error& e) {
    std::cerr << "bh: " << bh::to_string(e.kind()) << ": " << e.what() << '\n';
    return bh::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "bh: internal error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
