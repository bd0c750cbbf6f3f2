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

#include <fstream>
#include <sstream>

#include "bh/error.hpp"
#include "bh/models.hpp"

namespace bh {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "bhmodel/1";

json tree_to_json(const RegressionTree& tree) {
  json feature = json::array(), threshold = json::array(), left = json::array(),
       right = json::array(), value = json::array(), n = json::array();
  for (const auto& node : tree.nodes()) {
    feature.push_back(node.feature);
    threshold.push_back(node.threshold);
    left.push_back(node.left);
    right.push_back(node.right);
    value.push_back(node.value);
    n.push_back(node.n);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value},         {"n", n}};
}

RegressionTree tree_from_json(const json& doc) {
  const auto& feature = doc.at("feature");
  const std::size_t count = feature.size();
  for (const char* key : {"threshold", "left", "right", "value", "n"}) {
    if (doc.at(key).size() != count) {
      throw Error(ErrorKind::kFormat, std::string("tree array '") + key + "' has wrong length");
    }
  }
  if (count == 0) throw Error(ErrorKind::kFormat, "tree has no nodes");
  std::vector<TreeNode> nodes(count);
  for (std::size_t i = 0; i < count; ++i) {
    TreeNode& node = nodes[i];
    node.feature = feature[i].get<int>();
    node.threshold = doc["threshold"][i].get<double>();
    node.left = doc["left"][i].get<int>();
    node.right = doc["right"][i].get<int>();
    node.value = doc["value"][i].get<double>();
    node.n = doc["n"][i].get<std::size_t>();
    if (!node.is_leaf()) {
      const auto in_range = [&](int c) {
        return c > static_cast<int>(i) && c < static_cast<int>(count);
      };
      if (!in_range(node.left) || !in_range(node.right)) {
        throw Error(ErrorKind::kFormat, "tree node " + std::to_string(i) + " has bad children");
      }
    }
  }
  return RegressionTree(std::move(nodes));
}

json header(const Regressor& m) {
  return {{"format", kFormat}, {"kind", m.kind()}, {"features", m.feature_names()}};
}

void check_features(const RegressionTree& tree, std::size_t p) {
  for (const auto& node : tree.nodes()) {
    if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= p) {
      throw Error(ErrorKind::kFormat, "tree splits on an unknown feature index");
    }
  }
}

}  // namespace

json TreeModel::to_json() const {
  json doc = header(*this);
  doc["params"] = {{"mtry", params_.mtry},
                   {"min_leaf", params_.min_leaf},
                   {"max_depth", params_.max_depth}};
  doc["trees"] = json::array({tree_to_json(tree_)});
  return doc;
}

json ForestModel::to_json() const {
  json doc = header(*this);
  doc["params"] = {{"n_trees", params_.n_trees},   {"mtry", params_.mtry},
                   {"min_leaf", params_.min_leaf}, {"max_depth", params_.max_depth},
                   {"seed", params_.seed},         {"n_rows", n_rows_}};
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(tree_to_json(t));
  doc["trees"] = std::move(trees);
  doc["bootstrap"] = bootstrap_;
  return doc;
}

json BoostedModel::to_json() const {
  json doc = header(*this);
  doc["params"] = {{"n_stages", params_.n_stages},
                   {"shrinkage", params_.shrinkage},
                   {"max_depth", params_.max_depth},
                   {"min_leaf", params_.min_leaf}};
  doc["initial"] = initial_;
  json trees = json::array();
  for (const auto& t : stages_) trees.push_back(tree_to_json(t));
  doc["trees"] = std::move(trees);
  return doc;
}

json LinearModel::to_json() const {
  json doc = header(*this);
  doc["intercept"] = intercept_;
  doc["coef"] = coef_;
  doc["used_ridge"] = used_ridge_;
  return doc;
}

json KnnModel::to_json() const {
  json doc = header(*this);
  doc["params"] = {{"k", k_}};
  doc["mean"] = mean_;
  doc["scale"] = scale_;
  doc["x"] = x_std_;
  doc["y"] = y_;
  return doc;
}

json StackedModel::to_json() const {
  json doc = header(*this);
  json bases = json::array();
  for (const auto& b : bases_) bases.push_back(b->to_json());
  doc["bases"] = std::move(bases);
  doc["intercept"] = intercept_;
  doc["weights"] = weights_;
  doc["used_ridge"] = used_ridge_;
  return doc;
}

json model_to_json(const Regressor& model) { return model.to_json(); }

std::unique_ptr<Regressor> model_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != kFormat) {
      throw Error(ErrorKind::kFormat, "not a bhmodel/1 document");
    }
    const auto kind = doc.at("kind").get<std::string>();
    auto features = doc.at("features").get<std::vector<std::string>>();
    const std::size_t p = features.size();
    if (kind == "tree") {
      const auto& pj = doc.at("params");
      TreeParams params{pj.at("mtry").get<std::size_t>(), pj.at("min_leaf").get<std::size_t>(),
                        pj.at("max_depth").get<std::size_t>()};
      auto tree = tree_from_json(doc.at("trees").at(0));
      check_features(tree, p);
      return std::make_unique<TreeModel>(std::move(tree), params, std::move(features));
    }
    if (kind == "forest") {
      const auto& pj = doc.at("params");
      ForestParams params;
      params.n_trees = pj.at("n_trees").get<std::size_t>();
      params.mtry = pj.at("mtry").get<std::size_t>();
      params.min_leaf = pj.at("min_leaf").get<std::size_t>();
      params.max_depth = pj.at("max_depth").get<std::size_t>();
      params.seed = pj.at("seed").get<std::uint64_t>();
      const auto n_rows = pj.at("n_rows").get<std::size_t>();
      std::vector<RegressionTree> trees;
      for (const auto& t : doc.at("trees")) {
        trees.push_back(tree_from_json(t));
        check_features(trees.back(), p);
      }
      auto boot = doc.value("bootstrap", json::array())
                      .get<std::vector<std::vector<std::uint32_t>>>();
      return std::make_unique<ForestModel>(std::move(trees), std::move(boot), params,
                                           std::move(features), n_rows);
    }
    if (kind == "boosted") {
      const auto& pj = doc.at("params");
      BoostParams params{pj.at("n_stages").get<std::size_t>(), pj.at("shrinkage").get<double>(),
                         pj.at("max_depth").get<std::size_t>(),
                         pj.at("min_leaf").get<std::size_t>()};
      std::vector<RegressionTree> stages;
      for (const auto& t : doc.at("trees")) {
        stages.push_back(tree_from_json(t));
        check_features(stages.back(), p);
      }
      return std::make_unique<BoostedModel>(doc.at("initial").get<double>(), std::move(stages),
                                            params, std::move(features));
    }
    if (kind == "linear") {
      return std::make_unique<LinearModel>(doc.at("intercept").get<double>(),
                                           doc.at("coef").get<std::vector<double>>(),
                                           std::move(features), doc.at("used_ridge").get<bool>());
    }
    if (kind == "knn") {
      return std::make_unique<KnnModel>(
          doc.at("params").at("k").get<std::size_t>(), doc.at("mean").get<std::vector<double>>(),
          doc.at("scale").get<std::vector<double>>(), doc.at("x").get<std::vector<double>>(),
          doc.at("y").get<std::vector<double>>(), std::move(features));
    }
    if (kind == "stacked") {
      std::vector<std::unique_ptr<Regressor>> bases;
      for (const auto& b : doc.at("bases")) {
        bases.push_back(model_from_json(b));
        if (bases.back()->feature_names() != features) {
          throw Error(ErrorKind::kFormat, "stacked base features differ from the model's");
        }
      }
      return std::make_unique<StackedModel>(
          std::move(bases), doc.at("intercept").get<double>(),
          doc.at("weights").get<std::vector<double>>(), doc.at("used_ridge").get<bool>(),
          std::move(features));
    }
    throw Error(ErrorKind::kFormat, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const Regressor& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << model.to_json().dump();
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

std::unique_ptr<Regressor> load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace bh
