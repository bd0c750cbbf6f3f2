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
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "bh/error.hpp"
#include "bh/explain.hpp"

namespace bh {

ConsensusRanking consensus_select(std::span<const ImportanceReport> reports, std::size_t k,
                                  std::span<const double> weights,
                                  std::span<const std::string> forced) {
  if (reports.empty()) throw Error(ErrorKind::kParameter, "consensus needs at least one report");
  if (!weights.empty() && weights.size() != reports.size()) {
    throw Error(ErrorKind::kParameter, "need one weight per report");
  }
  for (const auto& r : reports) r.validate();

  const auto& features = reports.front().features;
  const std::size_t n = features.size();
  const std::set<std::string> base(features.begin(), features.end());
  if (base.size() != n) throw Error(ErrorKind::kValidation, "duplicate feature names in report");
  for (const auto& r : reports) {
    const std::set<std::string> other(r.features.begin(), r.features.end());
    if (other != base) {
      std::vector<std::string> diff;
      std::set_symmetric_difference(base.begin(), base.end(), other.begin(), other.end(),
                                    std::back_inserter(diff));
      std::string msg = "reports cover different features:";
      for (const auto& d : diff) msg += " " + d;
      throw Error(ErrorKind::kValidation, msg);
    }
  }
  if (k == 0 || k > n) {
    throw Error(ErrorKind::kParameter, "k must lie in [1, " + std::to_string(n) + "]");
  }
  if (forced.size() > k) throw Error(ErrorKind::kParameter, "more forced features than k");

  ConsensusRanking out;
  out.k = k;
  out.features = features;
  out.fused.assign(n, 0.0);
  out.mean_rank.assign(n, 0.0);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[features[i]] = i;

  for (std::size_t m = 0; m < reports.size(); ++m) {
    const auto& r = reports[m];
    const double w = weights.empty() ? 1.0 : weights[m];
    out.methods.push_back(r.method);
    out.weights.push_back(w);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = index.at(r.features[i]);
      out.fused[at] += w * static_cast<double>(n - r.rank[i] + 1);
      out.mean_rank[at] += static_cast<double>(r.rank[i]);
    }
  }
  for (auto& v : out.mean_rank) v /= static_cast<double>(reports.size());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out.fused[a] != out.fused[b]) return out.fused[a] > out.fused[b];
    if (out.mean_rank[a] != out.mean_rank[b]) return out.mean_rank[a] < out.mean_rank[b];
    return features[a] < features[b];
  });
  for (auto i : order) out.order.push_back(features[i]);

  std::set<std::string> chosen;
  for (const auto& f : forced) {
    if (!base.count(f)) throw Error(ErrorKind::kLookup, "forced feature '" + f + "' is unknown");
    if (chosen.insert(f).second) {
      out.forced.push_back(f);
      out.selected.push_back(f);
    }
  }
  for (const auto& f : out.order) {
    if (out.selected.size() == k) break;
    if (chosen.insert(f).second) out.selected.push_back(f);
  }
  return out;
}

void write_report_csv(const ImportanceReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "feature,score,rank\n";
  char buf[64];
  for (std::size_t i = 0; i < report.features.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", report.scores[i]);
    out << report.features[i] << ',' << buf << ',' << report.rank[i] << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

ImportanceReport read_report_csv(const std::filesystem::path& path, std::string method) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "feature,score,rank") {
    throw Error(ErrorKind::kFormat, path.string() + ": bad report header");
  }
  ImportanceReport r;
  r.method = std::move(method);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw Error(ErrorKind::kFormat, path.string() + ": bad report line '" + line + "'");
    }
    try {
      r.features.push_back(line.substr(0, a));
      r.scores.push_back(std::stod(line.substr(a + 1, b - a - 1)));
      r.rank.push_back(std::stoul(line.substr(b + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kFormat, path.string() + ": bad report line '" + line + "'");
    }
  }
  r.validate();
  return r;
}

nlohmann::json selection_to_json(const ConsensusRanking& ranking) {
  return {{"methods", ranking.methods}, {"weights", ranking.weights},
          {"k", ranking.k},             {"selected", ranking.selected},
          {"forced", ranking.forced},   {"order", ranking.order}};
}

void write_selection(const ConsensusRanking& ranking, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << selection_to_json(ranking).dump(2) << '\n';
}

std::vector<std::string> read_selection(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    return doc.at("selected").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

}  // namespace bh
