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

#include "bh/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bh/error.hpp"

namespace bh {

FeatureTable::FeatureTable(std::vector<std::string> columns, std::optional<std::string> target)
    : columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    for (std::size_t j = i + 1; j < columns_.size(); ++j) {
      if (columns_[i] == columns_[j]) {
        throw Error(ErrorKind::kValidation, "duplicate column " + columns_[i]);
      }
    }
  }
  set_target(std::move(target));
}

void FeatureTable::add_row(std::string id, std::span<const double> values) {
  if (values.size() != columns_.size()) {
    throw Error(ErrorKind::kShape, "row '" + id + "' has " + std::to_string(values.size()) +
                                       " values for " + std::to_string(columns_.size()) +
                                       " columns");
  }
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (!std::isfinite(values[c])) {
      throw Error(ErrorKind::kValidation,
                  "row '" + id + "': non-finite value in column " + columns_[c]);
    }
  }
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), values.begin(), values.end());
}

std::vector<double> FeatureTable::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = value(r, c);
  return out;
}

std::vector<double> FeatureTable::column(std::string_view name) const {
  return column(column_index(name));
}

std::optional<std::size_t> FeatureTable::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t FeatureTable::column_index(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw Error(ErrorKind::kLookup, "no column named '" + std::string(name) + "'");
}

void FeatureTable::set_target(std::optional<std::string> name) {
  if (name && !find_column(*name)) {
    throw Error(ErrorKind::kLookup, "target column '" + *name + "' does not exist");
  }
  target_ = std::move(name);
}

std::size_t FeatureTable::target_index() const {
  if (!target_) throw Error(ErrorKind::kData, "table has no target column");
  return column_index(*target_);
}

std::vector<std::string> FeatureTable::feature_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) {
    if (!target_ || c != *target_) out.push_back(c);
  }
  return out;
}

FeatureTable FeatureTable::select_rows(std::span<const std::size_t> rows) const {
  FeatureTable out(columns_, target_);
  for (std::size_t r : rows) out.add_row(ids_.at(r), row(r));
  return out;
}

FeatureTable FeatureTable::select_columns(std::span<const std::string> names) const {
  std::vector<std::string> cols(names.begin(), names.end());
  std::vector<std::size_t> idx;
  for (const auto& n : cols) idx.push_back(column_index(n));
  if (target_ && !std::count(cols.begin(), cols.end(), *target_)) {
    cols.push_back(*target_);
    idx.push_back(target_index());
  }
  FeatureTable out(cols, target_);
  std::vector<double> buf(idx.size());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t k = 0; k < idx.size(); ++k) buf[k] = value(r, idx[k]);
    out.add_row(ids_[r], buf);
  }
  return out;
}

FeatureTable FeatureTable::rename_column(std::string_view from, const std::string& to) const {
  FeatureTable out = *this;
  const std::size_t i = column_index(from);
  if (find_column(to) && to != from) {
    throw Error(ErrorKind::kValidation, "column '" + to + "' already exists");
  }
  out.columns_[i] = to;
  if (target_ && *target_ == from) out.target_ = to;
  return out;
}

std::string to_csv(const FeatureTable& table) {
  std::ostringstream os;
  os << "id";
  for (const auto& c : table.columns()) os << ',' << c;
  os << '\n';
  char buf[40];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    os << table.ids()[r];
    for (double v : table.row(r)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
  return os.str();
}

void write_csv(const FeatureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << to_csv(table);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

FeatureTable parse_csv(const std::string& text, std::optional<std::string> target) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kFormat, "empty CSV");
  auto header = split_line(line);
  if (header.empty() || header[0] != "id") {
    throw Error(ErrorKind::kFormat, "CSV header must start with 'id'");
  }
  FeatureTable table(std::vector<std::string>(header.begin() + 1, header.end()),
                     std::move(target));
  std::vector<double> values(header.size() - 1);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::kFormat, "CSV line " + std::to_string(line_no) + " has " +
                                          std::to_string(cells.size()) + " cells");
    }
    for (std::size_t c = 1; c < cells.size(); ++c) {
      char* end = nullptr;
      values[c - 1] = std::strtod(cells[c].c_str(), &end);
      if (cells[c].empty() || end != cells[c].c_str() + cells[c].size()) {
        throw Error(ErrorKind::kFormat, "CSV line " + std::to_string(line_no) +
                                            ": not a number '" + cells[c] + "'");
      }
    }
    table.add_row(cells[0], values);
  }
  return table;
}

FeatureTable read_csv(const std::filesystem::path& path, std::optional<std::string> target) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_csv(ss.str(), std::move(target));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = features;
  out.n_rows = rows.size();
  out.x.reserve(rows.size() * n_features());
  out.y.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto src = row(r);
    out.x.insert(out.x.end(), src.begin(), src.end());
    out.y.push_back(y[r]);
  }
  return out;
}

Dataset to_dataset(const FeatureTable& table) {
  const std::size_t t = table.target_index();
  Dataset d;
  d.features = table.feature_names();
  d.n_rows = table.rows();
  d.x.reserve(d.n_rows * d.features.size());
  d.y.reserve(d.n_rows);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto row = table.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == t) {
        d.y.push_back(row[c]);
      } else {
        d.x.push_back(row[c]);
      }
    }
  }
  return d;
}

}  // namespace bh
