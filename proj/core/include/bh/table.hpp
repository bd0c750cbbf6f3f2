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

#ifndef BH_TABLE_HPP_
#define BH_TABLE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bh {

// Rectangular named-column sample matrix with row ids and an optional
// designated target column. Cells are always finite.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::vector<std::string> columns,
                        std::optional<std::string> target = std::nullopt);

  // Throws kShape on width mismatch and kValidation on non-finite cells.
  void add_row(std::string id, std::span<const double> values);

  std::size_t rows() const { return ids_.size(); }
  std::size_t cols() const { return columns_.size(); }
  std::span<const std::string> columns() const { return columns_; }
  std::span<const std::string> ids() const { return ids_; }
  std::span<const double> values() const { return values_; }

  double value(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols(), cols());
  }
  std::vector<double> column(std::size_t c) const;
  std::vector<double> column(std::string_view name) const;

  std::optional<std::size_t> find_column(std::string_view name) const;
  // Throws kLookup when absent.
  std::size_t column_index(std::string_view name) const;

  const std::optional<std::string>& target() const { return target_; }
  void set_target(std::optional<std::string> name);
  std::size_t target_index() const;  // throws kData when no target is set
  std::vector<double> target_values() const { return column(target_index()); }

  // All columns except the target, in table order.
  std::vector<std::string> feature_names() const;

  FeatureTable select_rows(std::span<const std::size_t> rows) const;
  // Keeps `names` (in that order) plus the target column, which goes last.
  FeatureTable select_columns(std::span<const std::string> names) const;
  FeatureTable rename_column(std::string_view from, const std::string& to) const;

  bool operator==(const FeatureTable&) const = default;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::optional<std::string> target_;
};

// Header row; first column "id"; '.' decimal; values printed with enough
// digits to round-trip.
void write_csv(const FeatureTable& table, const std::filesystem::path& path);
std::string to_csv(const FeatureTable& table);
FeatureTable read_csv(const std::filesystem::path& path,
                      std::optional<std::string> target = std::nullopt);
FeatureTable parse_csv(const std::string& text, std::optional<std::string> target = std::nullopt);

// Dense training view of a table with a target: features in table order.
struct Dataset {
  std::vector<std::string> features;
  std::size_t n_rows = 0;
  std::vector<double> x;  // row-major, n_rows x features.size()
  std::vector<double> y;

  std::size_t n_features() const { return features.size(); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(x).subspan(r * n_features(), n_features());
  }
  double at(std::size_t r, std::size_t f) const { return x[r * n_features() + f]; }

  Dataset subset(std::span<const std::size_t> rows) const;
};

Dataset to_dataset(const FeatureTable& table);

}  // namespace bh

#endif  // BH_TABLE_HPP_
