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

#ifndef BH_STATS_HPP_
#define BH_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bh {

// p-th percentile (0..100) of ascending-sorted values using linear
// interpolation at rank h = (n - 1) * p / 100. This one rule backs the
// percentile clip, the p10..p90 temporal statistics and residual quantiles.
template <class T>
double percentile_sorted(std::span<const T> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) return std::nan("");
  const double h = static_cast<double>(n - 1) * p / 100.0;
  const double lo = std::floor(h);
  const auto i = static_cast<std::size_t>(lo);
  if (i + 1 >= n) return static_cast<double>(sorted[n - 1]);
  const double a = static_cast<double>(sorted[i]);
  const double b = static_cast<double>(sorted[i + 1]);
  return a + (h - lo) * (b - a);
}

// Median of an unsorted buffer (reordered in place). Even counts average the
// two middle order statistics in double precision.
template <class T>
std::optional<double> median_inplace(std::span<T> values) {
  const std::size_t n = values.size();
  if (n == 0) return std::nullopt;
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = static_cast<double>(values[mid]);
  if (n % 2 == 1) return upper;
  const double lower =
      static_cast<double>(*std::max_element(values.begin(), values.begin() + mid));
  return 0.5 * (lower + upper);
}

template <class T>
std::optional<double> median_of(std::vector<T> values) {
  return median_inplace(std::span<T>(values));
}

}  // namespace bh

#endif  // BH_STATS_HPP_
