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

#ifndef BH_SRC_LINALG_HPP_
#define BH_SRC_LINALG_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace bh::detail {

struct LeastSquares {
  double intercept = 0.0;
  std::vector<double> coef;
  bool used_ridge = false;
};

// Fits y ~ b0 + X b on centered columns through the normal equations. When
// the centered Gram matrix is numerically singular, `ridge` (relative to its
// mean diagonal) is added to the diagonal. `x` is row-major n x p.
LeastSquares least_squares(std::span<const double> x, std::span<const double> y,
                           std::size_t n, std::size_t p, double ridge);

}  // namespace bh::detail

#endif  // BH_SRC_LINALG_HPP_
