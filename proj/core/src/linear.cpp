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

#include <Eigen/Dense>
#include <cmath>

#include "bh/error.hpp"
#include "bh/models.hpp"
#include "linalg.hpp"

namespace bh {
namespace detail {

LeastSquares least_squares(std::span<const double> x, std::span<const double> y,
                           std::size_t n, std::size_t p, double ridge) {
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const Matrix> X(x.data(), static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(p));
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(n));
  const Eigen::RowVectorXd mean_x = X.colwise().mean();
  const double mean_y = Y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - mean_x;
  const Eigen::VectorXd yc = Y.array() - mean_y;

  Eigen::MatrixXd gram = Xc.transpose() * Xc;
  const Eigen::VectorXd rhs = Xc.transpose() * yc;

  LeastSquares out;
  Eigen::VectorXd beta;
  if (p > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double hi = eig.eigenvalues().maxCoeff();
    const double lo = eig.eigenvalues().minCoeff();
    const bool singular = !(hi > 0.0) || lo <= hi * 1e-12;
    if (singular) {
      const double scale = gram.diagonal().mean() > 0.0 ? gram.diagonal().mean() : 1.0;
      gram.diagonal().array() += ridge * scale;
      out.used_ridge = true;
    }
    beta = gram.ldlt().solve(rhs);
  } else {
    beta = Eigen::VectorXd(0);
  }
  out.coef.assign(beta.data(), beta.data() + beta.size());
  out.intercept = mean_y - mean_x.dot(beta);
  return out;
}

}  // namespace detail

LinearModel::LinearModel(double intercept, std::vector<double> coef,
                         std::vector<std::string> features, bool used_ridge)
    : intercept_(intercept), coef_(std::move(coef)), used_ridge_(used_ridge) {
  features_ = std::move(features);
  if (coef_.size() != features_.size()) {
    throw Error(ErrorKind::kShape, "coefficient count does not match feature count");
  }
}

double LinearModel::predict_unchecked(std::span<const double> row) const {
  double v = intercept_;
  for (std::size_t j = 0; j < coef_.size(); ++j) v += coef_[j] * row[j];
  return v;
}

std::unique_ptr<LinearModel> fit_ols(const Dataset& data, double ridge) {
  if (data.n_rows <= data.n_features()) {
    throw Error(ErrorKind::kData, "OLS needs more rows than features (" +
                                      std::to_string(data.n_rows) + " rows, " +
                                      std::to_string(data.n_features()) + " features)");
  }
  auto ls = detail::least_squares(data.x, data.y, data.n_rows, data.n_features(), ridge);
  return std::make_unique<LinearModel>(ls.intercept, std::move(ls.coef), data.features,
                                       ls.used_ridge);
}

}  // namespace bh
