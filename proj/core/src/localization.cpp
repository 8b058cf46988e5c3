// Copyright 2026 The PLOD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "plod/localization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "plod/error.hpp"

namespace plod {

void LocalizationConfig::validate(Index p) const {
  if (!(delta_min >= 0.0 && delta_min < delta_max && delta_max <= 1.0)) {
    raise(ErrorCode::kInvalidParameter, "thresholds must satisfy 0 <= delta_min < delta_max <= 1");
  }
  if (window < p + 2) {
    std::ostringstream os;
    os << "localization window " << window << " is below p + 2 = " << p + 2;
    raise(ErrorCode::kInvalidParameter, os.str());
  }
  if (!(reg >= 0.0)) raise(ErrorCode::kInvalidParameter, "reg must be >= 0");
}

GaussianModel estimate_post_covariance(const Eigen::Ref<const Matrix>& samples, double reg) {
  const Index p = samples.cols();
  if (samples.rows() < p + 2) {
    std::ostringstream os;
    os << samples.rows() << " post-alarm samples, need at least " << p + 2;
    raise(ErrorCode::kInsufficientSamples, os.str());
  }
  return GaussianModel::fit(samples, reg);
}

Matrix correlation_matrix(const Eigen::Ref<const Matrix>& cov) {
  const Index p = cov.rows();
  if (cov.cols() != p) raise(ErrorCode::kDimensionMismatch, "covariance must be square");
  if (p < 3) raise(ErrorCode::kInvalidParameter, "correlation matrix needs p >= 3");
  Matrix out = Matrix::Identity(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index k = i + 1; k < p; ++k) {
      const double r = std::abs(conditional_correlation(cov, {i, k}));
      out(i, k) = r;
      out(k, i) = r;
    }
  }
  return out;
}

LocalizationReport localize(const Eigen::Ref<const Matrix>& cov_before,
                            const Eigen::Ref<const Matrix>& cov_after,
                            std::span<const BusPair> candidates,
                            const LocalizationConfig& cfg) {
  const Index p = cov_before.rows();
  if (cov_after.rows() != p || cov_after.cols() != p || cov_before.cols() != p) {
    raise(ErrorCode::kDimensionMismatch, "before/after covariances differ in shape");
  }
  if (!(cfg.delta_min >= 0.0 && cfg.delta_min < cfg.delta_max && cfg.delta_max <= 1.0)) {
    raise(ErrorCode::kInvalidParameter, "thresholds must satisfy 0 <= delta_min < delta_max <= 1");
  }
  LocalizationReport report;
  report.correlations_before = correlation_matrix(cov_before);
  report.correlations_after = correlation_matrix(cov_after);

  std::vector<BusPair> pairs;
  if (candidates.empty()) {
    for (Index i = 0; i < p; ++i) {
      for (Index k = i + 1; k < p; ++k) pairs.push_back({i, k});
    }
  } else {
    for (const BusPair& c : candidates) {
      const BusPair o = ordered(c);
      if (o.i == o.k || o.i < 0 || o.k >= p) {
        raise(ErrorCode::kInvalidParameter, "candidate pair out of range");
      }
      pairs.push_back(o);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  }
  for (const BusPair& pr : pairs) {
    const double before = report.correlations_before(pr.i, pr.k);
    const double after = report.correlations_after(pr.i, pr.k);
    if (before > cfg.delta_max && after < cfg.delta_min) report.outaged.push_back(pr);
  }
  return report;
}

Matrix remove_noise(const Eigen::Ref<const Matrix>& cov, double sigma_e2, double floor) {
  Matrix out = cov;
  out.diagonal().array() -= sigma_e2;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (out + out.transpose()));
  if (es.eigenvalues().minCoeff() >= floor) return out;
  const Vector clipped = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace plod
