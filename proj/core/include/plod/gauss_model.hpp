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

#pragma once

#include <span>
#include <string>

#include <Eigen/Cholesky>

#include "plod/types.hpp"

namespace plod {

/// Unordered pair of observed bus indices used for conditional statistics.
/// Construction does not validate; the operations that consume a pair check
/// i != k and both indices against the covariance dimension.
struct BusPair {
  Index i = 0;
  Index k = 0;

  friend bool operator==(const BusPair&, const BusPair&) = default;
  friend auto operator<=>(const BusPair&, const BusPair&) = default;
};

/// Returns the pair with i < k.
BusPair ordered(BusPair pair);

/// Multivariate normal N(mean, cov) with a cached Cholesky factor.
///
/// Immutable after construction, so a single instance may be shared by any
/// number of detectors and threads. Every solve goes through the cached
/// factor; the class never forms an explicit inverse.
class GaussianModel {
 public:
  /// Factorizes cov + reg * I. When the first attempt fails a scale-aware
  /// jitter of 1e-9 * trace(cov) / p is added once more before giving up.
  ///
  /// Throws Error(kDimensionMismatch) for inconsistent shapes,
  /// Error(kInvalidParameter) for reg < 0 or non-finite input, and
  /// Error(kNotPositiveDefinite) when no factorization exists.
  GaussianModel(Vector mean, const Matrix& cov, double reg = 0.0);

  Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  /// Lower-triangular L with cov == L * L^T.
  Matrix chol() const { return llt_.matrixL(); }
  double log_det() const { return log_det_; }
  /// tr(cov^{-1}), computed once at construction.
  double trace_precision() const { return trace_precision_; }

  /// (x - mean)^T cov^{-1} (x - mean).
  double mahalanobis_sq(const Eigen::Ref<const Vector>& x) const;

  double log_density(const Eigen::Ref<const Vector>& x) const;

  /// cov^{-1} * rhs via the cached factor.
  Matrix solve(const Eigen::Ref<const Matrix>& rhs) const;

  /// L^{-1} * rhs (forward substitution only).
  Matrix whiten(const Eigen::Ref<const Matrix>& rhs) const;

  /// Same mean, covariance cov + sigma_e2 * I. The distribution of a sample
  /// after the additive randomizer has been applied.
  GaussianModel encrypted(double sigma_e2) const;

  /// Marginal over the listed coordinates, in the given order.
  GaussianModel marginal(std::span<const Index> coords) const;

  /// n rows of iid draws mean + L z, z ~ N(0, I).
  Matrix sample(Index n, Rng& rng) const;

  /// Sample mean and unbiased (n - 1) sample covariance plus reg * I.
  /// Throws Error(kInsufficientSamples) for fewer than two rows.
  static GaussianModel fit(const Eigen::Ref<const Matrix>& samples, double reg = 0.0);

 private:
  Vector mean_;
  Matrix cov_;
  Eigen::LLT<Matrix> llt_;
  double log_det_ = 0.0;
  double trace_precision_ = 0.0;
};

/// log f(x) - log g(x).
double log_likelihood_ratio(const GaussianModel& f, const GaussianModel& g,
                            const Eigen::Ref<const Vector>& x);

/// Closed-form D(f || g). Round-off negatives above -1e-12 are reported as 0.
double kl_divergence(const GaussianModel& f, const GaussianModel& g);

/// 2x2 Schur complement cov_II - cov_IK cov_KK^{-1} cov_KI for I = {i, k} and
/// K the remaining coordinates. Requires p >= 3.
Eigen::Matrix2d conditional_covariance(const Eigen::Ref<const Matrix>& cov, BusPair pair);

/// Off-diagonal of conditional_covariance normalized by its diagonal.
/// Throws Error(kDegenerateVariance) when a conditional variance < 1e-14.
double conditional_correlation(const Eigen::Ref<const Matrix>& cov, BusPair pair);

/// Cholesky of a symmetric matrix with the module's regularization policy:
/// try as given, then once more with 1e-9 * trace / p on the diagonal.
/// Throws Error(kNotPositiveDefinite) if both attempts fail. `what` names the
/// matrix in the error message; the diagonal shift used, if any, is written to
/// jitter_applied.
Eigen::LLT<Matrix> factorize_spd(const Matrix& sym, const std::string& what,
                                 double* jitter_applied = nullptr);

}  // namespace plod
