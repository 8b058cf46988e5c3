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

#include <optional>
#include <span>
#include <vector>

#include "plod/gauss_model.hpp"
#include "plod/types.hpp"

namespace plod {

struct LocalizationConfig {
  double delta_max = 0.5;  // |rho_before| must exceed this
  double delta_min = 0.1;  // |rho_after| must fall below this
  /// Post-alarm samples used to estimate the post-outage covariance.
  Index window = 400;
  double reg = 1e-10;
  /// Subtract sigma_e2 * I from both covariances before computing partial
  /// correlations (noise deconvolution). Off by default.
  bool subtract_noise = false;

  /// Throws Error(kInvalidParameter) unless 0 <= delta_min < delta_max <= 1
  /// and window >= p + 2.
  void validate(Index p) const;
};

struct LocalizationReport {
  std::vector<BusPair> outaged;  // ascending (i, k), i < k
  Matrix correlations_before;    // |rho^-|, diagonal = 1
  Matrix correlations_after;     // |rho^+|, diagonal = 1
};

/// Fits the post-outage model from samples collected after the alarm.
/// Throws Error(kInsufficientSamples) when fewer than p + 2 rows are given.
GaussianModel estimate_post_covariance(const Eigen::Ref<const Matrix>& samples, double reg);

/// |conditional correlation| for every pair, mirrored, with a unit diagonal.
Matrix correlation_matrix(const Eigen::Ref<const Matrix>& cov);

/// Reports every candidate (i, k) with |rho^-_ik| > delta_max and
/// |rho^+_ik| < delta_min. All pairs are candidates when `candidates` is empty.
LocalizationReport localize(const Eigen::Ref<const Matrix>& cov_before,
                            const Eigen::Ref<const Matrix>& cov_after,
                            std::span<const BusPair> candidates,
                            const LocalizationConfig& cfg);

/// Returns cov - sigma_e2 * I, lifted back to positive definite by clipping
/// eigenvalues at `floor` when the subtraction overshoots.
Matrix remove_noise(const Eigen::Ref<const Matrix>& cov, double sigma_e2, double floor = 1e-12);

}  // namespace plod
