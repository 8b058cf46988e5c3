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
#include <vector>

#include "plod/gauss_model.hpp"
#include "plod/types.hpp"

namespace plod {

/// Additive Gaussian randomizer applied independently by every meter:
/// x_enc = x + e, e ~ N(0, sigma_e2 * I).
class PrivacyMechanism {
 public:
  static constexpr double kDefaultSigmaE2 = 4e-2;
  static constexpr double kDefaultSensitivity = 1.1;

  /// Throws Error(kInvalidParameter) unless both arguments are positive.
  explicit PrivacyMechanism(double sigma_e2 = kDefaultSigmaE2,
                            double sensitivity = kDefaultSensitivity);

  double sigma_e2() const { return sigma_e2_; }
  double sigma_e() const;
  double sensitivity() const { return sensitivity_; }

  /// Gaussian-DP parameter mu = sensitivity / sigma_e.
  double gdp_parameter() const;

  Vector randomize(const Eigen::Ref<const Vector>& x, Rng& rng) const;

  /// Row-wise randomize; draws are consumed row by row.
  Matrix randomize_rows(const Eigen::Ref<const Matrix>& rows, Rng& rng) const;

 private:
  double sigma_e2_;
  double sensitivity_;
};

struct TradeoffPoint {
  double alpha;  // type-I error
  double beta;   // minimal type-II error T(alpha)
};

struct TradeoffCurve {
  double mu = 0.0;
  std::vector<TradeoffPoint> points;
};

/// T(alpha) = Phi(Phi^{-1}(1 - alpha) - mu), the trade-off function of
/// N(0,1) vs N(mu,1). The grid must be ascending inside [0, 1].
TradeoffCurve tradeoff_curve(double mu, std::span<const double> alphas);

/// delta(eps) for a mu-GDP mechanism:
/// Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2), evaluated in log space.
double dp_delta_gdp(double epsilon, double mu);

double dp_delta(double epsilon, const PrivacyMechanism& mech);

/// Delta = vmax - vmin. Throws Error(kInvalidRange) unless vmax > vmin.
double sensitivity_from_range(double vmin, double vmax);

/// KL_delta = D(f || g) - D(f_e || g_e), clamped at zero after checking that
/// any negative value is round-off (> -1e-10).
double kl_degradation(const GaussianModel& f, const GaussianModel& g,
                      const PrivacyMechanism& mech);

/// sigma_e2 / (2 nu0^2) * (||mu0 - mu1||^2 + p (nu1 - nu0)^2 / nu1), where nu0 is
/// the smallest eigenvalue of the pre-change covariance (g) and nu1 the largest
/// of the post-change covariance (f). The dimension p stands in for the
/// unspecified constant M.
double kl_degradation_upper_bound(const GaussianModel& f, const GaussianModel& g,
                                  const PrivacyMechanism& mech);

}  // namespace plod
