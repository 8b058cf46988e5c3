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

#include "plod/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "plod/error.hpp"
#include "plod/normal.hpp"

namespace plod {

PrivacyMechanism::PrivacyMechanism(double sigma_e2, double sensitivity)
    : sigma_e2_(sigma_e2), sensitivity_(sensitivity) {
  if (!(sigma_e2 > 0.0) || !std::isfinite(sigma_e2)) {
    raise(ErrorCode::kInvalidParameter, "sigma_e2 must be positive and finite");
  }
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    raise(ErrorCode::kInvalidParameter, "sensitivity must be positive and finite");
  }
}

double PrivacyMechanism::sigma_e() const { return std::sqrt(sigma_e2_); }

double PrivacyMechanism::gdp_parameter() const { return sensitivity_ / sigma_e(); }

Vector PrivacyMechanism::randomize(const Eigen::Ref<const Vector>& x, Rng& rng) const {
  std::normal_distribution<double> noise(0.0, sigma_e());
  Vector out = x;
  for (Index j = 0; j < out.size(); ++j) out(j) += noise(rng);
  return out;
}

Matrix PrivacyMechanism::randomize_rows(const Eigen::Ref<const Matrix>& rows, Rng& rng) const {
  std::normal_distribution<double> noise(0.0, sigma_e());
  Matrix out = rows;
  for (Index r = 0; r < out.rows(); ++r) {
    for (Index c = 0; c < out.cols(); ++c) out(r, c) += noise(rng);
  }
  return out;
}

TradeoffCurve tradeoff_curve(double mu, std::span<const double> alphas) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) raise(ErrorCode::kInvalidParameter, "mu must be >= 0");
  TradeoffCurve curve;
  curve.mu = mu;
  curve.points.reserve(alphas.size());
  double prev = -1.0;
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0) || a < prev) {
      raise(ErrorCode::kInvalidParameter, "alpha grid must be ascending within [0, 1]");
    }
    prev = a;
    const double beta = normal_cdf(normal_upper_quantile(a) - mu);
    curve.points.push_back({a, std::clamp(beta, 0.0, 1.0)});
  }
  return curve;
}

double dp_delta_gdp(double epsilon, double mu) {
  if (!(epsilon >= 0.0)) raise(ErrorCode::kInvalidParameter, "epsilon must be >= 0");
  if (!(mu >= 0.0) || std::isnan(mu)) raise(ErrorCode::kInvalidParameter, "mu must be >= 0");
  if (mu == 0.0) return 0.0;
  if (std::isinf(epsilon)) return 0.0;
  const double a = -epsilon / mu + 0.5 * mu;
  const double b = -epsilon / mu - 0.5 * mu;
  const double log_first = log_normal_cdf(a);
  const double log_second = epsilon + log_normal_cdf(b);
  if (log_first == -std::numeric_limits<double>::infinity()) return 0.0;
  // Phi(a) * (1 - exp(log_second - log_first)); the bracket is in [0, 1] for
  // a valid GDP curve and -expm1 keeps it accurate when the terms nearly cancel.
  const double ratio = log_second - log_first;
  const double delta = std::exp(log_first) * -std::expm1(std::min(ratio, 0.0));
  return std::clamp(delta, 0.0, 1.0);
}

double dp_delta(double epsilon, const PrivacyMechanism& mech) {
  return dp_delta_gdp(epsilon, mech.gdp_parameter());
}

double sensitivity_from_range(double vmin, double vmax) {
  if (!(vmax > vmin) || !std::isfinite(vmin) || !std::isfinite(vmax)) {
    std::ostringstream os;
    os << "operational range [" << vmin << ", " << vmax << "] is empty";
    raise(ErrorCode::kInvalidRange, os.str());
  }
  return vmax - vmin;
}

double kl_degradation(const GaussianModel& f, const GaussianModel& g,
                      const PrivacyMechanism& mech) {
  const double raw = kl_divergence(f, g);
  const double enc = kl_divergence(f.encrypted(mech.sigma_e2()), g.encrypted(mech.sigma_e2()));
  const double diff = raw - enc;
  if (diff < -1e-10) {
    std::ostringstream os;
    os << "KL degradation " << diff << " is negative beyond round-off";
    raise(ErrorCode::kNotPositiveDefinite, os.str());
  }
  return std::max(diff, 0.0);
}

double kl_degradation_upper_bound(const GaussianModel& f, const GaussianModel& g,
                                  const PrivacyMechanism& mech) {
  if (f.dim() != g.dim()) raise(ErrorCode::kDimensionMismatch, "model dimensions differ");
  const Eigen::SelfAdjointEigenSolver<Matrix> pre(g.cov(), Eigen::EigenvaluesOnly);
  const Eigen::SelfAdjointEigenSolver<Matrix> post(f.cov(), Eigen::EigenvaluesOnly);
  const double nu0_min = pre.eigenvalues().minCoeff();
  const double nu1_max = post.eigenvalues().maxCoeff();
  const double mean_gap = (g.mean() - f.mean()).squaredNorm();
  const double spread = nu1_max - nu0_min;
  const double p = static_cast<double>(f.dim());
  const double bound = mech.sigma_e2() / (2.0 * nu0_min * nu0_min) *
                       (mean_gap + p * spread * spread / nu1_max);
  return std::max(bound, 0.0);
}

}  // namespace plod
