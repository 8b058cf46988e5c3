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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "plod/error.hpp"
#include "plod/normal.hpp"
#include "plod/privacy.hpp"
#include "test_util.hpp"

namespace plod {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

Big big_phi(const Big& x) {
  return 0.5 * boost::multiprecision::erfc(-x / boost::multiprecision::sqrt(Big(2)));
}

double big_delta(double eps, double mu) {
  const Big e(eps), m(mu);
  return static_cast<double>(big_phi(-e / m + m / 2) - boost::multiprecision::exp(e) * big_phi(-e / m - m / 2));
}

TEST(PrivacyMechanism, GdpParameter) {
  const PrivacyMechanism m(4e-2, 1.1);
  EXPECT_NEAR(m.sigma_e(), 0.2, 1e-15);
  EXPECT_NEAR(m.gdp_parameter(), 5.5, 1e-13);
  EXPECT_THROW(PrivacyMechanism(0.0, 1.0), Error);
  EXPECT_THROW(PrivacyMechanism(1.0, -1.0), Error);
}

TEST(PrivacyMechanism, NoiseHasConfiguredVariance) {
  const PrivacyMechanism m(0.09, 1.0);
  Rng rng(5);
  const Matrix x = Matrix::Zero(100000, 3);
  const Matrix y = m.randomize_rows(x, rng);
  for (Index c = 0; c < 3; ++c) {
    const double var = y.col(c).squaredNorm() / static_cast<double>(y.rows());
    EXPECT_NEAR(var, 0.09, 0.09 * 0.03);
  }
}

TEST(PrivacyMechanism, RandomizeRowsMatchesRowwise) {
  const PrivacyMechanism m(0.5, 1.0);
  Matrix x(3, 2);
  x << 0.5, 1.0, -2.0, 0.25, 4.0, 8.0;
  Rng a(8), b(8);
  const Matrix batch = m.randomize_rows(x, a);
  for (Index r = 0; r < x.rows(); ++r) {
    const Vector one = m.randomize(x.row(r).transpose(), b);
    EXPECT_EQ(batch.row(r), one.transpose());
  }
}

TEST(TradeoffCurve, EndpointsAndMonotone) {
  std::vector<double> alphas;
  for (int i = 0; i <= 100; ++i) alphas.push_back(i / 100.0);
  const TradeoffCurve c = tradeoff_curve(1.5, alphas);
  ASSERT_EQ(c.points.size(), alphas.size());
  EXPECT_NEAR(c.points.front().beta, 1.0, 1e-15);
  EXPECT_NEAR(c.points.back().beta, 0.0, 1e-15);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_LE(c.points[i].beta, c.points[i - 1].beta);
  }
  // mu = 0 is perfect privacy: T(a) = 1 - a.
  const TradeoffCurve flat = tradeoff_curve(0.0, alphas);
  for (const auto& pt : flat.points) EXPECT_NEAR(pt.beta, 1.0 - pt.alpha, 1e-14);
}

TEST(TradeoffCurve, MatchesDirectFormula) {
  const std::vector<double> alphas = {0.01, 0.2, 0.5, 0.9};
  const TradeoffCurve c = tradeoff_curve(2.0, alphas);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const double ref = normal_cdf(normal_quantile(1.0 - alphas[i]) - 2.0);
    EXPECT_NEAR(c.points[i].beta, ref, 1e-12);
  }
}

TEST(TradeoffCurve, LargerMuLiesBelow) {
  const std::vector<double> alphas = {0.05, 0.1, 0.3, 0.6};
  const TradeoffCurve lo = tradeoff_curve(0.5, alphas);
  const TradeoffCurve hi = tradeoff_curve(3.0, alphas);
  for (std::size_t i = 0; i < alphas.size(); ++i) EXPECT_LT(hi.points[i].beta, lo.points[i].beta);
}

TEST(TradeoffCurve, RejectsBadGrid) {
  const std::vector<double> descending = {0.5, 0.1};
  EXPECT_THROW(tradeoff_curve(1.0, descending), Error);
  const std::vector<double> outside = {0.1, 1.5};
  EXPECT_THROW(tradeoff_curve(1.0, outside), Error);
  const std::vector<double> ok = {0.1};
  EXPECT_THROW(tradeoff_curve(-1.0, ok), Error);
}

TEST(DpDelta, MatchesHighPrecisionOracle) {
  for (double mu : {0.1, 0.5, 1.0, 2.0, 5.5}) {
    for (double eps : {0.0, 0.5, 2.0, 8.0}) {
      EXPECT_NEAR(dp_delta_gdp(eps, mu), big_delta(eps, mu), 1e-12) << eps << " " << mu;
    }
  }
}

TEST(DpDelta, ZeroEpsilonIdentity) {
  for (double mu : {0.2, 1.0, 3.0}) {
    EXPECT_NEAR(dp_delta_gdp(0.0, mu), 2.0 * normal_cdf(mu / 2.0) - 1.0, 1e-14);
  }
}

TEST(DpDelta, NonIncreasingInEpsilonAndTinyInTail) {
  double prev = 1.0;
  for (double eps = 0.0; eps <= 60.0; eps += 0.5) {
    const double d = dp_delta_gdp(eps, 1.1 / 0.2);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, prev + 1e-300);
    prev = d;
  }
  EXPECT_LT(dp_delta_gdp(60.0, 1.0), 1e-300);
  EXPECT_EQ(dp_delta_gdp(1.0, 0.0), 0.0);
  EXPECT_THROW(dp_delta_gdp(-1.0, 1.0), Error);
}

TEST(Sensitivity, FromRange) {
  EXPECT_DOUBLE_EQ(sensitivity_from_range(-0.2, 0.9), 1.1);
  EXPECT_THROW(sensitivity_from_range(1.0, 1.0), Error);
}

TEST(KlDegradation, NonNegativeOnRandomPairs) {
  Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    const Index p = 1 + t % 8;
    const GaussianModel f(testing::random_vector(p, rng), testing::random_spd(p, rng));
    const GaussianModel g(testing::random_vector(p, rng), testing::random_spd(p, rng));
    for (double s2 : {1e-3, 1e-2, 1e-1}) EXPECT_GE(kl_degradation(f, g, PrivacyMechanism(s2)), 0.0);
  }
}

TEST(KlDegradation, UpperBoundIsZeroForIdenticalIsotropic) {
  const GaussianModel f(Vector::Zero(3), 2.0 * Matrix::Identity(3, 3));
  EXPECT_EQ(kl_degradation_upper_bound(f, f, PrivacyMechanism(0.1)), 0.0);
}

TEST(KlDegradation, UpperBoundHoldsForIsotropicPairs) {
  Rng rng(43);
  std::uniform_real_distribution<double> s(0.1, 10.0);
  for (int t = 0; t < 500; ++t) {
    const Index p = 1 + t % 8;
    const GaussianModel f(testing::random_vector(p, rng), s(rng) * Matrix::Identity(p, p));
    const GaussianModel g(testing::random_vector(p, rng), s(rng) * Matrix::Identity(p, p));
    for (double s2 : {1e-3, 1e-2, 1e-1}) {
      const PrivacyMechanism m(s2);
      EXPECT_LE(kl_degradation(f, g, m), kl_degradation_upper_bound(f, g, m) + 1e-12);
    }
  }
}

TEST(KlDegradation, UpperBoundCanFailForAnisotropicDiagonal) {
  // Documented limitation: one direction shrinks sharply while the extreme
  // eigenvalues coincide, so the bound collapses to zero.
  Matrix s0 = Matrix::Identity(2, 2);
  Matrix s1 = Matrix::Identity(2, 2);
  s1(0, 0) = 0.01;
  const GaussianModel g(Vector::Zero(2), s0);
  const GaussianModel f(Vector::Zero(2), s1);
  const PrivacyMechanism m(0.1);
  EXPECT_EQ(kl_degradation_upper_bound(f, g, m), 0.0);
  EXPECT_GT(kl_degradation(f, g, m), 0.0);
}

}  // namespace
}  // namespace plod
