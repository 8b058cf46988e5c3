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

#include <algorithm>
#include <cmath>
#include <vector>

#include "plod/detection.hpp"
#include "test_util.hpp"

namespace plod::testing {

// Per-sample log ratio for each detector kind, written out with explicit
// inverses and determinants.
inline double oracle_log_ratio(DetectorKind kind, double gamma, const Vector& m0, const Matrix& s0,
                               const Vector& m1, const Matrix& s1, double sigma_e2,
                               const Vector& x) {
  const Index p = m0.size();
  switch (kind) {
    case DetectorKind::kBenchmark:
      return naive_log_density(m1, s1, x) - naive_log_density(m0, s0, x);
    case DetectorKind::kPrivacyOnly: {
      const Matrix n = sigma_e2 * Matrix::Identity(p, p);
      return naive_log_density(m1, s1 + n, x) - naive_log_density(m0, s0 + n, x);
    }
    case DetectorKind::kMitigated:
    case DetectorKind::kVarianceScaled: {
      const Matrix i0 = s0.inverse();
      const Matrix i1 = s1.inverse();
      const Vector d0 = x - m0;
      const Vector d1 = x - m1;
      const double b0 = -0.5 * d0.dot(i0 * d0) + 0.5 * sigma_e2 * i0.trace();
      const double b1 = -0.5 * d1.dot(i1 * d1) + 0.5 * sigma_e2 * i1.trace();
      const double g = kind == DetectorKind::kMitigated ? 1.0 : gamma;
      return 0.5 * std::log(s0.determinant() / s1.determinant()) + (b1 - b0) / g;
    }
  }
  return 0.0;
}

// log sum_k rho (1-rho)^(k-1) prod_{n=k}^N L_n / (1-rho)^N over k = 1..N.
inline double oracle_log_shiryaev(const std::vector<double>& ell, double rho) {
  const auto big_n = static_cast<long>(ell.size());
  std::vector<double> terms;
  for (long k = 1; k <= big_n; ++k) {
    double t = std::log(rho) + static_cast<double>(k - 1) * std::log(1.0 - rho) -
               static_cast<double>(big_n) * std::log(1.0 - rho);
    for (long n = k; n <= big_n; ++n) t += ell[static_cast<std::size_t>(n - 1)];
    terms.push_back(t);
  }
  const double hi = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - hi);
  return hi + std::log(s);
}

}  // namespace plod::testing
