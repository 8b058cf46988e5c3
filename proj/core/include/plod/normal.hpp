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

namespace plod {

/// Standard normal CDF.
double normal_cdf(double x);

/// log of the standard normal CDF, accurate far into the lower tail where
/// normal_cdf underflows.
double log_normal_cdf(double x);

/// Inverse of the standard normal CDF. Returns -inf/+inf at p = 0/1.
double normal_quantile(double p);

/// Upper-tail quantile, Phi^{-1}(1 - p), without forming 1 - p.
double normal_upper_quantile(double p);

}  // namespace plod
