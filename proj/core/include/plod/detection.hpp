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

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plod/gauss_model.hpp"
#include "plod/privacy.hpp"
#include "plod/types.hpp"

namespace plod {

/// The four detection statistics.
///   kBenchmark      Shiryaev statistic on raw data with densities f, g.
///   kPrivacyOnly    Shiryaev statistic on randomized data with f_e, g_e.
///   kMitigated      noise-corrected statistic on randomized data.
///   kVarianceScaled noise-corrected statistic with the beta terms divided by
///                   gamma >= 1 (gamma == 1 is kMitigated).
enum class DetectorKind { kBenchmark, kPrivacyOnly, kMitigated, kVarianceScaled };

std::string_view to_string(DetectorKind kind);
DetectorKind parse_detector_kind(std::string_view name);

struct DetectorSpec {
  DetectorKind kind = DetectorKind::kBenchmark;
  double gamma = 1.0;

  /// Whether the detector consumes randomized samples.
  bool uses_encrypted_data() const { return kind != DetectorKind::kBenchmark; }
  /// "benchmark", "privacy_only", "mitigated", "variance_scaled(g=3)".
  std::string label() const;

  friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

/// Parses "benchmark", "privacy_only", "mitigated" or "variance_scaled:<gamma>".
DetectorSpec parse_detector_spec(std::string_view text);

/// (1 - alpha) / (rho * alpha). Throws Error(kInvalidParameter) outside (0, 1).
double threshold(double rho, double alpha);
double log_threshold(double rho, double alpha);

/// |log alpha| / (-log(1 - rho) + kl), the asymptotic delay lower bound.
double add_lower_bound(double alpha, double rho, double kl);

/// Per-sample noise-corrected log ratio:
///   0.5 log(|S0| / |S1|) + (beta_1 - beta_0) / gamma,
///   beta_i = -0.5 (x - mu_i)^T S_i^{-1} (x - mu_i) + 0.5 sigma_e2 tr(S_i^{-1}).
/// `pre` and `post` are the raw-data models; x_enc is a randomized sample.
double mitigated_log_ratio(const Eigen::Ref<const Vector>& x_enc, const GaussianModel& pre,
                           const GaussianModel& post, const PrivacyMechanism& mech,
                           double gamma = 1.0);

/// The densities one detector compares, already specialised to its kind.
/// Immutable and shareable across threads.
class DetectorModels {
 public:
  /// `pre`/`post` are always the raw-data models g and f. The mechanism is
  /// required for every kind except kBenchmark
  /// (Error(kMissingMechanism) otherwise).
  DetectorModels(DetectorSpec spec, const GaussianModel& pre, const GaussianModel& post,
                 std::optional<PrivacyMechanism> mech);

  const DetectorSpec& spec() const { return spec_; }
  Index dim() const { return pre_.dim(); }
  /// The densities evaluated by log_ratio: g/f, or g_e/f_e for kPrivacyOnly.
  const GaussianModel& pre() const { return pre_; }
  const GaussianModel& post() const { return post_; }
  const std::optional<PrivacyMechanism>& mechanism() const { return mech_; }

  /// log L_n for one observation.
  double log_ratio(const Eigen::Ref<const Vector>& x) const;

 private:
  DetectorSpec spec_;
  GaussianModel pre_;
  GaussianModel post_;
  std::optional<PrivacyMechanism> mech_;
  double half_log_det_ratio_ = 0.0;
  double beta_offset_ = 0.0;  // 0.5 sigma_e2 (tr S1^{-1} - tr S0^{-1})
};

struct StepResult {
  double log_stat;
  bool alarm;
};

/// One streaming Shiryaev-type detector with a geometric Geo(rho) prior.
///
/// Keeps log Lambda_n and updates it with
///   log Lambda_n = log L_n - log(1 - rho) + logsumexp(log Lambda_{n-1}, log rho)
/// starting from Lambda_0 = 0. The threshold is fixed at construction.
/// Single owner; not safe to share between threads.
class Detector {
 public:
  Detector(std::shared_ptr<const DetectorModels> models, double rho, double alpha);

  StepResult step(const Eigen::Ref<const Vector>& x);
  void reset();

  double log_stat() const { return log_stat_; }
  Index time() const { return n_; }
  double rho() const { return rho_; }
  double alpha() const { return alpha_; }
  double log_threshold() const { return log_threshold_; }
  const DetectorModels& models() const { return *models_; }

 private:
  std::shared_ptr<const DetectorModels> models_;
  double rho_;
  double alpha_;
  double log_threshold_;
  double log_rho_;
  double log_one_minus_rho_;
  double log_stat_;
  Index n_ = 0;
};

struct StopReport {
  bool stopped = false;
  /// 1-based index of the first alarm.
  std::optional<Index> tau;
  double final_log_stat = 0.0;
  /// log statistic after each consumed sample; min(tau, N) entries when recorded.
  std::vector<double> trajectory;
};

/// Feeds rows through `detector` until the first alarm or the end of the
/// stream. Throws Error(kEmptyStream) for a stream without rows.
StopReport run_sequence(Detector& detector, const Eigen::Ref<const Matrix>& stream,
                        bool record_trajectory = false);

/// Literal O(N^2) evaluation of
///   log sum_k pi_N^k prod_{n=k..N} L_n,  pi_N^k = rho (1-rho)^{k-1} / (1-rho)^N.
/// Test oracle for the recursion.
double direct_statistic(const DetectorModels& models, double rho,
                        const Eigen::Ref<const Matrix>& sequence);

}  // namespace plod
