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

#include "plod/detection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "plod/error.hpp"

namespace plod {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_unit_interval(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream os;
    os << name << " = " << v << " must lie in (0, 1)";
    raise(ErrorCode::kInvalidParameter, os.str());
  }
}

void check_gamma(double gamma) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    raise(ErrorCode::kInvalidParameter, "variance scaling factor must be >= 1");
  }
}

}  // namespace

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kBenchmark: return "benchmark";
    case DetectorKind::kPrivacyOnly: return "privacy_only";
    case DetectorKind::kMitigated: return "mitigated";
    case DetectorKind::kVarianceScaled: return "variance_scaled";
  }
  return "unknown";
}

DetectorKind parse_detector_kind(std::string_view name) {
  if (name == "benchmark") return DetectorKind::kBenchmark;
  if (name == "privacy_only") return DetectorKind::kPrivacyOnly;
  if (name == "mitigated") return DetectorKind::kMitigated;
  if (name == "variance_scaled") return DetectorKind::kVarianceScaled;
  raise(ErrorCode::kConfigError, "unknown detector kind '" + std::string(name) + "'");
}

std::string DetectorSpec::label() const {
  if (kind != DetectorKind::kVarianceScaled) return std::string(to_string(kind));
  std::ostringstream os;
  os << "variance_scaled(g=" << gamma << ")";
  return os.str();
}

DetectorSpec parse_detector_spec(std::string_view text) {
  const auto colon = text.find(':');
  DetectorSpec spec;
  spec.kind = parse_detector_kind(text.substr(0, colon));
  if (colon != std::string_view::npos) {
    const std::string_view g = text.substr(colon + 1);
    double gamma = 0.0;
    const auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), gamma);
    if (ec != std::errc() || ptr != g.data() + g.size()) {
      raise(ErrorCode::kConfigError, "bad gamma in detector spec '" + std::string(text) + "'");
    }
    spec.gamma = gamma;
  }
  if (spec.kind != DetectorKind::kVarianceScaled && spec.gamma != 1.0) {
    raise(ErrorCode::kConfigError, "gamma only applies to variance_scaled");
  }
  if (!(spec.gamma >= 1.0)) raise(ErrorCode::kConfigError, "gamma must be >= 1");
  return spec;
}

double threshold(double rho, double alpha) {
  check_unit_interval(rho, "rho");
  check_unit_interval(alpha, "alpha");
  return (1.0 - alpha) / (rho * alpha);
}

double log_threshold(double rho, double alpha) {
  check_unit_interval(rho, "rho");
  check_unit_interval(alpha, "alpha");
  return std::log1p(-alpha) - std::log(rho) - std::log(alpha);
}

double add_lower_bound(double alpha, double rho, double kl) {
  check_unit_interval(alpha, "alpha");
  check_unit_interval(rho, "rho");
  if (!(kl >= 0.0)) raise(ErrorCode::kInvalidParameter, "KL divergence must be >= 0");
  return std::abs(std::log(alpha)) / (-std::log1p(-rho) + kl);
}

double mitigated_log_ratio(const Eigen::Ref<const Vector>& x_enc, const GaussianModel& pre,
                           const GaussianModel& post, const PrivacyMechanism& mech,
                           double gamma) {
  check_gamma(gamma);
  if (pre.dim() != post.dim()) raise(ErrorCode::kDimensionMismatch, "model dimensions differ");
  const double s2 = mech.sigma_e2();
  const double beta0 = -0.5 * pre.mahalanobis_sq(x_enc) + 0.5 * s2 * pre.trace_precision();
  const double beta1 = -0.5 * post.mahalanobis_sq(x_enc) + 0.5 * s2 * post.trace_precision();
  return 0.5 * (pre.log_det() - post.log_det()) + (beta1 - beta0) / gamma;
}

DetectorModels::DetectorModels(DetectorSpec spec, const GaussianModel& pre,
                               const GaussianModel& post, std::optional<PrivacyMechanism> mech)
    : spec_(spec),
      pre_(pre),
      post_(post),
      mech_(std::move(mech)) {
  if (pre.dim() != post.dim()) raise(ErrorCode::kDimensionMismatch, "model dimensions differ");
  if (spec_.kind == DetectorKind::kMitigated) spec_.gamma = 1.0;
  if (spec_.kind != DetectorKind::kVarianceScaled && spec_.gamma != 1.0) {
    raise(ErrorCode::kInvalidParameter, "gamma only applies to the variance-scaled detector");
  }
  check_gamma(spec_.gamma);
  if (spec_.kind != DetectorKind::kBenchmark && !mech_) {
    raise(ErrorCode::kMissingMechanism,
          std::string(to_string(spec_.kind)) + " detector needs the noise variance");
  }
  if (spec_.kind == DetectorKind::kPrivacyOnly) {
    pre_ = pre.encrypted(mech_->sigma_e2());
    post_ = post.encrypted(mech_->sigma_e2());
  }
  half_log_det_ratio_ = 0.5 * (pre_.log_det() - post_.log_det());
  if (mech_) {
    beta_offset_ = 0.5 * mech_->sigma_e2() * (post_.trace_precision() - pre_.trace_precision());
  }
}

double DetectorModels::log_ratio(const Eigen::Ref<const Vector>& x) const {
  switch (spec_.kind) {
    case DetectorKind::kBenchmark:
    case DetectorKind::kPrivacyOnly:
      return half_log_det_ratio_ + 0.5 * (pre_.mahalanobis_sq(x) - post_.mahalanobis_sq(x));
    case DetectorKind::kMitigated:
    case DetectorKind::kVarianceScaled: {
      const double beta_diff =
          0.5 * (pre_.mahalanobis_sq(x) - post_.mahalanobis_sq(x)) + beta_offset_;
      return half_log_det_ratio_ + beta_diff / spec_.gamma;
    }
  }
  return 0.0;
}

Detector::Detector(std::shared_ptr<const DetectorModels> models, double rho, double alpha)
    : models_(std::move(models)),
      rho_(rho),
      alpha_(alpha),
      log_threshold_(plod::log_threshold(rho, alpha)),
      log_rho_(std::log(rho)),
      log_one_minus_rho_(std::log1p(-rho)),
      log_stat_(kNegInf) {
  if (!models_) raise(ErrorCode::kInvalidParameter, "detector needs models");
}

StepResult Detector::step(const Eigen::Ref<const Vector>& x) {
  if (x.size() != models_->dim()) {
    std::ostringstream os;
    os << "sample has length " << x.size() << ", detector dimension is " << models_->dim();
    raise(ErrorCode::kDimensionMismatch, os.str());
  }
  const double l = models_->log_ratio(x);
  log_stat_ = l - log_one_minus_rho_ + log_add_exp(log_stat_, log_rho_);
  ++n_;
  return {log_stat_, log_stat_ >= log_threshold_};
}

void Detector::reset() {
  log_stat_ = kNegInf;
  n_ = 0;
}

StopReport run_sequence(Detector& detector, const Eigen::Ref<const Matrix>& stream,
                        bool record_trajectory) {
  if (stream.rows() == 0) raise(ErrorCode::kEmptyStream, "stream has no samples");
  StopReport report;
  if (record_trajectory) report.trajectory.reserve(static_cast<std::size_t>(stream.rows()));
  for (Index r = 0; r < stream.rows(); ++r) {
    const Vector x = stream.row(r).transpose();
    const StepResult s = detector.step(x);
    if (record_trajectory) report.trajectory.push_back(s.log_stat);
    report.final_log_stat = s.log_stat;
    if (s.alarm) {
      report.stopped = true;
      report.tau = detector.time();
      break;
    }
  }
  return report;
}

double direct_statistic(const DetectorModels& models, double rho,
                        const Eigen::Ref<const Matrix>& sequence) {
  check_unit_interval(rho, "rho");
  const Index big_n = sequence.rows();
  if (big_n == 0) raise(ErrorCode::kEmptyStream, "sequence has no samples");
  std::vector<double> ell(static_cast<std::size_t>(big_n));
  for (Index n = 0; n < big_n; ++n) {
    ell[static_cast<std::size_t>(n)] = models.log_ratio(sequence.row(n).transpose());
  }
  const double log_rho = std::log(rho);
  const double log_q = std::log1p(-rho);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(big_n));
  for (Index k = 1; k <= big_n; ++k) {
    // log pi_N^k = log rho + (k - 1) log(1 - rho) - N log(1 - rho)
    double t = log_rho + static_cast<double>(k - 1 - big_n) * log_q;
    for (Index n = k; n <= big_n; ++n) t += ell[static_cast<std::size_t>(n - 1)];
    terms.push_back(t);
  }
  const double hi = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

}  // namespace plod
