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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plod/config.hpp"
#include "plod/datagen.hpp"
#include "plod/detection.hpp"
#include "plod/localization.hpp"
#include "plod/privacy.hpp"

namespace plod {

enum class OutputFormat { kCsv, kJson };

OutputFormat parse_output_format(std::string_view text);

/// Monte Carlo protocol knobs. Defaults follow the published setup:
/// rho = 0.04, alpha = 1e-2, sigma_e2 = 4e-2, gamma in {1, 2, 3},
/// 1000 replications, 50 post-change samples.
struct ExperimentConfig {
  // Scenario.
  std::string topology = "ieee8_mesh";
  std::vector<std::string> outage = {"4-7"};
  /// Prebuilt scenario JSON (from `plod generate`); overrides topology/outage.
  std::string scenario_file;
  std::uint64_t scenario_seed = 1;
  Index n_fit = 20000;
  LoadStats load_stats;
  ScenarioOptions scenario_options;

  // Detectors. "mitigated" expands over `gammas` (1 -> mitigated, g > 1 ->
  // variance_scaled:g); "variance_scaled:g" entries are taken as is.
  std::vector<std::string> detectors = {"benchmark", "privacy_only", "mitigated"};
  std::vector<double> gammas = {1.0, 2.0, 3.0};

  double rho = 0.04;
  std::vector<double> alphas = {1e-2};
  double sigma_e2 = PrivacyMechanism::kDefaultSigmaE2;
  double sensitivity = PrivacyMechanism::kDefaultSensitivity;
  Index replications = 1000;
  std::uint64_t seed = 2024;
  std::vector<double> coverages = {1.0};
  Index n_post = 50;

  bool localize = true;
  LocalizationConfig localization;

  /// 0 picks the hardware concurrency. Never affects results.
  unsigned threads = 0;
  bool record_replications = false;

  // Privacy tabulation.
  std::vector<double> tradeoff_sigma_e2 = {5e-3, 4e-2};
  std::vector<double> epsilons = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

  std::string out;  // empty: stdout
  OutputFormat format = OutputFormat::kCsv;

  /// Throws Error(kConfigError) for out-of-range values.
  void validate() const;
};

/// Overlays the keys of a TOML table onto `base`. Unknown keys are an
/// Error(kConfigError).
ExperimentConfig config_from_toml(const TomlTable& table, ExperimentConfig base = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::vector<DetectorSpec> expand_detectors(const ExperimentConfig& cfg);

/// Loads cfg.scenario_file or builds topology/outage with scenario_seed.
GridScenario make_scenario(const ExperimentConfig& cfg);

/// What the Monte Carlo loop needs from a scenario. Ground truth is in
/// observed coordinates; `grid` only supplies bus labels.
struct EvalScenario {
  std::string label;
  GaussianModel pre;
  GaussianModel post;
  std::vector<BusPair> truth;
  std::optional<GridModel> grid;
};

EvalScenario eval_scenario(const GridScenario& scn);

struct ReplicationRecord {
  Index replication = 0;
  double coverage = 1.0;
  std::string detector;
  double alpha = 0.0;
  Index lambda = 1;
  std::optional<Index> tau;  // empty: no alarm inside the stream
  bool false_alarm = false;  // tau < lambda
  bool localized_correct = false;
  std::vector<std::string> localized;  // reported branch labels

  friend bool operator==(const ReplicationRecord&, const ReplicationRecord&) = default;
};

struct SummaryRow {
  std::string detector;
  double gamma = 1.0;
  double alpha = 0.0;
  double coverage = 1.0;
  Index replications = 0;
  Index detections = 0;  // tau >= lambda
  Index false_alarms = 0;
  Index no_alarm = 0;
  std::optional<double> add_mean;  // E[tau - lambda | tau >= lambda]
  std::optional<double> add_stderr;
  double far = 0.0;
  double far_stderr = 0.0;
  std::optional<double> localization_accuracy;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

/// Reduction over records of one detector/alpha/coverage cell.
SummaryRow aggregate(std::span<const ReplicationRecord> records, bool with_localization);

struct MonteCarloSummary {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  std::string scenario;
  Index dim = 0;
  double kl = 0.0;
  double kl_encrypted = 0.0;
  double rho = 0.0;
  double sigma_e2 = 0.0;
  std::uint64_t seed = 0;
  Index replications = 0;
  std::vector<SummaryRow> rows;
  std::vector<ReplicationRecord> records;  // only when record_replications
  std::vector<std::string> warnings;

  friend bool operator==(const MonteCarloSummary&, const MonteCarloSummary&) = default;
};

MonteCarloSummary run_monte_carlo(const ExperimentConfig& cfg, const EvalScenario& scn);
MonteCarloSummary run_monte_carlo(const ExperimentConfig& cfg);

struct DelayCurveRow {
  std::string detector;
  double alpha = 0.0;
  std::optional<double> add_mean;
  std::optional<double> add_stderr;
  std::optional<double> ratio;  // add / |log alpha|
  double bound = 0.0;           // 1 / (-log(1 - rho) + KL(f || g))
  double far = 0.0;
};

/// Runs the Monte Carlo over cfg.alphas at full coverage.
std::vector<DelayCurveRow> asymptotic_delay_curve(const ExperimentConfig& cfg,
                                                  const EvalScenario& scn);

struct CoverageRow {
  std::string detector;
  double alpha = 0.0;
  double coverage = 1.0;
  std::optional<double> add_mean;
  double far = 0.0;
  std::optional<double> delta_add;  // relative to coverage 1
  std::optional<double> delta_add_stderr;
  double delta_far = 0.0;
  double delta_far_stderr = 0.0;
};

/// `ratios` must contain 1.0 (Error(kConfigError) otherwise).
std::vector<CoverageRow> coverage_experiment(const ExperimentConfig& cfg, const EvalScenario& scn,
                                             std::span<const double> ratios);

struct TradeoffRow {
  double sigma_e2 = 0.0;
  double sensitivity = 0.0;
  double mu = 0.0;
  std::vector<TradeoffPoint> curve;
  std::vector<std::pair<double, double>> delta;  // (epsilon, delta)
};

std::vector<TradeoffRow> tradeoff_report(std::span<const PrivacyMechanism> mechs,
                                         std::span<const double> alphas,
                                         std::span<const double> epsilons);

/// Evenly spaced type-I grid on [0, 1].
std::vector<double> alpha_grid(Index points);

// Output. CSV summary columns (schema version 1):
//   detector,gamma,alpha,coverage,replications,detections,false_alarms,no_alarm,
//   add_mean,add_stderr,far,far_stderr,localization_accuracy
// Missing values are empty cells.
extern const char* const kSummaryCsvHeader;

void write_summary_csv(std::ostream& out, const MonteCarloSummary& summary);
std::string summary_to_json(const MonteCarloSummary& summary);
MonteCarloSummary summary_from_json(std::string_view text);

void write_delay_curve(std::ostream& out, std::span<const DelayCurveRow> rows, OutputFormat fmt);
void write_coverage(std::ostream& out, std::span<const CoverageRow> rows, OutputFormat fmt);
void write_tradeoff(std::ostream& out, std::span<const TradeoffRow> rows, OutputFormat fmt);

/// Columns n,<label>...; one row per step up to the longest trajectory,
/// shorter ones padded with empty cells.
void write_trajectories_csv(std::ostream& out, std::span<const std::string> labels,
                            std::span<const std::vector<double>> trajectories);

void emit_results(const MonteCarloSummary& summary, const std::filesystem::path& path,
                  OutputFormat fmt);

}  // namespace plod
