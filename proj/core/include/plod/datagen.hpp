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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plod/gauss_model.hpp"
#include "plod/privacy.hpp"
#include "plod/topology.hpp"
#include "plod/types.hpp"

namespace plod {

/// Target moments of per-bus active load in kW.
struct LoadStats {
  double minimum = -2.6040;
  double maximum = 26.6860;
  double mean = 0.8473;
  double std = 0.6387;
  double skewness = 1.7441;

  /// Throws Error(kInvalidParameter) unless minimum <= mean <= maximum and std > 0.
  void validate() const;
};

/// Shifted log-normal shift + exp(m + s Z) matching mean, std and skewness.
struct ShiftedLogNormal {
  double shift = 0.0;
  double log_scale = 0.0;  // m
  double sigma = 1.0;      // s
};

/// Throws Error(kInfeasibleMoments) when skewness <= 0.
ShiftedLogNormal fit_shifted_lognormal(const LoadStats& stats);

struct LoadProfileOptions {
  /// Amplitude of the shared diurnal factor mixed into every bus.
  double diurnal_amplitude = 0.3;
  Index steps_per_day = 24;
  Index start_step = 0;
};

/// n x buses matrix of loads in kW, clipped to [minimum, maximum].
Matrix synth_load_profile(const LoadStats& stats, Index n, Index buses, Rng& rng,
                          const LoadProfileOptions& opts = {});

struct PowerFlowOptions {
  double pf_min = 0.9;
  double pf_max = 1.0;
  /// kW per unit of injected power.
  double power_base = 0.5;
  /// Reactive-to-active sensitivity ratio, X = x_over_r * R.
  double x_over_r = 0.5;
  /// Shunt admittance tying a DER bus to its local source.
  double der_admittance = 0.5;
  /// DER shunt for buses cut off from the slack (grid-forming operation).
  /// Empty: same as der_admittance.
  std::optional<double> island_der_admittance;
  /// Peak of the half-sine DER day profile in kW. Zero disables injection.
  double der_peak_kw = 0.5;
  Index steps_per_day = 24;
  Index start_step = 0;

  void validate() const;
};

/// Voltage sensitivity to active injections at the non-slack buses,
/// (buses-1) x (buses-1). Throws Error(kSingularSystem) if some bus has no
/// path to the slack or to a DER.
Matrix sensitivity_matrix(const GridModel& grid, const PowerFlowOptions& opts = {});

/// Voltage deviation V - 1 at non-slack buses for an n x (buses-1) load
/// matrix. Linear in the loads for a fixed random stream when der_peak_kw == 0.
Matrix voltage_deviation(const GridModel& grid, const Eigen::Ref<const Matrix>& loads, Rng& rng,
                         const PowerFlowOptions& opts = {});

/// n x buses voltage magnitudes in p.u. with the slack column fixed at 1.
Matrix linearized_power_flow(const GridModel& grid, const Eigen::Ref<const Matrix>& loads, Rng& rng,
                             const PowerFlowOptions& opts = {});

/// Removes the listed lines (zero-based bus pairs, either orientation).
/// Mesh feeders must stay connected (Error(kDisconnectedGraph)); radial
/// feeders may island only DER-backed buses (Error(kDeadIsland)).
/// Error(kUnknownBranch) for a line that does not exist.
GridModel apply_outage(const GridModel& grid, std::span<const BusPair> branches);

struct ScenarioOptions {
  PowerFlowOptions power_flow;
  LoadProfileOptions load_profile;
  double reg = 1e-10;
};

struct GridScenario {
  GridModel grid_before;
  GridModel grid_after;
  GaussianModel pre_model;
  GaussianModel post_model;
  std::vector<BusPair> outaged_branches;  // zero-based bus ids
  std::string label;

  /// Outaged lines as observed-coordinate pairs.
  std::vector<BusPair> outaged_observed() const;
};

/// Simulates n_fit + 1 steps before and after the outage, fits Gaussians to
/// the first differences of the non-slack voltages.
/// Throws Error(kInsufficientSamples) if n_fit < 10 * (buses - 1).
GridScenario build_scenario(const GridModel& grid, std::span<const BusPair> outage,
                            const LoadStats& stats, Index n_fit, Rng& rng,
                            const ScenarioOptions& opts = {});

std::string scenario_to_json(const GridScenario& scn);
GridScenario scenario_from_json(std::string_view text);

/// Geometric on {1, 2, ...} with success probability rho.
Index draw_changepoint(double rho, Rng& rng);

struct SequenceSpec {
  std::optional<Index> lambda;  // empty: draw from Geo(rho)
  double rho = 0.04;
  Index n_post = 50;
  double coverage = 1.0;

  void validate() const;
};

/// ceil(coverage * p), at least 1.
Index covered_count(double coverage, Index p);

/// Sorted random subset of covered_count(coverage, p) coordinates. Consumes
/// no randomness at full coverage.
std::vector<Index> draw_coverage_subset(double coverage, Index p, Rng& rng);

struct GeneratedSequence {
  Matrix raw;
  std::optional<Matrix> encrypted;
  Index lambda = 1;
  /// Observed coordinates kept in both streams, ascending.
  std::vector<Index> observed;
};

/// Random draws are taken in a fixed order: coverage subset, change point,
/// pre rows, post rows, noise.
GeneratedSequence gen_sequence(const GridScenario& scn, const SequenceSpec& spec,
                               const PrivacyMechanism* mech, Rng& rng);

/// Same as gen_sequence for explicit models (no coverage masking).
GeneratedSequence gen_sequence(const GaussianModel& pre, const GaussianModel& post,
                               const SequenceSpec& spec, const PrivacyMechanism* mech, Rng& rng);

/// Reads "time,bus,kw" rows (one-based bus labels, slack rows ignored) into a
/// steps x (buses-1) matrix. Missing entries are an Error(kParseError).
Matrix read_load_profile_csv(const std::filesystem::path& path, const GridModel& grid);

}  // namespace plod
