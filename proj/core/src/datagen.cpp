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

#include "plod/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <json.hpp>

#include "plod/error.hpp"

namespace plod {

namespace {

using json = nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& msg) {
  if (!ok) raise(ErrorCode::kInvalidParameter, msg);
}

double hour_angle(Index step, Index steps_per_day) {
  return kTwoPi * static_cast<double>(step % steps_per_day) / static_cast<double>(steps_per_day);
}

// Half-sine between 06:00 and 18:00 on a 24-step day.
double der_shape(Index step, Index steps_per_day) {
  const double h = 24.0 * static_cast<double>(step % steps_per_day) /
                   static_cast<double>(steps_per_day);
  return std::max(0.0, std::sin(std::numbers::pi * (h - 6.0) / 12.0));
}

json model_to_json(const GaussianModel& m) {
  json cov = json::array();
  for (Index r = 0; r < m.dim(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.dim(); ++c) row.push_back(m.cov()(r, c));
    cov.push_back(std::move(row));
  }
  return {{"mean", std::vector<double>(m.mean().data(), m.mean().data() + m.dim())},
          {"cov", std::move(cov)}};
}

GaussianModel model_from_json(const json& j) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto rows = j.at("cov").get<std::vector<std::vector<double>>>();
  const Index p = static_cast<Index>(mean.size());
  if (static_cast<Index>(rows.size()) != p) {
    raise(ErrorCode::kParseError, "scenario covariance has the wrong size");
  }
  Matrix cov(p, p);
  for (Index r = 0; r < p; ++r) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(r)].size()) != p) {
      raise(ErrorCode::kParseError, "scenario covariance row has the wrong size");
    }
    for (Index c = 0; c < p; ++c) cov(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return GaussianModel(Eigen::Map<const Vector>(mean.data(), p), cov);
}

json pairs_to_json(const std::vector<BusPair>& pairs) {
  json out = json::array();
  for (const BusPair& b : pairs) out.push_back(branch_label(b));
  return out;
}

}  // namespace

void LoadStats::validate() const {
  require(std::isfinite(minimum) && std::isfinite(maximum) && std::isfinite(mean) &&
              std::isfinite(std) && std::isfinite(skewness),
          "load statistics must be finite");
  require(minimum <= mean && mean <= maximum, "load statistics need minimum <= mean <= maximum");
  require(std > 0.0, "load standard deviation must be positive");
}

ShiftedLogNormal fit_shifted_lognormal(const LoadStats& stats) {
  stats.validate();
  if (!(stats.skewness > 0.0)) {
    raise(ErrorCode::kInfeasibleMoments,
          "a shifted log-normal needs positive skewness, got " + std::to_string(stats.skewness));
  }
  // skewness = (w + 2) sqrt(w - 1) with w = exp(s^2); increasing in w.
  const double s = stats.skewness;
  auto f = [s](double w) { return (w + 2.0) * std::sqrt(w - 1.0) - s; };
  double hi = 2.0;
  while (f(hi) < 0.0) hi *= 2.0;
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, 1.0, hi, -s, f(hi), boost::math::tools::eps_tolerance<double>(52), iters);
  const double w = 0.5 * (a + b);
  ShiftedLogNormal d;
  d.sigma = std::sqrt(std::log(w));
  d.log_scale = std::log(stats.std / std::sqrt(w * (w - 1.0)));
  d.shift = stats.mean - std::exp(d.log_scale) * std::sqrt(w);
  return d;
}

Matrix synth_load_profile(const LoadStats& stats, Index n, Index buses, Rng& rng,
                          const LoadProfileOptions& opts) {
  require(n >= 1 && buses >= 1, "load profile needs n >= 1 and at least one bus");
  require(opts.diurnal_amplitude >= 0.0 && opts.diurnal_amplitude < 1.0,
          "diurnal amplitude must lie in [0, 1)");
  require(opts.steps_per_day >= 1, "steps_per_day must be positive");
  const ShiftedLogNormal d = fit_shifted_lognormal(stats);
  const double a = opts.diurnal_amplitude;
  const double idio = std::sqrt(1.0 - a * a);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix out(n, buses);
  for (Index t = 0; t < n; ++t) {
    const double common =
        a * std::numbers::sqrt2 * std::sin(hour_angle(opts.start_step + t, opts.steps_per_day));
    for (Index b = 0; b < buses; ++b) {
      const double g = idio * z(rng) + common;
      out(t, b) = std::clamp(d.shift + std::exp(d.log_scale + d.sigma * g), stats.minimum,
                             stats.maximum);
    }
  }
  return out;
}

void PowerFlowOptions::validate() const {
  require(0.0 < pf_min && pf_min <= pf_max && pf_max <= 1.0, "power factor range must lie in (0, 1]");
  require(power_base > 0.0, "power_base must be positive");
  require(x_over_r >= 0.0, "x_over_r must be non-negative");
  require(der_admittance >= 0.0 && der_peak_kw >= 0.0, "DER parameters must be non-negative");
  require(island_der_admittance.value_or(0.0) >= 0.0, "island DER admittance must be non-negative");
  require(steps_per_day >= 1, "steps_per_day must be positive");
}

Matrix sensitivity_matrix(const GridModel& grid, const PowerFlowOptions& opts) {
  opts.validate();
  const Index q = grid.observed_dim();
  Matrix lap = Matrix::Zero(q, q);
  for (const Branch& br : grid.branches) {
    const bool fs = br.from == grid.slack;
    const bool ts = br.to == grid.slack;
    if (!fs) lap(grid.observed_index(br.from), grid.observed_index(br.from)) += br.y;
    if (!ts) lap(grid.observed_index(br.to), grid.observed_index(br.to)) += br.y;
    if (!fs && !ts) {
      const Index i = grid.observed_index(br.from);
      const Index k = grid.observed_index(br.to);
      lap(i, k) -= br.y;
      lap(k, i) -= br.y;
    }
  }
  const auto comp = connected_components(grid);
  const Index slack_comp = comp[static_cast<std::size_t>(grid.slack)];
  for (Index d : grid.ders) {
    if (d == grid.slack) continue;
    const bool islanded = comp[static_cast<std::size_t>(d)] != slack_comp;
    const double y = islanded ? opts.island_der_admittance.value_or(opts.der_admittance)
                              : opts.der_admittance;
    lap(grid.observed_index(d), grid.observed_index(d)) += y;
  }
  Eigen::LDLT<Matrix> ldlt(lap);
  const double scale = lap.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * std::max(scale, 1.0)) {
    raise(ErrorCode::kSingularSystem,
          "grid Laplacian is singular: some bus has no path to the slack or a DER");
  }
  return ldlt.solve(Matrix::Identity(q, q));
}

Matrix voltage_deviation(const GridModel& grid, const Eigen::Ref<const Matrix>& loads, Rng& rng,
                         const PowerFlowOptions& opts) {
  const Index q = grid.observed_dim();
  if (loads.cols() != q) {
    raise(ErrorCode::kDimensionMismatch, "load matrix needs one column per non-slack bus");
  }
  const Matrix sens = sensitivity_matrix(grid, opts);
  std::uniform_real_distribution<double> pf(opts.pf_min, opts.pf_max);
  std::uniform_real_distribution<double> cloud(0.5, 1.0);
  std::vector<Index> der_cols;
  for (Index d : grid.ders) {
    if (d != grid.slack) der_cols.push_back(grid.observed_index(d));
  }
  Matrix dev(loads.rows(), q);
  Vector inj(q);
  for (Index t = 0; t < loads.rows(); ++t) {
    for (Index b = 0; b < q; ++b) {
      const double tan_phi = std::tan(std::acos(pf(rng)));
      inj(b) = loads(t, b) + opts.x_over_r * loads(t, b) * tan_phi;
    }
    const double shape = der_shape(opts.start_step + t, opts.steps_per_day);
    for (Index c : der_cols) {
      const double c_draw = cloud(rng);
      inj(c) -= opts.der_peak_kw * shape * c_draw;
    }
    dev.row(t) = -(sens * inj).transpose() / opts.power_base;
  }
  return dev;
}

Matrix linearized_power_flow(const GridModel& grid, const Eigen::Ref<const Matrix>& loads, Rng& rng,
                             const PowerFlowOptions& opts) {
  const Matrix dev = voltage_deviation(grid, loads, rng, opts);
  Matrix v = Matrix::Ones(loads.rows(), grid.buses);
  for (Index o = 0; o < grid.observed_dim(); ++o) v.col(grid.bus_of(o)).array() += dev.col(o).array();
  return v;
}

GridModel apply_outage(const GridModel& grid, std::span<const BusPair> branches) {
  GridModel out = grid;
  for (const BusPair& b : branches) {
    const Index j = out.find_branch(b.i, b.k);
    if (j < 0) raise(ErrorCode::kUnknownBranch, "no branch " + branch_label(b) + " in the grid");
    out.branches.erase(out.branches.begin() + j);
  }
  const auto comp = connected_components(out);
  const Index slack_comp = comp[static_cast<std::size_t>(out.slack)];
  for (Index bus = 0; bus < out.buses; ++bus) {
    if (comp[static_cast<std::size_t>(bus)] == slack_comp) continue;
    if (grid.kind == GridKind::kMesh) {
      raise(ErrorCode::kDisconnectedGraph,
            "outage disconnects bus " + std::to_string(bus + 1) + " of a meshed feeder");
    }
    if (!out.has_der(bus)) {
      raise(ErrorCode::kDeadIsland,
            "outage islands bus " + std::to_string(bus + 1) + " which has no DER");
    }
  }
  return out;
}

std::vector<BusPair> GridScenario::outaged_observed() const {
  return observed_pairs(grid_before, outaged_branches);
}

GridScenario build_scenario(const GridModel& grid, std::span<const BusPair> outage,
                            const LoadStats& stats, Index n_fit, Rng& rng,
                            const ScenarioOptions& opts) {
  const Index q = grid.observed_dim();
  if (outage.empty()) raise(ErrorCode::kInvalidParameter, "a scenario needs at least one outaged branch");
  if (n_fit < 10 * q) {
    raise(ErrorCode::kInsufficientSamples,
          "n_fit must be at least 10 * p = " + std::to_string(10 * q));
  }
  GridModel after = apply_outage(grid, outage);

  auto simulate = [&](const GridModel& g) {
    const Matrix loads = synth_load_profile(stats, n_fit + 1, q, rng, opts.load_profile);
    const Matrix dev = voltage_deviation(g, loads, rng, opts.power_flow);
    const Matrix inc = dev.bottomRows(n_fit) - dev.topRows(n_fit);
    return GaussianModel::fit(inc, opts.reg);
  };
  GaussianModel pre = simulate(grid);
  GaussianModel post = simulate(after);

  std::vector<BusPair> lines;
  std::string label;
  for (const BusPair& b : outage) {
    lines.push_back(ordered(b));
    if (!label.empty()) label += "+";
    label += branch_label(ordered(b));
  }
  return GridScenario{grid, std::move(after), std::move(pre), std::move(post), std::move(lines),
                      (grid.name.empty() ? std::string("grid") : grid.name) + ":" + label};
}

std::string scenario_to_json(const GridScenario& scn) {
  json doc;
  doc["schema_version"] = 1;
  doc["label"] = scn.label;
  doc["grid_before"] = json::parse(topology_to_json(scn.grid_before));
  doc["grid_after"] = json::parse(topology_to_json(scn.grid_after));
  doc["outaged_branches"] = pairs_to_json(scn.outaged_branches);
  doc["pre_model"] = model_to_json(scn.pre_model);
  doc["post_model"] = model_to_json(scn.post_model);
  return doc.dump(1);
}

GridScenario scenario_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    GridModel before = parse_topology(doc.at("grid_before").dump());
    before.name = doc.at("grid_before").value("name", std::string{});
    // The post-outage grid may be islanded, so it is rebuilt rather than validated.
    std::vector<BusPair> lines;
    for (const auto& l : doc.at("outaged_branches")) {
      lines.push_back(parse_branch_label(l.get<std::string>()));
    }
    GridModel after = apply_outage(before, lines);
    return GridScenario{std::move(before),
                        std::move(after),
                        model_from_json(doc.at("pre_model")),
                        model_from_json(doc.at("post_model")),
                        std::move(lines),
                        doc.value("label", std::string{})};
  } catch (const json::exception& e) {
    raise(ErrorCode::kParseError, std::string("scenario JSON: ") + e.what());
  }
}

Index draw_changepoint(double rho, Rng& rng) {
  if (!(rho > 0.0 && rho < 1.0)) raise(ErrorCode::kInvalidParameter, "rho must lie in (0, 1)");
  std::geometric_distribution<Index> geo(rho);
  return geo(rng) + 1;
}

void SequenceSpec::validate() const {
  require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
  require(n_post >= 1, "n_post must be at least 1");
  require(coverage > 0.0 && coverage <= 1.0, "coverage must lie in (0, 1]");
  require(!lambda || *lambda >= 1, "lambda must be at least 1");
}

Index covered_count(double coverage, Index p) {
  const auto m = static_cast<Index>(std::ceil(coverage * static_cast<double>(p) - 1e-9));
  return std::clamp<Index>(m, 1, p);
}

namespace {

GeneratedSequence draw_rows(const GaussianModel& pre, const GaussianModel& post,
                            const SequenceSpec& spec, const PrivacyMechanism* mech, Rng& rng,
                            std::vector<Index> observed) {
  GeneratedSequence out;
  out.observed = std::move(observed);
  out.lambda = spec.lambda ? *spec.lambda : draw_changepoint(spec.rho, rng);
  const Index n_pre = out.lambda - 1;
  out.raw.resize(n_pre + spec.n_post, pre.dim());
  if (n_pre > 0) out.raw.topRows(n_pre) = pre.sample(n_pre, rng);
  out.raw.bottomRows(spec.n_post) = post.sample(spec.n_post, rng);
  if (mech != nullptr) out.encrypted = mech->randomize_rows(out.raw, rng);
  return out;
}

}  // namespace

GeneratedSequence gen_sequence(const GaussianModel& pre, const GaussianModel& post,
                               const SequenceSpec& spec, const PrivacyMechanism* mech, Rng& rng) {
  spec.validate();
  if (pre.dim() != post.dim()) raise(ErrorCode::kDimensionMismatch, "pre/post dimensions differ");
  std::vector<Index> all(static_cast<std::size_t>(pre.dim()));
  for (Index i = 0; i < pre.dim(); ++i) all[static_cast<std::size_t>(i)] = i;
  return draw_rows(pre, post, spec, mech, rng, std::move(all));
}

std::vector<Index> draw_coverage_subset(double coverage, Index p, Rng& rng) {
  if (!(coverage > 0.0 && coverage <= 1.0)) {
    raise(ErrorCode::kInvalidParameter, "coverage must lie in (0, 1]");
  }
  const Index m = covered_count(coverage, p);
  std::vector<Index> idx(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (m == p) return idx;
  // Partial Fisher-Yates.
  for (Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Index> pick(i, p - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  return idx;
}

GeneratedSequence gen_sequence(const GridScenario& scn, const SequenceSpec& spec,
                               const PrivacyMechanism* mech, Rng& rng) {
  spec.validate();
  const Index p = scn.pre_model.dim();
  if (scn.post_model.dim() != p) raise(ErrorCode::kDimensionMismatch, "pre/post dimensions differ");
  std::vector<Index> idx = draw_coverage_subset(spec.coverage, p, rng);
  if (static_cast<Index>(idx.size()) < p) {
    const GaussianModel pre = scn.pre_model.marginal(idx);
    const GaussianModel post = scn.post_model.marginal(idx);
    return draw_rows(pre, post, spec, mech, rng, std::move(idx));
  }
  return draw_rows(scn.pre_model, scn.post_model, spec, mech, rng, std::move(idx));
}

Matrix read_load_profile_csv(const std::filesystem::path& path, const GridModel& grid) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::kIoError, "cannot open load profile " + path.string());
  std::string line;
  if (!std::getline(in, line)) raise(ErrorCode::kParseError, "empty load profile");
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "time,bus,kw") raise(ErrorCode::kParseError, "load profile header must be time,bus,kw");
  std::map<std::pair<Index, Index>, double> cells;
  Index max_t = -1;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      raise(ErrorCode::kParseError, "load profile line " + std::to_string(lineno) + " needs three fields");
    }
    try {
      const Index t = std::stoll(a);
      const Index bus = std::stoll(b) - 1;
      const double kw = std::stod(c);
      if (t < 0 || bus < 0 || bus >= grid.buses) throw std::out_of_range("index");
      if (bus == grid.slack) continue;
      cells[{t, grid.observed_index(bus)}] = kw;
      max_t = std::max(max_t, t);
    } catch (const std::logic_error&) {
      raise(ErrorCode::kParseError, "load profile line " + std::to_string(lineno) + " is malformed");
    }
  }
  if (max_t < 0) raise(ErrorCode::kParseError, "load profile has no rows");
  const Index q = grid.observed_dim();
  Matrix out(max_t + 1, q);
  for (Index t = 0; t <= max_t; ++t) {
    for (Index o = 0; o < q; ++o) {
      const auto it = cells.find({t, o});
      if (it == cells.end()) {
        raise(ErrorCode::kParseError, "load profile misses time " + std::to_string(t) + " bus " +
                                          std::to_string(grid.bus_of(o) + 1));
      }
      out(t, o) = it->second;
    }
  }
  return out;
}

}  // namespace plod
