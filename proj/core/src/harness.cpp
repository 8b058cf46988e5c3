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

#include "plod/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "plod/csv.hpp"
#include "plod/error.hpp"

namespace plod {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kScenarioStream = 0x5ce7a610ULL;

[[noreturn]] void config_error(const std::string& msg) { raise(ErrorCode::kConfigError, msg); }

void check(bool ok, const std::string& msg) {
  if (!ok) config_error(msg);
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::uint64_t as_seed(const TomlValue& v, std::string_view key) {
  const std::int64_t s = v.as_int(key);
  check(s >= 0, std::string(key) + " must be non-negative");
  return static_cast<std::uint64_t>(s);
}

Index as_count(const TomlValue& v, std::string_view key) {
  return static_cast<Index>(v.as_int(key));
}

using Setter = std::function<void(ExperimentConfig&, const TomlValue&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"topology", [](auto& c, const auto& v, auto k) { c.topology = v.as_string(k); }},
      {"outage", [](auto& c, const auto& v, auto k) { c.outage = v.as_string_list(k); }},
      {"scenario_file", [](auto& c, const auto& v, auto k) { c.scenario_file = v.as_string(k); }},
      {"scenario_seed", [](auto& c, const auto& v, auto k) { c.scenario_seed = as_seed(v, k); }},
      {"n_fit", [](auto& c, const auto& v, auto k) { c.n_fit = as_count(v, k); }},
      {"load.minimum", [](auto& c, const auto& v, auto k) { c.load_stats.minimum = v.as_double(k); }},
      {"load.maximum", [](auto& c, const auto& v, auto k) { c.load_stats.maximum = v.as_double(k); }},
      {"load.mean", [](auto& c, const auto& v, auto k) { c.load_stats.mean = v.as_double(k); }},
      {"load.std", [](auto& c, const auto& v, auto k) { c.load_stats.std = v.as_double(k); }},
      {"load.skewness", [](auto& c, const auto& v, auto k) { c.load_stats.skewness = v.as_double(k); }},
      {"load.diurnal_amplitude",
       [](auto& c, const auto& v, auto k) {
         c.scenario_options.load_profile.diurnal_amplitude = v.as_double(k);
       }},
      {"power_flow.pf_min",
       [](auto& c, const auto& v, auto k) { c.scenario_options.power_flow.pf_min = v.as_double(k); }},
      {"power_flow.pf_max",
       [](auto& c, const auto& v, auto k) { c.scenario_options.power_flow.pf_max = v.as_double(k); }},
      {"power_flow.power_base",
       [](auto& c, const auto& v, auto k) { c.scenario_options.power_flow.power_base = v.as_double(k); }},
      {"power_flow.x_over_r",
       [](auto& c, const auto& v, auto k) { c.scenario_options.power_flow.x_over_r = v.as_double(k); }},
      {"power_flow.der_admittance",
       [](auto& c, const auto& v, auto k) {
         c.scenario_options.power_flow.der_admittance = v.as_double(k);
       }},
      {"power_flow.der_peak_kw",
       [](auto& c, const auto& v, auto k) { c.scenario_options.power_flow.der_peak_kw = v.as_double(k); }},
      {"scenario.reg", [](auto& c, const auto& v, auto k) { c.scenario_options.reg = v.as_double(k); }},
      {"detectors", [](auto& c, const auto& v, auto k) { c.detectors = v.as_string_list(k); }},
      {"gammas", [](auto& c, const auto& v, auto k) { c.gammas = v.as_double_list(k); }},
      {"rho", [](auto& c, const auto& v, auto k) { c.rho = v.as_double(k); }},
      {"alphas", [](auto& c, const auto& v, auto k) { c.alphas = v.as_double_list(k); }},
      {"sigma_e2", [](auto& c, const auto& v, auto k) { c.sigma_e2 = v.as_double(k); }},
      {"sensitivity", [](auto& c, const auto& v, auto k) { c.sensitivity = v.as_double(k); }},
      {"replications", [](auto& c, const auto& v, auto k) { c.replications = as_count(v, k); }},
      {"seed", [](auto& c, const auto& v, auto k) { c.seed = as_seed(v, k); }},
      {"coverages", [](auto& c, const auto& v, auto k) { c.coverages = v.as_double_list(k); }},
      {"n_post", [](auto& c, const auto& v, auto k) { c.n_post = as_count(v, k); }},
      {"localize", [](auto& c, const auto& v, auto k) { c.localize = v.as_bool(k); }},
      {"localization.delta_max",
       [](auto& c, const auto& v, auto k) { c.localization.delta_max = v.as_double(k); }},
      {"localization.delta_min",
       [](auto& c, const auto& v, auto k) { c.localization.delta_min = v.as_double(k); }},
      {"localization.window",
       [](auto& c, const auto& v, auto k) { c.localization.window = as_count(v, k); }},
      {"localization.subtract_noise",
       [](auto& c, const auto& v, auto k) { c.localization.subtract_noise = v.as_bool(k); }},
      {"threads",
       [](auto& c, const auto& v, auto k) {
         const auto t = v.as_int(k);
         check(t >= 0, "threads must be non-negative");
         c.threads = static_cast<unsigned>(t);
       }},
      {"record_replications",
       [](auto& c, const auto& v, auto k) { c.record_replications = v.as_bool(k); }},
      {"tradeoff.sigma_e2",
       [](auto& c, const auto& v, auto k) { c.tradeoff_sigma_e2 = v.as_double_list(k); }},
      {"tradeoff.epsilons", [](auto& c, const auto& v, auto k) { c.epsilons = v.as_double_list(k); }},
      {"out", [](auto& c, const auto& v, auto k) { c.out = v.as_string(k); }},
      {"format", [](auto& c, const auto& v, auto k) { c.format = parse_output_format(v.as_string(k)); }},
  };
  return table;
}

}  // namespace

OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "json") return OutputFormat::kJson;
  config_error("format must be csv or json, got '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  check(topology.size() > 0 || scenario_file.size() > 0, "no topology or scenario file given");
  check(!outage.empty() || !scenario_file.empty(), "outage list is empty");
  check(n_fit >= 1, "n_fit must be positive");
  check(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
  check(!alphas.empty(), "alphas is empty");
  for (double a : alphas) check(a > 0.0 && a < 1.0, "every alpha must lie in (0, 1)");
  check(sigma_e2 > 0.0 && std::isfinite(sigma_e2), "sigma_e2 must be positive");
  check(sensitivity > 0.0 && std::isfinite(sensitivity), "sensitivity must be positive");
  check(replications >= 1, "replications must be positive");
  check(!coverages.empty(), "coverages is empty");
  for (double c : coverages) check(c > 0.0 && c <= 1.0, "every coverage must lie in (0, 1]");
  check(n_post >= 1, "n_post must be positive");
  check(!detectors.empty(), "no detectors configured");
  check(!gammas.empty(), "gammas is empty");
  for (double g : gammas) check(g >= 1.0 && std::isfinite(g), "every gamma must be >= 1");
  check(localization.delta_min >= 0.0 && localization.delta_min < localization.delta_max &&
            localization.delta_max <= 1.0,
        "localization thresholds need 0 <= delta_min < delta_max <= 1");
  check(localization.window >= 1, "localization.window must be positive");
  for (double s : tradeoff_sigma_e2) check(s > 0.0, "tradeoff.sigma_e2 entries must be positive");
  for (double e : epsilons) check(e >= 0.0 && std::isfinite(e), "epsilons must be non-negative");
  try {
    load_stats.validate();
    scenario_options.power_flow.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  (void)expand_detectors(*this);
}

ExperimentConfig config_from_toml(const TomlTable& table, ExperimentConfig base) {
  const auto& known = setters();
  for (const auto& [key, value] : table) {
    std::string_view k = key;
    // "experiment.rho" and "rho" are equivalent.
    if (k.starts_with("experiment.")) k.remove_prefix(11);
    std::string alias(k);
    if (alias == "alpha") alias = "alphas";
    if (alias == "gamma") alias = "gammas";
    if (alias == "coverage") alias = "coverages";
    const auto it = known.find(alias);
    if (it == known.end()) config_error("unknown config key '" + key + "'");
    it->second(base, value, key);
  }
  return base;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return config_from_toml(load_toml(path));
}

std::vector<DetectorSpec> expand_detectors(const ExperimentConfig& cfg) {
  std::vector<DetectorSpec> out;
  auto push = [&](DetectorSpec s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  };
  for (const std::string& name : cfg.detectors) {
    if (name == "mitigated") {
      for (double g : cfg.gammas) {
        push(g == 1.0 ? DetectorSpec{DetectorKind::kMitigated, 1.0}
                      : DetectorSpec{DetectorKind::kVarianceScaled, g});
      }
      continue;
    }
    if (name == "variance_scaled") {
      for (double g : cfg.gammas) push({DetectorKind::kVarianceScaled, g});
      continue;
    }
    push(parse_detector_spec(name));
  }
  return out;
}

GridScenario make_scenario(const ExperimentConfig& cfg) {
  if (!cfg.scenario_file.empty()) {
    std::ifstream in(cfg.scenario_file);
    if (!in) raise(ErrorCode::kConfigError, "cannot open scenario file " + cfg.scenario_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
  }
  const GridModel grid = load_topology(resolve_topology(cfg.topology));
  std::vector<BusPair> lines;
  for (const std::string& l : cfg.outage) lines.push_back(parse_branch_label(l));
  Rng rng(derive_seed(cfg.scenario_seed, kScenarioStream));
  return build_scenario(grid, lines, cfg.load_stats, cfg.n_fit, rng, cfg.scenario_options);
}

EvalScenario eval_scenario(const GridScenario& scn) {
  return EvalScenario{scn.label, scn.pre_model, scn.post_model, scn.outaged_observed(),
                      scn.grid_before};
}

SummaryRow aggregate(std::span<const ReplicationRecord> records, bool with_localization) {
  SummaryRow row;
  row.replications = static_cast<Index>(records.size());
  if (records.empty()) return row;
  row.detector = records.front().detector;
  row.alpha = records.front().alpha;
  row.coverage = records.front().coverage;
  double sum = 0.0;
  double sum_sq = 0.0;
  Index correct = 0;
  for (const ReplicationRecord& r : records) {
    if (r.localized_correct) ++correct;
    if (!r.tau) {
      ++row.no_alarm;
      continue;
    }
    if (*r.tau < r.lambda) {
      ++row.false_alarms;
      continue;
    }
    ++row.detections;
    const double d = static_cast<double>(*r.tau - r.lambda);
    sum += d;
    sum_sq += d * d;
  }
  const double n = static_cast<double>(row.replications);
  row.far = static_cast<double>(row.false_alarms) / n;
  row.far_stderr = std::sqrt(row.far * (1.0 - row.far) / n);
  if (row.detections > 0) {
    const double m = static_cast<double>(row.detections);
    row.add_mean = sum / m;
    if (row.detections > 1) {
      const double var = std::max(0.0, (sum_sq - m * *row.add_mean * *row.add_mean) / (m - 1.0));
      row.add_stderr = std::sqrt(var / m);
    }
  }
  if (with_localization) row.localization_accuracy = static_cast<double>(correct) / n;
  return row;
}

namespace {

std::string pair_label(const EvalScenario& scn, std::span<const Index> coords, BusPair local) {
  const Index a = coords[static_cast<std::size_t>(local.i)];
  const Index b = coords[static_cast<std::size_t>(local.k)];
  if (scn.grid) return branch_label({scn.grid->bus_of(a), scn.grid->bus_of(b)});
  return branch_label({a, b});
}

// Ground truth restated in subset coordinates; empty optional when some
// outaged endpoint is not observed.
std::optional<std::vector<BusPair>> truth_in_subset(const EvalScenario& scn,
                                                    std::span<const Index> coords) {
  std::vector<BusPair> out;
  auto pos = [&](Index o) -> Index {
    const auto it = std::lower_bound(coords.begin(), coords.end(), o);
    return (it != coords.end() && *it == o) ? static_cast<Index>(it - coords.begin()) : -1;
  };
  for (const BusPair& t : scn.truth) {
    const Index a = pos(t.i);
    const Index b = pos(t.k);
    if (a < 0 || b < 0) return std::nullopt;
    out.push_back(ordered({a, b}));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Shared {
  const ExperimentConfig& cfg;
  const EvalScenario& scn;
  std::vector<DetectorSpec> specs;
  PrivacyMechanism mech;
  std::vector<std::shared_ptr<const DetectorModels>> full_models;
  std::vector<double> log_thresholds;
  double top_threshold;
};

std::vector<ReplicationRecord> run_replication(const Shared& sh, Index r) {
  const ExperimentConfig& cfg = sh.cfg;
  const Index p = sh.scn.pre.dim();
  const auto n_cov = cfg.coverages.size();
  const auto n_det = sh.specs.size();
  const auto n_alpha = cfg.alphas.size();
  std::vector<ReplicationRecord> out;
  out.reserve(n_cov * n_det * n_alpha);

  for (std::size_t ci = 0; ci < n_cov; ++ci) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r), ci));
    const std::vector<Index> coords = draw_coverage_subset(cfg.coverages[ci], p, rng);
    const bool full = static_cast<Index>(coords.size()) == p;
    std::optional<GaussianModel> pre_sub, post_sub;
    if (!full) {
      pre_sub = sh.scn.pre.marginal(coords);
      post_sub = sh.scn.post.marginal(coords);
    }
    const GaussianModel& pre = full ? sh.scn.pre : *pre_sub;
    const GaussianModel& post = full ? sh.scn.post : *post_sub;
    const Index q = pre.dim();

    SequenceSpec seq_spec;
    seq_spec.rho = cfg.rho;
    seq_spec.n_post = cfg.n_post;
    const GeneratedSequence seq = gen_sequence(pre, post, seq_spec, &sh.mech, rng);
    const auto truth = truth_in_subset(sh.scn, coords);
    const bool can_localize = cfg.localize && q >= 3;

    for (std::size_t d = 0; d < n_det; ++d) {
      const DetectorSpec& spec = sh.specs[d];
      auto models = full ? sh.full_models[d]
                         : std::make_shared<const DetectorModels>(spec, pre, post, sh.mech);
      const Matrix& stream = spec.uses_encrypted_data() ? *seq.encrypted : seq.raw;
      Detector det(models, cfg.rho, cfg.alphas.front());
      std::vector<std::optional<Index>> taus(n_alpha);
      for (Index n = 0; n < stream.rows(); ++n) {
        const double s = det.step(stream.row(n).transpose()).log_stat;
        for (std::size_t a = 0; a < n_alpha; ++a) {
          if (!taus[a] && s >= sh.log_thresholds[a]) taus[a] = n + 1;
        }
        if (s >= sh.top_threshold) break;
      }

      for (std::size_t a = 0; a < n_alpha; ++a) {
        ReplicationRecord rec;
        rec.replication = r;
        rec.coverage = cfg.coverages[ci];
        rec.detector = spec.label();
        rec.alpha = cfg.alphas[a];
        rec.lambda = seq.lambda;
        rec.tau = taus[a];
        rec.false_alarm = rec.tau && *rec.tau < rec.lambda;
        if (rec.tau && can_localize) {
          Rng wrng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r), ci, 1 + d * n_alpha + a));
          const Index w = cfg.localization.window;
          // Window covers times tau+1 .. tau+w; those before lambda are pre-change.
          const Index n_pre = std::clamp<Index>(seq.lambda - 1 - *rec.tau, 0, w);
          Matrix window(w, q);
          if (n_pre > 0) window.topRows(n_pre) = pre.sample(n_pre, wrng);
          if (w - n_pre > 0) window.bottomRows(w - n_pre) = post.sample(w - n_pre, wrng);
          Matrix before = pre.cov();
          if (spec.uses_encrypted_data()) {
            window = sh.mech.randomize_rows(window, wrng);
            before.diagonal().array() += sh.mech.sigma_e2();
          }
          Matrix after = estimate_post_covariance(window, cfg.localization.reg).cov();
          if (spec.uses_encrypted_data() && cfg.localization.subtract_noise) {
            before = remove_noise(before, sh.mech.sigma_e2());
            after = remove_noise(after, sh.mech.sigma_e2());
          }
          const LocalizationReport rep = localize(before, after, {}, cfg.localization);
          for (const BusPair& b : rep.outaged) rec.localized.push_back(pair_label(sh.scn, coords, b));
          rec.localized_correct = truth && rep.outaged == *truth;
        }
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

}  // namespace

MonteCarloSummary run_monte_carlo(const ExperimentConfig& cfg, const EvalScenario& scn) {
  cfg.validate();
  if (scn.pre.dim() != scn.post.dim()) {
    raise(ErrorCode::kDimensionMismatch, "scenario pre/post dimensions differ");
  }
  Shared sh{cfg, scn, expand_detectors(cfg), PrivacyMechanism(cfg.sigma_e2, cfg.sensitivity), {}, {}, 0.0};
  for (const DetectorSpec& s : sh.specs) {
    sh.full_models.push_back(std::make_shared<const DetectorModels>(s, scn.pre, scn.post, sh.mech));
  }
  for (double a : cfg.alphas) sh.log_thresholds.push_back(log_threshold(cfg.rho, a));
  sh.top_threshold = *std::max_element(sh.log_thresholds.begin(), sh.log_thresholds.end());

  const Index reps = cfg.replications;
  std::vector<std::vector<ReplicationRecord>> per_rep(static_cast<std::size_t>(reps));
  unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<Index>(workers, reps));

  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto work = [&] {
    while (!failed.load()) {
      const Index r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        per_rep[static_cast<std::size_t>(r)] = run_replication(sh, r);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  if (first_error) std::rethrow_exception(first_error);

  MonteCarloSummary summary;
  summary.scenario = scn.label;
  summary.dim = scn.pre.dim();
  summary.kl = kl_divergence(scn.post, scn.pre);
  summary.kl_encrypted =
      kl_divergence(scn.post.encrypted(cfg.sigma_e2), scn.pre.encrypted(cfg.sigma_e2));
  summary.rho = cfg.rho;
  summary.sigma_e2 = cfg.sigma_e2;
  summary.seed = cfg.seed;
  summary.replications = reps;

  const std::size_t n_det = sh.specs.size();
  const std::size_t n_alpha = cfg.alphas.size();
  const bool with_loc = cfg.localize && scn.pre.dim() >= 3;
  std::vector<ReplicationRecord> cell;
  for (std::size_t ci = 0; ci < cfg.coverages.size(); ++ci) {
    for (std::size_t d = 0; d < n_det; ++d) {
      for (std::size_t a = 0; a < n_alpha; ++a) {
        cell.clear();
        const std::size_t slot = (ci * n_det + d) * n_alpha + a;
        for (const auto& recs : per_rep) cell.push_back(recs[slot]);
        SummaryRow row = aggregate(cell, with_loc);
        row.gamma = sh.specs[d].gamma;
        if (static_cast<double>(row.no_alarm) > 0.01 * static_cast<double>(reps)) {
          std::ostringstream os;
          os << row.detector << " alpha=" << row.alpha << " coverage=" << row.coverage << ": "
             << row.no_alarm << " of " << reps << " replications never alarmed";
          summary.warnings.push_back(os.str());
        }
        summary.rows.push_back(std::move(row));
      }
    }
  }
  if (cfg.record_replications) {
    for (auto& recs : per_rep) {
      for (auto& rec : recs) summary.records.push_back(std::move(rec));
    }
  }
  return summary;
}

MonteCarloSummary run_monte_carlo(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_monte_carlo(cfg, eval_scenario(make_scenario(cfg)));
}

std::vector<DelayCurveRow> asymptotic_delay_curve(const ExperimentConfig& cfg,
                                                  const EvalScenario& scn) {
  ExperimentConfig c = cfg;
  c.coverages = {1.0};
  const MonteCarloSummary s = run_monte_carlo(c, scn);
  const double bound = 1.0 / (-std::log1p(-cfg.rho) + s.kl);
  std::vector<DelayCurveRow> out;
  for (const SummaryRow& row : s.rows) {
    DelayCurveRow d;
    d.detector = row.detector;
    d.alpha = row.alpha;
    d.add_mean = row.add_mean;
    d.add_stderr = row.add_stderr;
    if (row.add_mean) d.ratio = *row.add_mean / std::abs(std::log(row.alpha));
    d.bound = bound;
    d.far = row.far;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<CoverageRow> coverage_experiment(const ExperimentConfig& cfg, const EvalScenario& scn,
                                             std::span<const double> ratios) {
  if (std::find(ratios.begin(), ratios.end(), 1.0) == ratios.end()) {
    config_error("coverage ratios must include 1.0 as the baseline");
  }
  ExperimentConfig c = cfg;
  c.coverages.assign(ratios.begin(), ratios.end());
  const MonteCarloSummary s = run_monte_carlo(c, scn);
  std::map<std::pair<std::string, double>, const SummaryRow*> base;
  for (const SummaryRow& row : s.rows) {
    if (row.coverage == 1.0) base[{row.detector, row.alpha}] = &row;
  }
  std::vector<CoverageRow> out;
  for (const SummaryRow& row : s.rows) {
    const SummaryRow& b = *base.at({row.detector, row.alpha});
    CoverageRow r;
    r.detector = row.detector;
    r.alpha = row.alpha;
    r.coverage = row.coverage;
    r.add_mean = row.add_mean;
    r.far = row.far;
    if (row.add_mean && b.add_mean) {
      r.delta_add = *row.add_mean - *b.add_mean;
      if (&row == &b) {
        r.delta_add_stderr = 0.0;
      } else if (row.add_stderr && b.add_stderr) {
        r.delta_add_stderr = std::hypot(*row.add_stderr, *b.add_stderr);
      }
    }
    r.delta_far = row.far - b.far;
    r.delta_far_stderr = &row == &b ? 0.0 : std::hypot(row.far_stderr, b.far_stderr);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TradeoffRow> tradeoff_report(std::span<const PrivacyMechanism> mechs,
                                         std::span<const double> alphas,
                                         std::span<const double> epsilons) {
  std::vector<TradeoffRow> out;
  for (const PrivacyMechanism& m : mechs) {
    TradeoffRow row;
    row.sigma_e2 = m.sigma_e2();
    row.sensitivity = m.sensitivity();
    row.mu = m.gdp_parameter();
    row.curve = tradeoff_curve(row.mu, alphas).points;
    for (double e : epsilons) row.delta.emplace_back(e, dp_delta(e, m));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> alpha_grid(Index points) {
  if (points < 2) raise(ErrorCode::kInvalidParameter, "alpha grid needs at least two points");
  std::vector<double> out;
  for (Index i = 0; i < points; ++i) {
    out.push_back(static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return out;
}

const char* const kSummaryCsvHeader =
    "detector,gamma,alpha,coverage,replications,detections,false_alarms,no_alarm,"
    "add_mean,add_stderr,far,far_stderr,localization_accuracy";

void write_summary_csv(std::ostream& out, const MonteCarloSummary& summary) {
  out << kSummaryCsvHeader << '\n';
  for (const SummaryRow& r : summary.rows) {
    out << r.detector << ',' << format_double(r.gamma) << ',' << format_double(r.alpha) << ','
        << format_double(r.coverage) << ',' << r.replications << ',' << r.detections << ','
        << r.false_alarms << ',' << r.no_alarm << ',' << opt_cell(r.add_mean) << ','
        << opt_cell(r.add_stderr) << ',' << format_double(r.far) << ','
        << format_double(r.far_stderr) << ',' << opt_cell(r.localization_accuracy) << '\n';
  }
}

std::string summary_to_json(const MonteCarloSummary& s) {
  json doc;
  doc["schema_version"] = s.schema_version;
  doc["scenario"] = s.scenario;
  doc["dim"] = s.dim;
  doc["kl"] = s.kl;
  doc["kl_encrypted"] = s.kl_encrypted;
  doc["rho"] = s.rho;
  doc["sigma_e2"] = s.sigma_e2;
  doc["seed"] = s.seed;
  doc["replications"] = s.replications;
  doc["warnings"] = s.warnings;
  doc["rows"] = json::array();
  for (const SummaryRow& r : s.rows) {
    doc["rows"].push_back({{"detector", r.detector},
                           {"gamma", r.gamma},
                           {"alpha", r.alpha},
                           {"coverage", r.coverage},
                           {"replications", r.replications},
                           {"detections", r.detections},
                           {"false_alarms", r.false_alarms},
                           {"no_alarm", r.no_alarm},
                           {"add_mean", opt_json(r.add_mean)},
                           {"add_stderr", opt_json(r.add_stderr)},
                           {"far", r.far},
                           {"far_stderr", r.far_stderr},
                           {"localization_accuracy", opt_json(r.localization_accuracy)}});
  }
  if (!s.records.empty()) {
    doc["records"] = json::array();
    for (const ReplicationRecord& r : s.records) {
      doc["records"].push_back({{"replication", r.replication},
                                {"coverage", r.coverage},
                                {"detector", r.detector},
                                {"alpha", r.alpha},
                                {"lambda", r.lambda},
                                {"tau", r.tau ? json(*r.tau) : json(nullptr)},
                                {"false_alarm", r.false_alarm},
                                {"localized_correct", r.localized_correct},
                                {"localized", r.localized}});
    }
  }
  return doc.dump(2) + "\n";
}

MonteCarloSummary summary_from_json(std::string_view text) {
  MonteCarloSummary s;
  try {
    const json doc = json::parse(text);
    s.schema_version = doc.at("schema_version").get<int>();
    if (s.schema_version != MonteCarloSummary::kSchemaVersion) {
      raise(ErrorCode::kParseError, "unsupported summary schema version");
    }
    s.scenario = doc.at("scenario").get<std::string>();
    s.dim = doc.at("dim").get<Index>();
    s.kl = doc.at("kl").get<double>();
    s.kl_encrypted = doc.at("kl_encrypted").get<double>();
    s.rho = doc.at("rho").get<double>();
    s.sigma_e2 = doc.at("sigma_e2").get<double>();
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.replications = doc.at("replications").get<Index>();
    s.warnings = doc.at("warnings").get<std::vector<std::string>>();
    for (const auto& j : doc.at("rows")) {
      SummaryRow r;
      r.detector = j.at("detector").get<std::string>();
      r.gamma = j.at("gamma").get<double>();
      r.alpha = j.at("alpha").get<double>();
      r.coverage = j.at("coverage").get<double>();
      r.replications = j.at("replications").get<Index>();
      r.detections = j.at("detections").get<Index>();
      r.false_alarms = j.at("false_alarms").get<Index>();
      r.no_alarm = j.at("no_alarm").get<Index>();
      r.add_mean = opt_from(j.at("add_mean"));
      r.add_stderr = opt_from(j.at("add_stderr"));
      r.far = j.at("far").get<double>();
      r.far_stderr = j.at("far_stderr").get<double>();
      r.localization_accuracy = opt_from(j.at("localization_accuracy"));
      s.rows.push_back(std::move(r));
    }
    if (doc.contains("records")) {
      for (const auto& j : doc.at("records")) {
        ReplicationRecord r;
        r.replication = j.at("replication").get<Index>();
        r.coverage = j.at("coverage").get<double>();
        r.detector = j.at("detector").get<std::string>();
        r.alpha = j.at("alpha").get<double>();
        r.lambda = j.at("lambda").get<Index>();
        if (!j.at("tau").is_null()) r.tau = j.at("tau").get<Index>();
        r.false_alarm = j.at("false_alarm").get<bool>();
        r.localized_correct = j.at("localized_correct").get<bool>();
        r.localized = j.at("localized").get<std::vector<std::string>>();
        s.records.push_back(std::move(r));
      }
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::kParseError, std::string("summary JSON: ") + e.what());
  }
  return s;
}

void write_delay_curve(std::ostream& out, std::span<const DelayCurveRow> rows, OutputFormat fmt) {
  if (fmt == OutputFormat::kJson) {
    json doc = {{"schema_version", 1}, {"rows", json::array()}};
    for (const DelayCurveRow& r : rows) {
      doc["rows"].push_back({{"detector", r.detector}, {"alpha", r.alpha},
                             {"add_mean", opt_json(r.add_mean)}, {"add_stderr", opt_json(r.add_stderr)},
                             {"ratio", opt_json(r.ratio)}, {"bound", r.bound}, {"far", r.far}});
    }
    out << doc.dump(2) << '\n';
    return;
  }
  out << "detector,alpha,add_mean,add_stderr,ratio,bound,far\n";
  for (const DelayCurveRow& r : rows) {
    out << r.detector << ',' << format_double(r.alpha) << ',' << opt_cell(r.add_mean) << ','
        << opt_cell(r.add_stderr) << ',' << opt_cell(r.ratio) << ',' << format_double(r.bound)
        << ',' << format_double(r.far) << '\n';
  }
}

void write_coverage(std::ostream& out, std::span<const CoverageRow> rows, OutputFormat fmt) {
  if (fmt == OutputFormat::kJson) {
    json doc = {{"schema_version", 1}, {"rows", json::array()}};
    for (const CoverageRow& r : rows) {
      doc["rows"].push_back({{"detector", r.detector},
                             {"alpha", r.alpha},
                             {"coverage", r.coverage},
                             {"add_mean", opt_json(r.add_mean)},
                             {"far", r.far},
                             {"delta_add", opt_json(r.delta_add)},
                             {"delta_add_stderr", opt_json(r.delta_add_stderr)},
                             {"delta_far", r.delta_far},
                             {"delta_far_stderr", r.delta_far_stderr}});
    }
    out << doc.dump(2) << '\n';
    return;
  }
  out << "detector,alpha,coverage,add_mean,far,delta_add,delta_add_stderr,delta_far,"
         "delta_far_stderr\n";
  for (const CoverageRow& r : rows) {
    out << r.detector << ',' << format_double(r.alpha) << ',' << format_double(r.coverage) << ','
        << opt_cell(r.add_mean) << ',' << format_double(r.far) << ',' << opt_cell(r.delta_add)
        << ',' << opt_cell(r.delta_add_stderr) << ',' << format_double(r.delta_far) << ','
        << format_double(r.delta_far_stderr) << '\n';
  }
}

void write_tradeoff(std::ostream& out, std::span<const TradeoffRow> rows, OutputFormat fmt) {
  if (fmt == OutputFormat::kJson) {
    json doc = {{"schema_version", 1}, {"mechanisms", json::array()}};
    for (const TradeoffRow& r : rows) {
      json curve = json::array();
      for (const TradeoffPoint& pt : r.curve) curve.push_back({pt.alpha, pt.beta});
      json delta = json::array();
      for (const auto& [e, d] : r.delta) delta.push_back({e, d});
      doc["mechanisms"].push_back({{"sigma_e2", r.sigma_e2},
                                   {"sensitivity", r.sensitivity},
                                   {"mu", r.mu},
                                   {"tradeoff", std::move(curve)},
                                   {"delta", std::move(delta)}});
    }
    out << doc.dump(2) << '\n';
    return;
  }
  out << "sigma_e2,sensitivity,mu,series,x,y\n";
  for (const TradeoffRow& r : rows) {
    const std::string prefix = format_double(r.sigma_e2) + ',' + format_double(r.sensitivity) +
                               ',' + format_double(r.mu) + ',';
    for (const TradeoffPoint& pt : r.curve) {
      out << prefix << "tradeoff," << format_double(pt.alpha) << ',' << format_double(pt.beta)
          << '\n';
    }
    for (const auto& [e, d] : r.delta) {
      out << prefix << "delta," << format_double(e) << ',' << format_double(d) << '\n';
    }
  }
}

void write_trajectories_csv(std::ostream& out, std::span<const std::string> labels,
                            std::span<const std::vector<double>> trajectories) {
  if (labels.size() != trajectories.size()) {
    raise(ErrorCode::kDimensionMismatch, "one label per trajectory is required");
  }
  out << 'n';
  for (const std::string& l : labels) out << ',' << l;
  out << '\n';
  std::size_t rows = 0;
  for (const auto& t : trajectories) rows = std::max(rows, t.size());
  for (std::size_t n = 0; n < rows; ++n) {
    out << n + 1;
    for (const auto& t : trajectories) {
      out << ',';
      if (n < t.size()) out << format_double(t[n]);
    }
    out << '\n';
  }
}

void emit_results(const MonteCarloSummary& summary, const std::filesystem::path& path,
                  OutputFormat fmt) {
  auto write = [&](std::ostream& os) {
    if (fmt == OutputFormat::kJson) {
      os << summary_to_json(summary);
    } else {
      write_summary_csv(os, summary);
    }
  };
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) raise(ErrorCode::kIoError, "cannot write " + path.string());
  write(out);
  out.flush();
  if (!out) raise(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace plod
