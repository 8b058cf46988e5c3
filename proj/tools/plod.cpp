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

// plod: privacy-preserving line outage detection command-line driver.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "plod/csv.hpp"
#include "plod/datagen.hpp"
#include "plod/detection.hpp"
#include "plod/error.hpp"
#include "plod/harness.hpp"
#include "plod/localization.hpp"
#include "plod/topology.hpp"

namespace {

using json = nlohmann::json;
using namespace plod;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<double> alphas;
  std::optional<double> rho;
  std::optional<double> sigma_e2;
  std::vector<double> gammas;
  std::optional<Index> reps;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
  std::optional<std::string> scenario;
  std::optional<std::string> topology;
  std::vector<std::string> outage;
  std::vector<std::string> detectors;
};

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "TOML experiment config");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--alpha", o.alphas, "false-alarm tolerance(s)")->delimiter(',');
  app.add_option("--rho", o.rho, "geometric prior parameter");
  app.add_option("--sigma-e2", o.sigma_e2, "privacy noise variance");
  app.add_option("--gamma", o.gammas, "variance scaling factor(s), >= 1")->delimiter(',');
  app.add_option("--reps", o.reps, "Monte Carlo replications");
  app.add_option("--out", o.out, "output path (default stdout)");
  app.add_option("--format", o.format, "csv or json");
  app.add_option("--threads", o.threads, "worker threads, 0 = all cores");
  app.add_option("--scenario", o.scenario, "scenario JSON written by `generate`");
  app.add_option("--topology", o.topology, "bundled topology name or JSON path");
  app.add_option("--outage", o.outage, "outaged branch, e.g. 4-7 (repeatable)")->delimiter(',');
  app.add_option("--detectors", o.detectors,
                 "detector kinds: benchmark, privacy_only, mitigated, variance_scaled:g")
      ->delimiter(',');
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.alphas.empty()) cfg.alphas = o.alphas;
  if (o.rho) cfg.rho = *o.rho;
  if (o.sigma_e2) cfg.sigma_e2 = *o.sigma_e2;
  if (!o.gammas.empty()) cfg.gammas = o.gammas;
  if (o.reps) cfg.replications = *o.reps;
  if (o.out) cfg.out = *o.out;
  if (o.format) cfg.format = parse_output_format(*o.format);
  if (o.threads) cfg.threads = *o.threads;
  if (o.scenario) cfg.scenario_file = *o.scenario;
  if (o.topology) {
    cfg.topology = *o.topology;
    cfg.scenario_file.clear();
  }
  if (!o.outage.empty()) cfg.outage = o.outage;
  if (!o.detectors.empty()) cfg.detectors = o.detectors;
  cfg.validate();
  return cfg;
}

// Runs `body` with the configured output stream.
template <typename F>
void with_output(const std::string& path, F&& body) {
  if (path.empty()) {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) raise(ErrorCode::kIoError, "cannot write " + path);
  body(out);
  out.flush();
  if (!out) raise(ErrorCode::kIoError, "write failed for " + path);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
}

json pairs_json(const std::vector<BusPair>& pairs, const GridModel* grid) {
  json out = json::array();
  for (const BusPair& b : pairs) {
    out.push_back(grid ? branch_label({grid->bus_of(b.i), grid->bus_of(b.k)}) : branch_label(b));
  }
  return out;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string matrices_dir;
  std::string stream_path;
  std::optional<Index> n_fit;
};

void cmd_generate(const Overrides& o, const GenerateArgs& g) {
  ExperimentConfig cfg = resolve(o);
  if (g.n_fit) cfg.n_fit = *g.n_fit;
  const GridScenario scn = make_scenario(cfg);
  with_output(cfg.out, [&](std::ostream& os) { os << scenario_to_json(scn) << '\n'; });

  if (!g.matrices_dir.empty()) {
    const std::filesystem::path dir(g.matrices_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::string> header;
    for (Index o2 = 0; o2 < scn.grid_before.observed_dim(); ++o2) {
      header.push_back("bus" + std::to_string(scn.grid_before.bus_of(o2) + 1));
    }
    write_matrix_csv(dir / "pre_cov.csv", scn.pre_model.cov(), header);
    write_matrix_csv(dir / "post_cov.csv", scn.post_model.cov(), header);
    write_matrix_csv(dir / "pre_mean.csv", scn.pre_model.mean().transpose(), header);
    write_matrix_csv(dir / "post_mean.csv", scn.post_model.mean().transpose(), header);
  }
  if (!g.stream_path.empty()) {
    Rng rng(derive_seed(cfg.seed, 0));
    SequenceSpec spec;
    spec.rho = cfg.rho;
    spec.n_post = cfg.n_post;
    const PrivacyMechanism mech(cfg.sigma_e2, cfg.sensitivity);
    const GeneratedSequence seq = gen_sequence(scn, spec, &mech, rng);
    std::vector<std::string> header;
    for (Index c : seq.observed) header.push_back("bus" + std::to_string(scn.grid_before.bus_of(c) + 1));
    const std::filesystem::path base(g.stream_path);
    write_matrix_csv(base, seq.raw, header);
    std::filesystem::path enc = base;
    enc.replace_filename(base.stem().string() + "_encrypted" + base.extension().string());
    write_matrix_csv(enc, *seq.encrypted, header);
    std::cerr << "lambda=" << seq.lambda << '\n';
  }
}

// --- detect -----------------------------------------------------------------

struct DetectArgs {
  std::string trajectory_path;
  std::optional<Index> lambda;
  std::optional<Index> replication;
};

void cmd_detect(const Overrides& o, const DetectArgs& a) {
  const ExperimentConfig cfg = resolve(o);
  const GridScenario scn = make_scenario(cfg);
  const auto specs = expand_detectors(cfg);
  const PrivacyMechanism mech(cfg.sigma_e2, cfg.sensitivity);
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(a.replication.value_or(0))));
  SequenceSpec spec;
  spec.rho = cfg.rho;
  spec.n_post = cfg.n_post;
  spec.lambda = a.lambda;
  const GeneratedSequence seq = gen_sequence(scn, spec, &mech, rng);
  const double alpha = cfg.alphas.front();

  std::vector<std::string> labels;
  std::vector<std::vector<double>> trajectories;
  json results = json::array();
  const std::vector<BusPair> truth = scn.outaged_observed();
  for (const DetectorSpec& s : specs) {
    auto models = std::make_shared<const DetectorModels>(s, scn.pre_model, scn.post_model, mech);
    Detector det(models, cfg.rho, alpha);
    const Matrix& stream = s.uses_encrypted_data() ? *seq.encrypted : seq.raw;
    const StopReport rep = run_sequence(det, stream, true);
    json r = {{"detector", s.label()},
              {"lambda", seq.lambda},
              {"tau", rep.tau ? json(*rep.tau) : json(nullptr)},
              {"false_alarm", rep.tau && *rep.tau < seq.lambda},
              {"final_log_stat", rep.final_log_stat},
              {"log_threshold", det.log_threshold()}};
    if (rep.tau && cfg.localize) {
      Rng wrng(derive_seed(cfg.seed, 0x10ca1e, trajectories.size()));
      const Index w = cfg.localization.window;
      const Index n_pre = std::clamp<Index>(seq.lambda - 1 - *rep.tau, 0, w);
      Matrix window(w, scn.pre_model.dim());
      if (n_pre > 0) window.topRows(n_pre) = scn.pre_model.sample(n_pre, wrng);
      window.bottomRows(w - n_pre) = scn.post_model.sample(w - n_pre, wrng);
      Matrix before = scn.pre_model.cov();
      if (s.uses_encrypted_data()) {
        window = mech.randomize_rows(window, wrng);
        before.diagonal().array() += mech.sigma_e2();
      }
      const Matrix after = estimate_post_covariance(window, cfg.localization.reg).cov();
      const LocalizationReport loc = localize(before, after, {}, cfg.localization);
      r["localized"] = pairs_json(loc.outaged, &scn.grid_before);
      r["localized_correct"] = loc.outaged == truth;
    }
    results.push_back(std::move(r));
    labels.push_back(s.label());
    trajectories.push_back(rep.trajectory);
  }

  with_output(cfg.out, [&](std::ostream& os) {
    if (cfg.format == OutputFormat::kJson) {
      json doc = {{"schema_version", 1},
                  {"scenario", scn.label},
                  {"alpha", alpha},
                  {"truth", pairs_json(truth, &scn.grid_before)},
                  {"results", results}};
      os << doc.dump(2) << '\n';
      return;
    }
    os << "detector,lambda,tau,false_alarm,localized\n";
    for (const json& r : results) {
      os << r["detector"].get<std::string>() << ',' << r["lambda"].get<Index>() << ',';
      if (!r["tau"].is_null()) os << r["tau"].get<Index>();
      os << ',' << (r["false_alarm"].get<bool>() ? 1 : 0) << ',';
      if (r.contains("localized")) {
        std::string joined;
        for (const auto& l : r["localized"]) joined += (joined.empty() ? "" : " ") + l.get<std::string>();
        os << joined;
      }
      os << '\n';
    }
  });
  if (!a.trajectory_path.empty()) {
    with_output(a.trajectory_path,
                [&](std::ostream& os) { write_trajectories_csv(os, labels, trajectories); });
  }
}

// --- evaluate / delay / coverage / tradeoff ------------------------------------

void cmd_evaluate(const Overrides& o, bool records) {
  ExperimentConfig cfg = resolve(o);
  cfg.record_replications = cfg.record_replications || records;
  const MonteCarloSummary s = run_monte_carlo(cfg);
  print_warnings(s.warnings);
  emit_results(s, cfg.out, cfg.format);
}

void cmd_delay(const Overrides& o) {
  const ExperimentConfig cfg = resolve(o);
  const auto rows = asymptotic_delay_curve(cfg, eval_scenario(make_scenario(cfg)));
  with_output(cfg.out, [&](std::ostream& os) { write_delay_curve(os, rows, cfg.format); });
}

void cmd_coverage(const Overrides& o, std::vector<double> ratios) {
  const ExperimentConfig cfg = resolve(o);
  if (ratios.empty()) ratios = cfg.coverages.size() > 1 ? cfg.coverages
                                                         : std::vector<double>{0.75, 0.85, 0.95, 1.0};
  const auto rows = coverage_experiment(cfg, eval_scenario(make_scenario(cfg)), ratios);
  with_output(cfg.out, [&](std::ostream& os) { write_coverage(os, rows, cfg.format); });
}

void cmd_tradeoff(const Overrides& o, Index points) {
  ExperimentConfig cfg = resolve(o);
  std::vector<double> variances = cfg.tradeoff_sigma_e2;
  if (o.sigma_e2) variances = {*o.sigma_e2};
  std::vector<PrivacyMechanism> mechs;
  for (double v : variances) mechs.emplace_back(v, cfg.sensitivity);
  const std::vector<double> grid = alpha_grid(points);
  const auto rows = tradeoff_report(mechs, grid, cfg.epsilons);
  with_output(cfg.out, [&](std::ostream& os) { write_tradeoff(os, rows, cfg.format); });
}

// --- localize -----------------------------------------------------------------

struct LocalizeArgs {
  std::string before;
  std::string after;
  std::string after_samples;
  std::optional<double> delta_max;
  std::optional<double> delta_min;
  bool subtract_noise = false;
};

void cmd_localize(const Overrides& o, const LocalizeArgs& a) {
  ExperimentConfig cfg = resolve(o);
  LocalizationConfig lc = cfg.localization;
  if (a.delta_max) lc.delta_max = *a.delta_max;
  if (a.delta_min) lc.delta_min = *a.delta_min;
  if (a.before.empty() || (a.after.empty() == a.after_samples.empty())) {
    raise(ErrorCode::kConfigError, "localize needs --before and exactly one of --after/--after-samples");
  }
  Matrix before = read_matrix_csv(a.before);
  Matrix after = a.after.empty() ? estimate_post_covariance(read_matrix_csv(a.after_samples), lc.reg).cov()
                                 : read_matrix_csv(a.after);
  if (a.subtract_noise) {
    before = remove_noise(before, cfg.sigma_e2);
    after = remove_noise(after, cfg.sigma_e2);
  }
  const LocalizationReport rep = localize(before, after, {}, lc);
  with_output(cfg.out, [&](std::ostream& os) {
    if (cfg.format == OutputFormat::kJson) {
      json doc = {{"schema_version", 1},
                  {"outaged", pairs_json(rep.outaged, nullptr)},
                  {"correlations_before", matrix_json(rep.correlations_before)},
                  {"correlations_after", matrix_json(rep.correlations_after)}};
      os << doc.dump(2) << '\n';
      return;
    }
    os << "i,k,rho_before,rho_after\n";
    for (const BusPair& b : rep.outaged) {
      os << b.i + 1 << ',' << b.k + 1 << ',' << format_double(rep.correlations_before(b.i, b.k))
         << ',' << format_double(rep.correlations_after(b.i, b.k)) << '\n';
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plod: privacy-preserving line outage detection"};
  app.require_subcommand(1);
  Overrides o;

  auto* gen = app.add_subcommand("generate", "build a scenario and write it as JSON");
  GenerateArgs gargs;
  add_common(*gen, o);
  gen->add_option("--matrices", gargs.matrices_dir, "also write mean/covariance CSVs here");
  gen->add_option("--stream", gargs.stream_path, "also write one raw/encrypted stream CSV");
  gen->add_option("--n-fit", gargs.n_fit, "samples per regime for the Gaussian fits");

  auto* det = app.add_subcommand("detect", "run every detector on one generated stream");
  DetectArgs dargs;
  add_common(*det, o);
  det->add_option("--trajectory", dargs.trajectory_path, "write log-statistic trajectories (CSV)");
  det->add_option("--lambda", dargs.lambda, "fix the change point instead of drawing it");
  det->add_option("--replication", dargs.replication, "replication index for the stream seed");

  auto* eval = app.add_subcommand("evaluate", "Monte Carlo ADD / FAR / localization accuracy");
  bool records = false;
  add_common(*eval, o);
  eval->add_flag("--records", records, "include per-replication records (JSON)");

  auto* delay = app.add_subcommand("delay", "ADD / |log alpha| against the asymptotic bound");
  add_common(*delay, o);

  auto* cov = app.add_subcommand("coverage", "ADD / FAR change under partial data coverage");
  std::vector<double> ratios;
  add_common(*cov, o);
  cov->add_option("--ratios", ratios, "coverage ratios, must include 1")->delimiter(',');

  auto* trade = app.add_subcommand("tradeoff", "GDP trade-off curves and delta(epsilon)");
  Index points = 101;
  add_common(*trade, o);
  trade->add_option("--points", points, "type-I grid size");

  auto* loc = app.add_subcommand("localize", "outaged branches from covariance CSVs");
  LocalizeArgs largs;
  add_common(*loc, o);
  loc->add_option("--before", largs.before, "pre-outage covariance CSV");
  loc->add_option("--after", largs.after, "post-outage covariance CSV");
  loc->add_option("--after-samples", largs.after_samples, "post-outage samples CSV");
  loc->add_option("--delta-max", largs.delta_max, "minimum |partial correlation| before");
  loc->add_option("--delta-min", largs.delta_min, "maximum |partial correlation| after");
  loc->add_flag("--subtract-noise", largs.subtract_noise, "remove sigma_e2 * I first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) cmd_generate(o, gargs);
    if (*det) cmd_detect(o, dargs);
    if (*eval) cmd_evaluate(o, records);
    if (*delay) cmd_delay(o);
    if (*cov) cmd_coverage(o, ratios);
    if (*trade) cmd_tradeoff(o, points);
    if (*loc) cmd_localize(o, largs);
  } catch (const Error& e) {
    std::cerr << "plod: " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "plod: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
