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

// Acceptance checks. Prints one "criterion N: PASS|FAIL ..." line each and
// exits non-zero when any selected criterion fails.
//
//   plod_acceptance [--only N]

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "plod/datagen.hpp"
#include "plod/detection.hpp"
#include "plod/harness.hpp"
#include "plod/localization.hpp"
#include "plod/normal.hpp"
#include "plod/privacy.hpp"
#include "test_util.hpp"

namespace {

using namespace plod;
using plod::testing::naive_kl;
using plod::testing::oracle_log_ratio;
using plod::testing::oracle_log_shiryaev;
using plod::testing::random_spd;
using plod::testing::random_vector;
using Clock = std::chrono::steady_clock;
using Big = boost::multiprecision::cpp_bin_float_50;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

EvalScenario mesh_scenario() {
  ExperimentConfig cfg;
  return eval_scenario(make_scenario(cfg));
}

const SummaryRow& find_row(const MonteCarloSummary& s, const std::string& label, double alpha) {
  for (const SummaryRow& r : s.rows) {
    if (r.detector == label && r.alpha == alpha) return r;
  }
  throw std::runtime_error("missing row " + label);
}

// 1. Recursion against the literal sum, every detector kind.
Outcome recursion_matches_sum() {
  const auto t0 = Clock::now();
  Rng rng(101);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const DetectorKind kinds[] = {DetectorKind::kBenchmark, DetectorKind::kPrivacyOnly,
                                DetectorKind::kMitigated, DetectorKind::kVarianceScaled};
  double worst = 0.0;
  int checked = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const Index p = dim(rng);
    const Matrix s0 = random_spd(p, rng, 0.3);
    const Matrix s1 = random_spd(p, rng, 0.3);
    const Vector m0 = random_vector(p, rng, 0.5);
    const Vector m1 = random_vector(p, rng, 0.5);
    const double sigma_e2 = 0.01 + 0.2 * u(rng);
    const double rho = 0.01 + 0.2 * u(rng);
    const double gamma = 1.0 + 3.0 * u(rng);
    const GaussianModel pre(m0, s0), post(m1, s1);
    const PrivacyMechanism mech(sigma_e2);
    const Matrix seq = mech.randomize_rows(
        (Matrix(50, p) << pre.sample(20, rng), post.sample(30, rng)).finished(), rng);
    for (DetectorKind kind : kinds) {
      const double g = kind == DetectorKind::kVarianceScaled ? gamma : 1.0;
      Detector det(std::make_shared<const DetectorModels>(DetectorSpec{kind, g}, pre, post, mech),
                   rho, 0.01);
      std::vector<double> ell;
      for (Index n = 0; n < seq.rows(); ++n) {
        const Vector x = seq.row(n).transpose();
        det.step(x);
        ell.push_back(oracle_log_ratio(kind, g, m0, s0, m1, s1, sigma_e2, x));
      }
      const double want = oracle_log_shiryaev(ell, rho);
      worst = std::max(worst, std::abs(det.log_stat() - want) / std::max(1.0, std::abs(want)));
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0,
          fmt("%d sequences, max rel err %.2e, %.2fs", checked, worst, secs)};
}

// 2. Privacy accounting and trade-off curves.
Big big_cdf(const Big& x) { return boost::multiprecision::erfc(-x / boost::multiprecision::sqrt(Big(2))) / 2; }

Outcome dp_formulas() {
  double worst = 0.0;
  int points = 0;
  for (double mu : {0.5, 1.0, 2.0, 4.0}) {
    for (double eps : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const Big m(mu), e(eps);
      const Big want = big_cdf(-e / m + m / 2) - boost::multiprecision::exp(e) * big_cdf(-e / m - m / 2);
      worst = std::max(worst, std::abs(dp_delta_gdp(eps, mu) - want.convert_to<double>()));
      ++points;
    }
  }
  double identity = 0.0;
  for (double mu : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    identity = std::max(identity, std::abs(dp_delta_gdp(0.0, mu) - (2.0 * normal_cdf(mu / 2) - 1.0)));
  }
  const std::vector<PrivacyMechanism> mechs = {PrivacyMechanism(4e-2), PrivacyMechanism(2e-2),
                                               PrivacyMechanism(1e-2), PrivacyMechanism(5e-3)};
  const std::vector<double> grid = alpha_grid(101);
  const std::vector<double> eps = {0.0};
  const auto rows = tradeoff_report(mechs, grid, eps);
  bool monotone = true;
  bool ordered = true;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 1; i < rows[r].curve.size(); ++i) {
      monotone = monotone && rows[r].curve[i].beta <= rows[r].curve[i - 1].beta;
      if (r > 0) ordered = ordered && rows[r].curve[i].beta <= rows[r - 1].curve[i].beta;
    }
    if (r > 0) ordered = ordered && rows[r].mu > rows[r - 1].mu;
  }
  return {worst <= 1e-10 && identity <= 1e-12 && monotone && ordered,
          fmt("%d grid points, max abs err %.2e, delta(0) identity err %.2e, monotone=%d ordered=%d",
              points, worst, identity, monotone, ordered)};
}

// 3. Randomization never adds information; the closed-form bound.
Outcome kl_degradation_checks() {
  const auto t0 = Clock::now();
  Rng rng(303);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> var(0.2, 2.0);
  const double noise[] = {1e-3, 1e-2, 1e-1};
  int negative = 0;
  double min_delta = 1e300;
  for (int i = 0; i < 1000; ++i) {
    const Index p = dim(rng);
    const Matrix sf = random_spd(p, rng), sg = random_spd(p, rng);
    const Vector mf = random_vector(p, rng), mg = random_vector(p, rng);
    const double s2 = noise[i % 3];
    const Matrix n = s2 * Matrix::Identity(p, p);
    const double d = naive_kl(mf, sf, mg, sg) - naive_kl(mf, sf + n, mg, sg + n);
    min_delta = std::min(min_delta, d);
    if (d < -1e-10) ++negative;
  }
  int violations = 0;
  int violations_p1 = 0;
  for (int i = 0; i < 1000; ++i) {
    const Index p = dim(rng);
    Vector df(p), dg(p);
    for (Index k = 0; k < p; ++k) {
      df(k) = var(rng);
      dg(k) = var(rng);
    }
    const GaussianModel f(random_vector(p, rng), df.asDiagonal().toDenseMatrix());
    const GaussianModel g(random_vector(p, rng), dg.asDiagonal().toDenseMatrix());
    const PrivacyMechanism mech(noise[i % 3]);
    if (kl_degradation_upper_bound(f, g, mech) + 1e-12 < kl_degradation(f, g, mech)) {
      ++violations;
      if (p == 1) ++violations_p1;
    }
  }
  const double secs = seconds_since(t0);
  return {negative == 0 && violations == 0 && secs < 30.0,
          fmt("sign: %d/1000 negative (min %.3e); bound: %d/1000 diagonal pairs exceed it (%d at p=1); %.2fs",
              negative, min_delta, violations, violations_p1, secs)};
}

// 4. False alarm rate under the threshold.
Outcome far_guarantee() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.detectors = {"benchmark", "mitigated"};
  cfg.gammas = {1.0, 2.0, 3.0};
  cfg.alphas = {0.1, 0.01};
  cfg.replications = 2000;
  cfg.localize = false;
  const MonteCarloSummary s = run_monte_carlo(cfg, mesh_scenario());
  bool ok = true;
  std::string detail;
  for (const SummaryRow& r : s.rows) {
    const double limit = r.alpha + 2.0 * std::sqrt(r.alpha * (1.0 - r.alpha) / 2000.0);
    ok = ok && r.far <= limit;
    detail += fmt("%s@%g=%.4f(<=%.4f) ", r.detector.c_str(), r.alpha, r.far, limit);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 120.0, detail + fmt("%.1fs", secs)};
}

struct Finals {
  double raw;        // benchmark on raw data
  double encrypted;  // privacy-only on randomized data
  std::vector<double> mitigated;  // per gamma, randomized data
};

// Statistics after lambda + 20 samples for one replication.
Finals finals_at_plus20(const EvalScenario& scn, const PrivacyMechanism& mech, double rho,
                        std::span<const double> gammas, Rng& rng) {
  SequenceSpec spec;
  spec.rho = rho;
  spec.n_post = 21;
  const GeneratedSequence seq = gen_sequence(scn.pre, scn.post, spec, &mech, rng);
  auto run = [&](DetectorSpec ds, const Matrix& stream) {
    Detector det(std::make_shared<const DetectorModels>(ds, scn.pre, scn.post, mech), rho, 0.01);
    for (Index n = 0; n < stream.rows(); ++n) det.step(stream.row(n).transpose());
    return det.log_stat();
  };
  Finals f;
  f.raw = run({DetectorKind::kBenchmark, 1.0}, seq.raw);
  f.encrypted = run({DetectorKind::kPrivacyOnly, 1.0}, *seq.encrypted);
  for (double g : gammas) {
    f.mitigated.push_back(run(g == 1.0 ? DetectorSpec{DetectorKind::kMitigated, 1.0}
                                       : DetectorSpec{DetectorKind::kVarianceScaled, g},
                              *seq.encrypted));
  }
  return f;
}

// 5. Statistic sandwich and delay ordering.
Outcome ordering_and_mitigation() {
  const auto t0 = Clock::now();
  const EvalScenario scn = mesh_scenario();
  const ExperimentConfig base;
  const PrivacyMechanism mech(base.sigma_e2, base.sensitivity);
  const std::vector<double> gammas = {1.0};
  int inside = 0;
  for (int r = 0; r < 500; ++r) {
    Rng rng(derive_seed(505, static_cast<std::uint64_t>(r)));
    const Finals f = finals_at_plus20(scn, mech, base.rho, gammas, rng);
    if (f.encrypted <= f.mitigated[0] && f.mitigated[0] <= f.raw) ++inside;
  }
  const double frac = inside / 500.0;

  ExperimentConfig cfg;
  cfg.detectors = {"benchmark", "mitigated", "privacy_only"};
  cfg.gammas = {1.0, 3.0};
  cfg.replications = 500;
  cfg.localize = false;
  const MonteCarloSummary s = run_monte_carlo(cfg, scn);
  const double a = cfg.alphas.front();
  const SummaryRow& bench = find_row(s, "benchmark", a);
  const SummaryRow& vs3 = find_row(s, DetectorSpec{DetectorKind::kVarianceScaled, 3.0}.label(), a);
  const SummaryRow& mit = find_row(s, "mitigated", a);
  const SummaryRow& po = find_row(s, "privacy_only", a);
  auto le = [](const SummaryRow& x, const SummaryRow& y) {
    return x.add_mean && y.add_mean &&
           *x.add_mean <= *y.add_mean + std::hypot(x.add_stderr.value_or(0), y.add_stderr.value_or(0));
  };
  const bool order = le(bench, vs3) && le(vs3, mit) && le(mit, po);
  const double secs = seconds_since(t0);
  return {frac >= 0.9 && order && secs < 120.0,
          fmt("sandwich %.3f of 500; ADD benchmark %.2f, gamma=3 %.2f, gamma=1 %.2f, privacy-only %.2f; %.1fs",
              frac, bench.add_mean.value_or(NAN), vs3.add_mean.value_or(NAN),
              mit.add_mean.value_or(NAN), po.add_mean.value_or(NAN), secs)};
}

// 6. Delay slope against the information bound, scalar case with KL = 1.
Outcome asymptotic_delay() {
  const auto t0 = Clock::now();
  EvalScenario scn{"scalar", GaussianModel(Vector::Zero(1), Matrix::Identity(1, 1)),
                   GaussianModel(Vector::Constant(1, std::sqrt(2.0)), Matrix::Identity(1, 1)),
                   {}, std::nullopt};
  ExperimentConfig cfg;
  cfg.detectors = {"benchmark"};
  cfg.alphas = {1e-4};
  cfg.replications = 2000;
  cfg.n_post = 400;
  cfg.localize = false;
  const auto rows = asymptotic_delay_curve(cfg, scn);
  const DelayCurveRow& r = rows.front();
  const double rel = r.ratio ? std::abs(*r.ratio - r.bound) / r.bound : INFINITY;
  const double secs = seconds_since(t0);
  return {rel <= 0.15 && secs < 120.0,
          fmt("ADD %.3f, ADD/|log alpha| %.4f, bound %.4f, rel diff %.3f, FAR %.4f; %.1fs",
              r.add_mean.value_or(NAN), r.ratio.value_or(NAN), r.bound, rel, r.far, secs)};
}

// 7. Distance of the mitigated statistic from the raw one across gamma.
Outcome variance_scaling_gap() {
  const EvalScenario scn = mesh_scenario();
  const ExperimentConfig base;
  const PrivacyMechanism mech(base.sigma_e2, base.sensitivity);
  const std::vector<double> gammas = {1.0, 2.0, 3.0};
  std::vector<double> sum(3, 0.0), sum_sq(3, 0.0);
  for (int r = 0; r < 500; ++r) {
    Rng rng(derive_seed(707, static_cast<std::uint64_t>(r)));
    const Finals f = finals_at_plus20(scn, mech, base.rho, gammas, rng);
    for (std::size_t g = 0; g < 3; ++g) {
      const double d = std::abs(f.mitigated[g] - f.raw);
      sum[g] += d;
      sum_sq[g] += d * d;
    }
  }
  std::vector<double> mean(3), se(3);
  for (std::size_t g = 0; g < 3; ++g) {
    mean[g] = sum[g] / 500.0;
    se[g] = std::sqrt(std::max(0.0, sum_sq[g] / 500.0 - mean[g] * mean[g]) / 499.0);
  }
  const bool ok = mean[1] <= mean[0] + std::hypot(se[0], se[1]) &&
                  mean[2] <= mean[1] + std::hypot(se[1], se[2]);
  return {ok, fmt("mean gap gamma=1 %.2f (se %.2f), gamma=2 %.2f (se %.2f), gamma=3 %.2f (se %.2f)",
                  mean[0], se[0], mean[1], se[1], mean[2], se[2])};
}

// 8. Branch identification after the alarm, plus the exact precision-zero case.
Outcome localization_accuracy() {
  std::string detail;
  bool ok = true;
  for (const char* topo : {"ieee8_mesh", "ieee8_radial"}) {
    ExperimentConfig cfg;
    cfg.topology = topo;
    cfg.detectors = {"mitigated"};
    cfg.gammas = {1.0};
    cfg.sigma_e2 = 4e-2;
    cfg.replications = 200;
    const MonteCarloSummary s = run_monte_carlo(cfg, eval_scenario(make_scenario(cfg)));
    const double acc = s.rows.front().localization_accuracy.value_or(0.0);
    ok = ok && acc >= 0.90;
    detail += fmt("%s %.3f; ", topo, acc);
  }
  // Chain 0-1-2-3-4 plus a strong 1-3 link (partial correlation 0.6) that
  // is then removed.
  Matrix prec = Matrix::Identity(5, 5);
  for (Index i = 0; i + 1 < 5; ++i) prec(i, i + 1) = prec(i + 1, i) = -0.15;
  prec(1, 3) = prec(3, 1) = -0.6;
  Matrix after = prec;
  after(1, 3) = after(3, 1) = 0.0;
  const LocalizationReport rep = localize(prec.inverse(), after.inverse(), {}, LocalizationConfig{});
  const bool exact = rep.outaged == std::vector<BusPair>{{1, 3}};
  detail += fmt("precision-zero pair found exactly=%d", exact);
  return {ok && exact, detail};
}

// 9. Synthetic loads reproduce the reference moments.
Outcome load_moments() {
  Rng rng(909);
  const LoadStats st;
  const Matrix x = synth_load_profile(st, 10000, 10, rng);
  const Eigen::ArrayXd v = Eigen::Map<const Eigen::ArrayXd>(x.data(), x.size());
  const double m = v.mean();
  const double var = (v - m).square().sum() / static_cast<double>(v.size() - 1);
  const double sd = std::sqrt(var);
  const double skew = (v - m).cube().mean() / std::pow((v - m).square().mean(), 1.5);
  const double em = std::abs(m - st.mean) / st.mean;
  const double es = std::abs(sd - st.std) / st.std;
  const double ek = std::abs(skew - st.skewness) / st.skewness;
  return {em <= 0.05 && es <= 0.05 && ek <= 0.15,
          fmt("mean %.4f (%.1f%%), std %.4f (%.1f%%), skew %.4f (%.1f%%) over %td draws", m, 100 * em,
              sd, 100 * es, skew, 100 * ek, v.size())};
}

// 10. Same seed, different thread counts, same bytes.
Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "plod_acceptance_det";
  std::filesystem::create_directories(dir);
  ExperimentConfig cfg;
  cfg.replications = 200;
  cfg.alphas = {0.1, 0.01};
  cfg.coverages = {1.0, 0.7};
  cfg.record_replications = true;
  const EvalScenario scn = mesh_scenario();
  auto bytes = [&](unsigned threads, OutputFormat fmt_kind, const char* name) {
    ExperimentConfig c = cfg;
    c.threads = threads;
    const auto path = dir / name;
    emit_results(run_monte_carlo(c, scn), path, fmt_kind);
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string j1 = bytes(1, OutputFormat::kJson, "t1.json");
  const std::string j4 = bytes(4, OutputFormat::kJson, "t4.json");
  const std::string c1 = bytes(1, OutputFormat::kCsv, "t1.csv");
  const std::string c4 = bytes(4, OutputFormat::kCsv, "t4.csv");
  std::filesystem::remove_all(dir);
  return {!j1.empty() && j1 == j4 && c1 == c4,
          fmt("json %zu bytes identical=%d, csv %zu bytes identical=%d", j1.size(), j1 == j4,
              c1.size(), c1 == c4)};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: plod_acceptance [--only N]\n";
      return 2;
    }
  }
  const std::vector<std::function<Outcome()>> criteria = {
      recursion_matches_sum, dp_formulas,           kl_degradation_checks, far_guarantee,
      ordering_and_mitigation, asymptotic_delay,    variance_scaling_gap,  localization_accuracy,
      load_moments,          determinism};
  bool all = true;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    if (only != 0 && static_cast<int>(c + 1) != only) continue;
    Outcome o{false, ""};
    try {
      o = criteria[c]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << c + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
