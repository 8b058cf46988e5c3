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

#include "plod/gauss_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "plod/error.hpp"

namespace plod {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kJitterScale = 1e-9;
constexpr double kKlClampFloor = -1e-12;
constexpr double kMinConditionalVariance = 1e-14;

bool factor_ok(const Eigen::LLT<Matrix>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  return diag.allFinite() && (diag.array() > 0.0).all();
}

void check_pair(BusPair pair, Index p) {
  if (pair.i == pair.k || pair.i < 0 || pair.k < 0 || pair.i >= p || pair.k >= p) {
    std::ostringstream os;
    os << "bus pair (" << pair.i << ", " << pair.k << ") invalid for dimension " << p;
    raise(ErrorCode::kInvalidParameter, os.str());
  }
}

}  // namespace

BusPair ordered(BusPair pair) {
  if (pair.i > pair.k) std::swap(pair.i, pair.k);
  return pair;
}

Eigen::LLT<Matrix> factorize_spd(const Matrix& sym, const std::string& what,
                                 double* jitter_applied) {
  if (jitter_applied != nullptr) *jitter_applied = 0.0;
  Eigen::LLT<Matrix> llt(sym);
  if (factor_ok(llt)) return llt;
  const Index p = sym.rows();
  const double jitter = kJitterScale * std::max(sym.trace(), 0.0) / static_cast<double>(p);
  if (jitter > 0.0) {
    Matrix shifted = sym;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (factor_ok(llt)) {
      if (jitter_applied != nullptr) *jitter_applied = jitter;
      return llt;
    }
  }
  raise(ErrorCode::kNotPositiveDefinite, what + " admits no Cholesky factorization");
}

GaussianModel::GaussianModel(Vector mean, const Matrix& cov, double reg)
    : mean_(std::move(mean)) {
  if (cov.rows() != cov.cols() || cov.rows() != mean_.size()) {
    std::ostringstream os;
    os << "mean has length " << mean_.size() << " but covariance is " << cov.rows() << "x"
       << cov.cols();
    raise(ErrorCode::kDimensionMismatch, os.str());
  }
  if (mean_.size() == 0) raise(ErrorCode::kDimensionMismatch, "empty model");
  if (!(reg >= 0.0) || !std::isfinite(reg)) {
    raise(ErrorCode::kInvalidParameter, "regularization must be finite and >= 0");
  }
  if (!mean_.allFinite() || !cov.allFinite()) {
    raise(ErrorCode::kInvalidParameter, "non-finite mean or covariance entry");
  }
  const double scale = std::max(cov.cwiseAbs().maxCoeff(), 1e-300);
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    raise(ErrorCode::kNotPositiveDefinite, "covariance is not symmetric");
  }
  cov_ = 0.5 * (cov + cov.transpose());
  cov_.diagonal().array() += reg;

  double jitter = 0.0;
  llt_ = factorize_spd(cov_, "covariance", &jitter);
  cov_.diagonal().array() += jitter;
  const Matrix l = llt_.matrixL();
  log_det_ = 2.0 * l.diagonal().array().log().sum();
  // tr(S^{-1}) = ||L^{-1}||_F^2
  const Matrix linv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(dim(), dim()));
  trace_precision_ = linv.squaredNorm();
}

double GaussianModel::mahalanobis_sq(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim()) {
    std::ostringstream os;
    os << "sample has length " << x.size() << ", model dimension is " << dim();
    raise(ErrorCode::kDimensionMismatch, os.str());
  }
  const Vector z = llt_.matrixL().solve(x - mean_);
  return z.squaredNorm();
}

double GaussianModel::log_density(const Eigen::Ref<const Vector>& x) const {
  const double q = mahalanobis_sq(x);
  return -0.5 * (q + log_det_ + static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi));
}

Matrix GaussianModel::solve(const Eigen::Ref<const Matrix>& rhs) const {
  if (rhs.rows() != dim()) raise(ErrorCode::kDimensionMismatch, "solve: row count mismatch");
  return llt_.solve(rhs);
}

Matrix GaussianModel::whiten(const Eigen::Ref<const Matrix>& rhs) const {
  if (rhs.rows() != dim()) raise(ErrorCode::kDimensionMismatch, "whiten: row count mismatch");
  return llt_.matrixL().solve(rhs);
}

GaussianModel GaussianModel::encrypted(double sigma_e2) const {
  if (!(sigma_e2 > 0.0) || !std::isfinite(sigma_e2)) {
    raise(ErrorCode::kInvalidParameter, "noise variance must be positive");
  }
  Matrix c = cov_;
  c.diagonal().array() += sigma_e2;
  return GaussianModel(mean_, c);
}

GaussianModel GaussianModel::marginal(std::span<const Index> coords) const {
  const Index m = static_cast<Index>(coords.size());
  if (m == 0) raise(ErrorCode::kDimensionMismatch, "empty marginal");
  Vector mu(m);
  Matrix c(m, m);
  for (Index a = 0; a < m; ++a) {
    const Index ia = coords[static_cast<std::size_t>(a)];
    if (ia < 0 || ia >= dim()) raise(ErrorCode::kDimensionMismatch, "marginal index out of range");
    mu(a) = mean_(ia);
    for (Index b = 0; b < m; ++b) c(a, b) = cov_(ia, coords[static_cast<std::size_t>(b)]);
  }
  return GaussianModel(std::move(mu), c);
}

Matrix GaussianModel::sample(Index n, Rng& rng) const {
  if (n < 1) raise(ErrorCode::kInvalidParameter, "sample count must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index p = dim();
  Matrix z(p, n);
  // Column-major fill in row order of the output so draws are consumed
  // sample by sample.
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < p; ++c) z(c, r) = normal(rng);
  }
  Matrix out = (llt_.matrixL() * z).transpose();
  out.rowwise() += mean_.transpose();
  return out;
}

GaussianModel GaussianModel::fit(const Eigen::Ref<const Matrix>& samples, double reg) {
  const Index n = samples.rows();
  if (n < 2) raise(ErrorCode::kInsufficientSamples, "fit needs at least two samples");
  Vector mu = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - mu.transpose();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  return GaussianModel(std::move(mu), cov, reg);
}

double log_likelihood_ratio(const GaussianModel& f, const GaussianModel& g,
                            const Eigen::Ref<const Vector>& x) {
  if (f.dim() != g.dim()) raise(ErrorCode::kDimensionMismatch, "model dimensions differ");
  return f.log_density(x) - g.log_density(x);
}

double kl_divergence(const GaussianModel& f, const GaussianModel& g) {
  if (f.dim() != g.dim()) raise(ErrorCode::kDimensionMismatch, "model dimensions differ");
  const double p = static_cast<double>(f.dim());
  // tr(Sg^{-1} Sf) = ||Lg^{-1} Lf||_F^2
  const double trace_term = g.whiten(f.chol()).squaredNorm();
  const Vector diff = g.mean() - f.mean();
  const double quad = g.whiten(diff).squaredNorm();
  const double kl = 0.5 * (trace_term + quad - p + g.log_det() - f.log_det());
  if (kl < 0.0 && kl > kKlClampFloor) return 0.0;
  return kl;
}

Eigen::Matrix2d conditional_covariance(const Eigen::Ref<const Matrix>& cov, BusPair pair) {
  const Index p = cov.rows();
  if (cov.cols() != p) raise(ErrorCode::kDimensionMismatch, "covariance must be square");
  if (p < 3) raise(ErrorCode::kInvalidParameter, "conditional covariance needs p >= 3");
  check_pair(pair, p);

  std::vector<Index> rest;
  rest.reserve(static_cast<std::size_t>(p - 2));
  for (Index j = 0; j < p; ++j) {
    if (j != pair.i && j != pair.k) rest.push_back(j);
  }
  const Index m = p - 2;
  Matrix kk(m, m);
  Matrix ik(2, m);
  const Index idx[2] = {pair.i, pair.k};
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) kk(a, b) = cov(rest[a], rest[b]);
    ik(0, a) = cov(idx[0], rest[a]);
    ik(1, a) = cov(idx[1], rest[a]);
  }
  kk = 0.5 * (kk + kk.transpose());
  const auto llt = factorize_spd(kk, "conditioning block");
  const Matrix w = llt.matrixL().solve(ik.transpose());  // L^{-1} S_KI

  Eigen::Matrix2d out;
  out << cov(idx[0], idx[0]), cov(idx[0], idx[1]), cov(idx[1], idx[0]), cov(idx[1], idx[1]);
  out -= w.transpose() * w;
  out(0, 1) = out(1, 0) = 0.5 * (out(0, 1) + out(1, 0));
  return out;
}

double conditional_correlation(const Eigen::Ref<const Matrix>& cov, BusPair pair) {
  const Eigen::Matrix2d c = conditional_covariance(cov, pair);
  if (c(0, 0) < kMinConditionalVariance || c(1, 1) < kMinConditionalVariance) {
    raise(ErrorCode::kDegenerateVariance, "conditional variance below 1e-14");
  }
  const double r = c(0, 1) / std::sqrt(c(0, 0) * c(1, 1));
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace plod
