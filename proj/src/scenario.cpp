// Copyright 2026 The persym Authors
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

#include "persym/scenario.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "persym/error.hpp"
#include "persym/log.hpp"

namespace persym {

namespace {

Eigen::LLT<Eigen::MatrixXcd> factor_covariance(
    const PersymmetricCovariance& m0) {
  Eigen::LLT<Eigen::MatrixXcd> llt(m0.entries);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::kModelViolation, "covariance is not positive definite");
  }
  return llt;
}

bool in_half_open_unit(double x) { return x >= -0.5 && x < 0.5; }

}  // namespace

std::string_view to_string(Hypothesis h) {
  return h == Hypothesis::kH0 ? "H0" : "H1";
}

void ScenarioConfig::validate(bool require_mis) const {
  if (n < 2) fail(ErrorKind::kInvalidDimension, "n must be >= 2");
  if (k < 1) fail(ErrorKind::kInvalidDimension, "k must be >= 1");
  if (2 * k < n) {
    fail(ErrorKind::kSingularSecondary,
         "2k = " + std::to_string(2 * k) + " < n = " + std::to_string(n));
  }
  if (require_mis && n < 3) {
    fail(ErrorKind::kDegenerateStatistic,
         "the MIS needs n >= 3; lambda4 vanishes for n = " + std::to_string(n));
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    fail(ErrorKind::kDomain, "gamma must be positive");
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    fail(ErrorKind::kDomain, "rho must lie in [0, 1)");
  }
  if (!in_half_open_unit(doppler_fc)) {
    fail(ErrorKind::kDomain, "doppler_fc must lie in [-0.5, 0.5)");
  }
  if (!in_half_open_unit(nu)) {
    fail(ErrorKind::kDomain, "nu must lie in [-0.5, 0.5)");
  }
  if (!std::isfinite(cnr_db)) fail(ErrorKind::kDomain, "cnr_db must be finite");
  if (alpha && sinr_db) {
    fail(ErrorKind::kDomain, "alpha and sinr_db are mutually exclusive");
  }
  if (hypothesis == Hypothesis::kH1 && !alpha && !sinr_db) {
    fail(ErrorKind::kDomain, "H1 needs alpha or sinr_db");
  }
  if (hypothesis == Hypothesis::kH0 && (alpha || sinr_db)) {
    fail(ErrorKind::kDomain, "H0 takes neither alpha nor sinr_db");
  }
  if (sinr_db && std::isnan(*sinr_db)) {
    fail(ErrorKind::kDomain, "sinr_db is NaN");
  }
  if (k < 2 * n) {
    logger().debug("k = {} < 2n = {}", k, 2 * n);
  }
}

ScenarioConfig ScenarioConfig::null_hypothesis() const {
  ScenarioConfig out = *this;
  out.alpha.reset();
  out.sinr_db.reset();
  out.hypothesis = Hypothesis::kH0;
  return out;
}

ScenarioConfig ScenarioConfig::with_sinr(double db, double phase) const {
  ScenarioConfig out = *this;
  out.alpha.reset();
  out.sinr_db = db;
  out.alpha_phase = phase;
  out.hypothesis = Hypothesis::kH1;
  return out;
}

SteeringVector steering(Eigen::Index n, double nu) {
  if (n < 1) fail(ErrorKind::kInvalidDimension, "steering needs N >= 1");
  SteeringVector s;
  s.entries.resize(n);
  const double center = 0.5 * static_cast<double>(n - 1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phase =
        2.0 * std::numbers::pi * nu * (static_cast<double>(i) - center);
    s.entries(i) = std::polar(scale, phase);
  }
  return s;
}

PersymmetricCovariance covariance_model(Eigen::Index n, double rho,
                                        double doppler_fc, double cnr_db) {
  if (n < 1) fail(ErrorKind::kInvalidDimension, "covariance needs N >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) {
    fail(ErrorKind::kDomain, "rho must lie in [0, 1)");
  }
  const double clutter_power = std::pow(10.0, cnr_db / 10.0);
  PersymmetricCovariance m0;
  m0.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index lag = i - j;
      const double mag =
          clutter_power * std::pow(rho, static_cast<double>(std::abs(lag)));
      m0.entries(i, j) = std::polar(
          mag, 2.0 * std::numbers::pi * doppler_fc * static_cast<double>(lag));
    }
    m0.entries(i, i) += 1.0;
  }
  return m0;
}

double sinr(cdouble alpha, const SteeringVector& s,
            const PersymmetricCovariance& m0) {
  if (s.size() != m0.size()) {
    fail(ErrorKind::kInvalidDimension, "steering/covariance size mismatch");
  }
  const auto llt = factor_covariance(m0);
  const Eigen::VectorXcd w = llt.matrixL().solve(s.entries);
  return 2.0 * std::norm(alpha) * w.squaredNorm();
}

cdouble alpha_for_sinr(double sinr_db, double phase, const SteeringVector& s,
                       const PersymmetricCovariance& m0) {
  const double unit = sinr(1.0, s, m0);
  if (std::isinf(sinr_db) && sinr_db < 0.0) return 0.0;
  const double magnitude = std::sqrt(std::pow(10.0, sinr_db / 10.0) / unit);
  return std::polar(magnitude, phase);
}

ScenarioModel::ScenarioModel(const ScenarioConfig& cfg)
    : cfg_((cfg.validate(), cfg)),
      s_(steering(cfg.n, cfg.nu)),
      m0_(covariance_model(cfg.n, cfg.rho, cfg.doppler_fc, cfg.cnr_db)),
      lower_(factor_covariance(m0_).matrixL()),
      xf_(build_transform(s_)),
      alpha_(0.0) {
  if (cfg_.hypothesis == Hypothesis::kH1) {
    alpha_ = cfg_.alpha ? *cfg_.alpha
                        : alpha_for_sinr(*cfg_.sinr_db, cfg_.alpha_phase, s_,
                                         m0_);
  }
}

double ScenarioModel::sinr() const { return persym::sinr(alpha_, s_, m0_); }

Dataset ScenarioModel::sample(Rng& rng) const {
  const Eigen::Index n = cfg_.n;
  const Eigen::Index k = cfg_.k;
  const double h = std::sqrt(0.5);
  Eigen::MatrixXcd x(n, k + 1);
  for (Eigen::Index c = 0; c <= k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      x(i, c) = cdouble(h * re, h * im);
    }
  }
  const Eigen::MatrixXcd colored =
      lower_.triangularView<Eigen::Lower>() * x;

  Dataset out;
  out.truth = cfg_.hypothesis;
  out.scenario = cfg_;
  out.r = colored.col(0);
  if (cfg_.hypothesis == Hypothesis::kH1) out.r += alpha_ * s_.entries;
  out.rk = std::sqrt(cfg_.gamma) * colored.rightCols(k);
  return out;
}

SufficientStatistic ScenarioModel::sample_statistic(Rng& rng) const {
  const Dataset d = sample(rng);
  return assemble(canonicalize(d.r, d.rk, xf_));
}

Dataset sample_dataset(const ScenarioConfig& cfg, Rng& rng) {
  return ScenarioModel(cfg).sample(rng);
}

SufficientStatistic sample_white_statistic(Eigen::Index n, Eigen::Index k,
                                           Rng& rng) {
  if (n < 2 || k < 1 || 2 * k < n) {
    fail(ErrorKind::kInvalidDimension, "need n >= 2, k >= 1 and 2k >= n");
  }
  Eigen::MatrixXd zp(n, 2);
  for (Eigen::Index c = 0; c < 2; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) zp(i, c) = standard_normal(rng);
  }
  Eigen::MatrixXd zs(n, 2 * k);
  for (Eigen::Index c = 0; c < 2 * k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) zs(i, c) = standard_normal(rng);
  }
  Eigen::MatrixXd s = zs * zs.transpose();
  return SufficientStatistic(std::move(zp), std::move(s), k);
}

}  // namespace persym
