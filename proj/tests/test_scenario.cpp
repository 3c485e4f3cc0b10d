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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "persym/error.hpp"
#include "persym/random.hpp"
#include "persym/scenario.hpp"
#include "testing.hpp"

using namespace persym;
using persym::testing::error_kind;

TEST_CASE("steering vectors are unit-norm and persymmetric") {
  const SteeringVector s0 = steering(5, 0.0);
  CHECK((s0.entries - Eigen::VectorXcd::Constant(5, 1.0 / std::sqrt(5.0))).norm() < 1e-15);

  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 16);
    const SteeringVector s = steering(n, uniform01(rng) - 0.5);
    CHECK(std::abs(s.entries.norm() - 1.0) < 1e-12);
    CHECK(is_persymmetric(s.entries, 1e-12));
  }
  CHECK(error_kind([] { steering(0, 0.1); }) == ErrorKind::kInvalidDimension);
}

TEST_CASE("covariance model") {
  const PersymmetricCovariance white = covariance_model(4, 0.0, 0.0, 0.0);
  CHECK((white.entries - 2.0 * Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-15);

  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 12);
    const auto m = covariance_model(n, 0.999 * uniform01(rng), uniform01(rng) - 0.5,
                                    60.0 * uniform01(rng) - 20.0);
    CHECK(is_persymmetric(m.entries, 1e-10));
    CHECK((m.entries - m.entries.adjoint()).norm() == 0.0);
  }

  const auto m = covariance_model(8, 0.99, 0.1, 20.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.entries);
  CHECK(es.eigenvalues()(0) > 1.0);

  CHECK(error_kind([] { covariance_model(4, 1.0, 0.0, 0.0); }) == ErrorKind::kDomain);
  CHECK(error_kind([] { covariance_model(4, -0.1, 0.0, 0.0); }) == ErrorKind::kDomain);
}

TEST_CASE("sinr and its inverse") {
  const SteeringVector s = steering(4, 0.2);
  PersymmetricCovariance eye;
  eye.entries = Eigen::MatrixXcd::Identity(4, 4);
  CHECK(sinr(std::polar(1.0, 0.7), s, eye) == doctest::Approx(2.0).epsilon(1e-15));
  PersymmetricCovariance scaled;
  scaled.entries = 5.0 * eye.entries;
  CHECK(sinr(1.0, s, scaled) == doctest::Approx(0.4).epsilon(1e-15));

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng() % 8);
    const SteeringVector sv = steering(n, uniform01(rng) - 0.5);
    const auto m0 = covariance_model(n, 0.95 * uniform01(rng), 0.3, 20.0 * uniform01(rng));
    const double db = 30.0 * uniform01(rng) - 5.0;
    const double phase = 2.0 * std::numbers::pi * uniform01(rng);
    const cdouble a = alpha_for_sinr(db, phase, sv, m0);
    CHECK(std::abs(std::arg(a) - std::remainder(phase, 2.0 * std::numbers::pi)) < 1e-12);
    CHECK(std::abs(10.0 * std::log10(sinr(a, sv, m0)) - db) < 1e-10);

    // The same quantity in the canonical domain: |(Re a, Im a)|^2 e1^T M^-1 e1.
    const CanonicalTransform xf = build_transform(sv);
    const Eigen::MatrixXd m = xf.transform_covariance(m0.entries);
    const double canonical = std::norm(a) * m.inverse()(0, 0);
    CHECK(oracle::rel_err(canonical, sinr(a, sv, m0)) < 1e-10);
  }
  CHECK(alpha_for_sinr(-std::numeric_limits<double>::infinity(), 0.3, s, eye) == cdouble(0.0));
}

TEST_CASE("scenario config validation") {
  ScenarioConfig cfg;
  cfg.validate(true);
  ScenarioConfig bad = cfg;
  bad.gamma = 0.0;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kDomain);
  bad = cfg;
  bad.rho = 1.0;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kDomain);
  bad = cfg;
  bad.n = 2;
  bad.k = 4;
  bad.validate();
  CHECK(error_kind([&] { bad.validate(true); }) == ErrorKind::kDegenerateStatistic);
  bad = cfg;
  bad.hypothesis = Hypothesis::kH1;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kDomain);
  bad.alpha = cdouble(1.0, 0.0);
  bad.sinr_db = 10.0;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kDomain);
  bad = cfg;
  bad.alpha = cdouble(1.0, 0.0);
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kDomain);
  bad = cfg;
  bad.k = 3;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::kSingularSecondary);

  const ScenarioConfig h1 = cfg.with_sinr(12.0, 0.5);
  CHECK(h1.hypothesis == Hypothesis::kH1);
  CHECK(h1.sinr_db == 12.0);
  CHECK(h1.alpha_phase == 0.5);
  h1.validate();
  const ScenarioConfig h0 = h1.null_hypothesis();
  CHECK(h0.hypothesis == Hypothesis::kH0);
  CHECK_FALSE(h0.sinr_db.has_value());
  CHECK_FALSE(h0.alpha.has_value());
  CHECK(to_string(Hypothesis::kH1) == "H1");
}

TEST_CASE("model reports the SINR it injects") {
  ScenarioConfig cfg;
  cfg = cfg.with_sinr(12.0, 1.1);
  const ScenarioModel model(cfg);
  CHECK(10.0 * std::log10(model.sinr()) == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(std::abs(std::arg(model.alpha()) - 1.1) < 1e-12);

  ScenarioConfig direct;
  direct.hypothesis = Hypothesis::kH1;
  direct.alpha = cdouble(0.3, -0.4);
  CHECK(ScenarioModel(direct).alpha() == cdouble(0.3, -0.4));
  CHECK(ScenarioModel(ScenarioConfig{}).alpha() == cdouble(0.0));
}

TEST_CASE("sampling is deterministic and signal-additive") {
  ScenarioConfig h1;
  h1.hypothesis = Hypothesis::kH1;
  h1.alpha = cdouble(0.0, 0.0);
  ScenarioConfig h0;

  Rng a(77);
  Rng b(77);
  const Dataset d0 = sample_dataset(h0, a);
  const Dataset d1 = sample_dataset(h1, b);
  CHECK(d0.r == d1.r);
  CHECK(d0.rk == d1.rk);
  CHECK(d1.truth == Hypothesis::kH1);

  Rng c(77);
  ScenarioConfig sig = h1;
  sig.alpha = cdouble(2.0, 1.0);
  const Dataset d2 = sample_dataset(sig, c);
  const SteeringVector s = steering(sig.n, sig.nu);
  CHECK((d2.r - d0.r - sig.alpha.value() * s.entries).norm() < 1e-12);
  CHECK(d2.rk == d0.rk);
  CHECK(d0.rk.rows() == h0.n);
  CHECK(d0.rk.cols() == h0.k);
}

TEST_CASE("primary noise has covariance M0") {
  ScenarioConfig cfg;
  cfg.n = 6;
  cfg.k = 12;
  cfg.rho = 0.8;
  cfg.doppler_fc = 0.15;
  cfg.cnr_db = 10.0;
  const ScenarioModel model(cfg);
  Rng rng(4);
  const int draws = 100000;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(6, 6);
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXcd r = model.sample(rng).r;
    acc += r * r.adjoint();
  }
  acc /= static_cast<double>(draws);
  const Eigen::MatrixXcd& m0 = model.covariance().entries;
  CHECK((acc - m0).norm() <= 0.02 * m0.norm());
}

TEST_CASE("secondary power scales with gamma") {
  ScenarioConfig cfg;
  cfg.n = 4;
  cfg.k = 10;
  cfg.gamma = 3.0;
  const ScenarioModel model(cfg);
  Rng rng(5);
  double primary = 0.0;
  double secondary = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const Dataset d = model.sample(rng);
    primary += d.r.squaredNorm();
    secondary += d.rk.squaredNorm() / static_cast<double>(cfg.k);
  }
  CHECK(std::abs(secondary / primary - 3.0) <= 0.05 * 3.0);
}

TEST_CASE("white statistics") {
  Rng rng(6);
  const SufficientStatistic s = sample_white_statistic(5, 7, rng);
  CHECK(s.n() == 5);
  CHECK(s.k() == 7);
  CHECK(s.Zp().cols() == 2);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(s.S()).info() == Eigen::Success);
}
