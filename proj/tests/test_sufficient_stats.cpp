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

#include "oracles.hpp"
#include "persym/error.hpp"
#include "persym/random.hpp"
#include "persym/scenario.hpp"
#include "persym/sufficient_stats.hpp"
#include "testing.hpp"

using namespace persym;
using persym::testing::error_kind;

namespace {

CanonicalizedData empty_data(Eigen::Index n, Eigen::Index k) {
  CanonicalizedData d;
  d.z1 = Eigen::VectorXd::Zero(n);
  d.z2 = Eigen::VectorXd::Zero(n);
  d.z1k = Eigen::MatrixXd::Zero(n, k);
  d.z2k = Eigen::MatrixXd::Zero(n, k);
  return d;
}

}  // namespace

TEST_CASE("assemble sums outer products of the secondaries") {
  auto d = empty_data(4, 1);
  d.z1k(0, 0) = 3.0;
  d.z2k(1, 0) = -2.0;
  d.z1 << 1, 2, 3, 4;
  d.z2 << 5, 6, 7, 8;
  // 2K < N: the statistic would be singular.
  CHECK(error_kind([&] { assemble(d); }) == ErrorKind::kSingularSecondary);

  auto e = empty_data(2, 1);
  e.z1k(0, 0) = 3.0;
  e.z2k(1, 0) = -2.0;
  e.z1 << 1, 2;
  e.z2 << 5, 6;
  const SufficientStatistic stat = assemble(e);
  Eigen::Matrix2d want;
  want << 9, 0, 0, 4;
  CHECK(stat.S() == Eigen::MatrixXd(want));
  CHECK(stat.Zp()(1, 0) == 2.0);
  CHECK(stat.Zp()(0, 1) == 5.0);
  CHECK(stat.k() == 1);
}

TEST_CASE("assemble block views are consistent") {
  Rng rng(3);
  const SufficientStatistic stat = sample_white_statistic(5, 10, rng);
  CHECK(stat.s21().transpose() == stat.s12());
  CHECK(stat.S22() == stat.S().bottomRightCorner(4, 4));
  CHECK(stat.z1p() == stat.Zp().row(0));
  CHECK(stat.Z2p() == stat.Zp().bottomRows(4));
  CHECK(stat.s11() == stat.S()(0, 0));
}

TEST_CASE("secondary sample covariance converges to gamma M") {
  const Eigen::Index n = 4;
  const Eigen::Index k = 10000;
  ScenarioConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.rho = 0.7;
  cfg.gamma = 2.5;
  const ScenarioModel model(cfg);
  Rng rng(17);
  const Dataset ds = model.sample(rng);
  const SufficientStatistic stat =
      assemble(canonicalize(ds.r, ds.rk, model.transform()));
  const Eigen::MatrixXd m =
      cfg.gamma * model.transform().transform_covariance(model.covariance().entries);
  const Eigen::MatrixXd est = stat.S() / (2.0 * k);
  CHECK((est - m).norm() <= 0.05 * m.norm());
}

TEST_CASE("assemble validates the statistic") {
  CHECK(error_kind([] {
          SufficientStatistic(Eigen::MatrixXd::Zero(3, 2),
                              Eigen::MatrixXd::Identity(2, 2), 4);
        }) == ErrorKind::kInvalidDimension);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
  s(0, 1) = 0.5;
  CHECK(error_kind([&] {
          SufficientStatistic(Eigen::MatrixXd::Zero(3, 2), s, 4);
        }) == ErrorKind::kModelViolation);
}

TEST_CASE("compute_psi small examples") {
  Eigen::MatrixXd zp(3, 2);
  zp << 1, 0, 0, 0, 0, 0;
  PsiPair p = compute_psi(SufficientStatistic(zp, Eigen::MatrixXd::Identity(3, 3), 4));
  CHECK(p.psi1.norm() == 0.0);
  CHECK(p.lambda[2] == 0.0);
  CHECK(p.lambda[3] == 0.0);

  zp << 1, 0, 1, 0, 0, 1;
  p = compute_psi(SufficientStatistic(zp, Eigen::MatrixXd::Identity(3, 3), 4));
  Eigen::Matrix2d p0;
  p0 << 2, 0, 0, 1;
  CHECK((p.psi0 - p0).norm() < 1e-15);
  CHECK((p.psi1 - Eigen::Matrix2d::Identity()).norm() < 1e-15);
  CHECK(p.lambda[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p.lambda[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.lambda[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.lambda[3] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.n == 3);
}

TEST_CASE("compute_psi agrees with a general-purpose solver") {
  Rng rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng() % 8);
    const Eigen::Index k = n + static_cast<Eigen::Index>(rng() % 20);
    const SufficientStatistic stat = sample_white_statistic(n, k, rng);
    const PsiPair p = compute_psi(stat);
    const auto ref = oracle::psi(stat.Zp(), stat.S());
    CHECK((p.psi0 - ref[0]).norm() <= 1e-10 * ref[0].norm());
    CHECK((p.psi1 - ref[1]).norm() <= 1e-10 * ref[1].norm());
    const auto e0 = oracle::eig_desc(ref[0]);
    const auto e1 = oracle::eig_desc(ref[1]);
    CHECK(oracle::rel_err(p.lambda[0], e0[0]) < 1e-10);
    CHECK(oracle::rel_err(p.lambda[1], e0[1]) < 1e-10);
    CHECK(oracle::rel_err(p.lambda[2], e1[0]) < 1e-10);
    CHECK(oracle::rel_err(p.lambda[3], e1[1]) < 1e-10);
  }
}

TEST_CASE("compute_psi rejects ill-conditioned S") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
  s(3, 3) = 1e-14;
  const Eigen::MatrixXd zp = Eigen::MatrixXd::Ones(4, 2);
  CHECK(error_kind([&] { compute_psi(SufficientStatistic(zp, s, 4)); }) ==
        ErrorKind::kNumericalConditioning);
  s(3, 3) = 0.0;
  CHECK(error_kind([&] { compute_psi(SufficientStatistic(zp, s, 4)); }) ==
        ErrorKind::kNumericalConditioning);
}

TEST_CASE("eig2_desc") {
  Eigen::Matrix2d a;
  a << 2, 0, 0, 1;
  auto e = eig2_desc(a);
  CHECK(e[0] == 2.0);
  CHECK(e[1] == 1.0);
  a << 2, 1, 1, 2;
  e = eig2_desc(a);
  CHECK(e[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(e[1] == doctest::Approx(1.0).epsilon(1e-15));
  a << 1, 1, 1, 1;
  e = eig2_desc(a);
  CHECK(e[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(e[1]) < 1e-15);

  Rng rng(8);
  for (int trial = 0; trial < 10000; ++trial) {
    Eigen::Matrix2d x;
    x << standard_normal(rng), standard_normal(rng), standard_normal(rng),
        standard_normal(rng);
    const Eigen::Matrix2d m = x * x.transpose();
    const auto got = eig2_desc(m);
    const auto want = oracle::eig_desc(m);
    CHECK(std::abs(got[0] - want[0]) <= 1e-12 * want[0]);
    CHECK(std::abs(got[1] - want[1]) <= 1e-12 * want[0]);
    CHECK(got[0] >= got[1]);
  }
}

TEST_CASE("mis divides by the smallest eigenvalue") {
  Eigen::Matrix2d p0;
  p0 << 2, 0, 0, 1;
  Eigen::Matrix2d p1;
  p1 << 1.5, 0, 0, 0.5;
  MISVector t = mis(make_psi_pair(p0, p1));
  CHECK(t.t1 == 4.0);
  CHECK(t.t2 == 2.0);
  CHECK(t.t3 == 3.0);

  const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();
  t = mis(make_psi_pair(eye, eye));
  CHECK(t.as_array() == std::array<double, 3>{1.0, 1.0, 1.0});

  p1 << 1, 0, 0, 0;
  CHECK(error_kind([&] { mis(make_psi_pair(eye, p1)); }) ==
        ErrorKind::kDegenerateStatistic);

  Rng rng(1);
  const PsiPair two = compute_psi(sample_white_statistic(2, 6, rng));
  CHECK(error_kind([&] { mis(two); }) == ErrorKind::kDegenerateStatistic);
}

TEST_CASE("scaling S leaves the MIS unchanged") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const SufficientStatistic stat = sample_white_statistic(6, 12, rng);
    const PsiPair p = compute_psi(stat);
    const MISVector t = mis(p);
    for (double phi : {1e-2, 1.0, 1e2}) {
      const PsiPair q = compute_psi(SufficientStatistic(stat.Zp(), phi * stat.S(), stat.k()));
      for (int i = 0; i < 4; ++i) {
        CHECK(oracle::rel_err(q.lambda[i], p.lambda[i] / phi) < 1e-12);
      }
      const MISVector u = mis(q);
      CHECK(oracle::rel_err(u.t1, t.t1) < 1e-12);
      CHECK(oracle::rel_err(u.t2, t.t2) < 1e-12);
      CHECK(oracle::rel_err(u.t3, t.t3) < 1e-12);
    }
  }
}

TEST_CASE("scale estimates") {
  auto ge = scale_estimate(2.0, 1.0, 4, 2);
  CHECK(ge[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(ge[1] == doctest::Approx(10.0).epsilon(1e-15));

  Eigen::Matrix2d p0;
  p0 << 2, 0, 0, 1;
  Eigen::Matrix2d p1;
  p1 << 1.5, 0, 0, 0.5;
  const ScaleEstimates se = scale_estimates(make_psi_pair(p0, p1), 8, 4);
  CHECK(oracle::rel_err(se.gamma0_hat, 0.1953972061097445480) < 1e-14);
  CHECK(oracle::rel_err(se.beta0, 25.94224354214569469) < 1e-14);
  CHECK(oracle::rel_err(se.gamma1_hat, 0.3033669306545190448) < 1e-14);
  CHECK(oracle::rel_err(se.beta1, 16.37070554374489994) < 1e-14);

  // det -> 0 with the trace fixed approaches N / ((K + 1 - N) Tr).
  const double limit = 4.0 / (5.0 * 3.0);
  CHECK(oracle::rel_err(scale_estimate(3.0, 1e-14, 8, 4)[0], limit) < 1e-12);
  CHECK(scale_estimate(3.0, 0.0, 8, 4)[0] == doctest::Approx(limit).epsilon(1e-15));

  CHECK(error_kind([] { scale_estimate(0.0, 0.0, 8, 4); }) ==
        ErrorKind::kDegenerateStatistic);
  CHECK(error_kind([] { scale_estimate(1.0, 0.1, 3, 4); }) == ErrorKind::kDomain);
}

TEST_CASE("scale estimates match the literal expression") {
  Rng rng(77);
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng() % 8);
    const Eigen::Index k = n + static_cast<Eigen::Index>(rng() % 30);
    const PsiPair p = compute_psi(sample_white_statistic(n, k, rng));
    const ScaleEstimates se = scale_estimates(p, k, n);
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    CHECK(oracle::rel_err(se.gamma0_hat,
                          oracle::gamma_hat(p.trace0(), p.psi0.determinant(), kd, nd)) < 1e-8);
    CHECK(oracle::rel_err(se.gamma1_hat,
                          oracle::gamma_hat(p.trace1(), p.psi1.determinant(), kd, nd)) < 1e-8);
    CHECK(se.gamma0_hat > 0.0);
    CHECK(se.gamma1_hat > 0.0);
    CHECK(se.beta0 >= (kd + 1.0 - nd) * p.trace0());
    CHECK(se.beta1 >= (kd + 1.0 - nd) * p.trace1());
  }
}

TEST_CASE("rank-one update and interlacing") {
  Rng rng(2718);
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng() % 6);
    const Eigen::Index k = 2 * n + static_cast<Eigen::Index>(rng() % 8);
    const SufficientStatistic stat = sample_white_statistic(n, k, rng);
    const PsiPair p = compute_psi(stat);
    const Eigen::Matrix2d diff = p.psi0 - p.psi1;
    const Eigen::Matrix2d r1 = oracle::rank_one_term(stat.Zp(), stat.S());
    CHECK((diff - r1).norm() <= 1e-9 * (1.0 + r1.norm()));
    const auto ed = oracle::eig_desc(diff);
    CHECK(ed[1] >= -1e-10 * (1.0 + ed[0]));
    CHECK(std::abs(ed[1]) <= 1e-10 * (1.0 + ed[0]));
    const auto& l = p.lambda;
    CHECK(l[0] + 1e-10 >= l[2]);
    CHECK(l[2] + 1e-10 >= l[1]);
    CHECK(l[1] + 1e-10 >= l[3]);
    CHECK(l[3] >= 0.0);
  }
}
