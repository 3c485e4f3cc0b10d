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
#include <complex>
#include <vector>

#include "persym/error.hpp"
#include "persym/persym_core.hpp"
#include "persym/random.hpp"
#include "persym/scenario.hpp"
#include "testing.hpp"

using namespace persym;
using persym::testing::error_kind;

namespace {

Eigen::VectorXd unit(Eigen::Index n, Eigen::Index i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(i) = 1.0;
  return e;
}

}  // namespace

TEST_CASE("exchange matrix is the anti-identity") {
  Eigen::MatrixXd j2(2, 2);
  j2 << 0, 1, 1, 0;
  CHECK(exchange_matrix(2) == j2);

  Eigen::MatrixXd j3(3, 3);
  j3 << 0, 0, 1, 0, 1, 0, 1, 0, 0;
  CHECK(exchange_matrix(3) == j3);

  for (Eigen::Index n = 1; n <= 9; ++n) {
    const Eigen::MatrixXd j = exchange_matrix(n);
    CHECK(j * j == Eigen::MatrixXd::Identity(n, n));
  }
  CHECK(error_kind([] { exchange_matrix(0); }) == ErrorKind::kInvalidDimension);
}

TEST_CASE("is_persymmetric") {
  CHECK(is_persymmetric(Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(5, 5))));

  // Hermitian Toeplitz with first row (1, 0.9 e^{j0.3}, 0.81 e^{j0.6}).
  const cdouble a = std::polar(0.9, 0.3);
  const cdouble b = std::polar(0.81, 0.6);
  Eigen::MatrixXcd t(3, 3);
  t << 1.0, a, b, std::conj(a), 1.0, a, std::conj(b), std::conj(a), 1.0;
  CHECK(is_persymmetric(t));

  Rng rng(11);
  Eigen::MatrixXcd h(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    h(i, i) = 2.0 + standard_normal(rng);
    for (Eigen::Index j = i + 1; j < 4; ++j) {
      h(i, j) = cdouble(standard_normal(rng), standard_normal(rng));
      h(j, i) = std::conj(h(i, j));
    }
  }
  CHECK_FALSE(is_persymmetric(h));

  CHECK(error_kind([] { is_persymmetric(Eigen::MatrixXcd(2, 3)); }) ==
        ErrorKind::kInvalidDimension);
}

TEST_CASE("build_transform on N = 2 uniform steering") {
  SteeringVector s;
  s.entries = Eigen::VectorXcd::Constant(2, 1.0 / std::sqrt(2.0));
  const CanonicalTransform xf = build_transform(s);

  const double h = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd t(2, 2);
  t << h, h, cdouble(0, h), cdouble(0, -h);
  CHECK((xf.T() - t).norm() < 1e-15);
  const Eigen::VectorXcd ts = xf.T() * s.entries;
  CHECK((ts - Eigen::VectorXcd(unit(2, 0).cast<cdouble>())).norm() < 1e-15);
  CHECK(xf.V() == Eigen::MatrixXd::Identity(2, 2));
}

TEST_CASE("build_transform on N = 3 uniform steering") {
  SteeringVector s;
  s.entries = Eigen::VectorXcd::Constant(3, 1.0 / std::sqrt(3.0));
  const CanonicalTransform xf = build_transform(s);
  const Eigen::VectorXcd ts = xf.T() * s.entries;
  CHECK(ts.imag().norm() < 1e-15);
  CHECK(ts.real()(0) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
  CHECK(ts.real()(1) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(std::abs(ts.real()(2)) < 1e-15);
  // A (signed) Householder reflector is symmetric and orthogonal.
  CHECK((xf.V() - xf.V().transpose()).norm() < 1e-15);
  CHECK((xf.V() * ts.real() - unit(3, 0)).norm() < 1e-15);
}

TEST_CASE("build_transform rejects invalid steering vectors") {
  SteeringVector s;
  s.entries = Eigen::VectorXcd::Constant(4, 0.4);
  CHECK(error_kind([&] { build_transform(s); }) == ErrorKind::kNormalization);

  s.entries = Eigen::VectorXcd::Zero(4);
  s.entries(0) = 1.0;  // unit norm, J s* != s
  CHECK(error_kind([&] { build_transform(s); }) == ErrorKind::kModelViolation);
}

TEST_CASE("transform invariants over random persymmetric steering vectors") {
  Rng rng(2026);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 12);
    const double nu = uniform01(rng) - 0.5;
    const SteeringVector s = steering(n, nu);
    const CanonicalTransform xf = build_transform(s);
    const auto eye = Eigen::MatrixXd::Identity(n, n);

    CHECK((xf.T() * xf.T().adjoint() - eye.cast<cdouble>()).norm() < 1e-12);
    CHECK((xf.V() * xf.V().transpose() - eye).norm() < 1e-12);
    CHECK(xf.J() * xf.J() == eye);
    const Eigen::VectorXcd ts = xf.T() * s.entries;
    CHECK(ts.imag().norm() < 1e-10);
    CHECK((xf.V() * ts.real() - unit(n, 0)).norm() < 1e-10);
    CHECK((xf.V().row(0).transpose() - ts.real()).norm() < 1e-10);

    const CanonicalTransform again = build_transform(s);
    CHECK(again.T() == xf.T());
    CHECK(again.V() == xf.V());
  }
}

TEST_CASE("transformed persymmetric covariance is real symmetric PD") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 10);
    const auto m0 = covariance_model(n, 0.99 * uniform01(rng),
                                     uniform01(rng) - 0.5,
                                     40.0 * uniform01(rng) - 10.0);
    const CanonicalTransform xf = build_transform(steering(n, 0.3));
    const Eigen::MatrixXcd c =
        0.5 * xf.V().cast<cdouble>() * xf.T() * m0.entries * xf.T().adjoint() *
        xf.V().transpose().cast<cdouble>();
    CHECK(c.imag().norm() <= 1e-10 * c.norm());
    const Eigen::MatrixXd m = xf.transform_covariance(m0.entries);
    CHECK((m - m.transpose()).norm() <= 1e-12 * m.norm());
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues()(0) >
          0.0);
  }
}

TEST_CASE("canonicalize maps the steering vector onto e1") {
  const Eigen::Index n = 6;
  const SteeringVector s = steering(n, 0.17);
  const CanonicalTransform xf = build_transform(s);
  const Eigen::MatrixXcd rk = Eigen::MatrixXcd::Identity(n, 2);

  auto d = canonicalize(s.entries, rk, xf);
  CHECK((d.z1 - unit(n, 0)).norm() < 1e-12);
  CHECK(d.z2.norm() < 1e-12);
  CHECK(d.k() == 2);

  d = canonicalize(cdouble(0, 1) * s.entries, rk, xf);
  CHECK(d.z1.norm() < 1e-12);
  CHECK((d.z2 - unit(n, 0)).norm() < 1e-12);

  d = canonicalize(Eigen::VectorXcd::Zero(n), rk, xf);
  CHECK(d.z1.norm() == 0.0);
  CHECK(d.z2.norm() == 0.0);

  const std::vector<Eigen::VectorXcd> bad = {Eigen::VectorXcd::Zero(n + 1)};
  CHECK(error_kind([&] { canonicalize(s.entries, bad, xf); }) ==
        ErrorKind::kInvalidDimension);
  CHECK(error_kind([&] { canonicalize(Eigen::VectorXcd::Zero(n - 1), rk, xf); }) ==
        ErrorKind::kInvalidDimension);
}

TEST_CASE("canonicalize preserves energy") {
  Rng rng(99);
  const Eigen::Index n = 7;
  const CanonicalTransform xf = build_transform(steering(n, -0.21));
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXcd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      r(i) = cdouble(standard_normal(rng), standard_normal(rng));
    }
    std::vector<Eigen::VectorXcd> rk = {r, 2.0 * r};
    const auto d = canonicalize(r, rk, xf);
    const double energy = d.z1.squaredNorm() + d.z2.squaredNorm();
    CHECK(std::abs(energy - r.squaredNorm()) <= 1e-10 * r.squaredNorm());
    const double sec = d.z1k.col(1).squaredNorm() + d.z2k.col(1).squaredNorm();
    CHECK(std::abs(sec - 4.0 * r.squaredNorm()) <= 1e-10 * r.squaredNorm());
  }
}
