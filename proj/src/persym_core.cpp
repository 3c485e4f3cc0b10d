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

#include "persym/persym_core.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "persym/error.hpp"

namespace persym {

namespace {

constexpr double kUnitNormTol = 1e-12;
constexpr double kAlignedTol = 1e-12;

Eigen::MatrixXcd flip_conj(const Eigen::MatrixXcd& m) {
  // J M* J reverses both index orders.
  return m.conjugate().reverse();
}

}  // namespace

Eigen::MatrixXd exchange_matrix(Eigen::Index n) {
  if (n < 1) {
    fail(ErrorKind::kInvalidDimension, "exchange_matrix requires N >= 1");
  }
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) j(i, n - 1 - i) = 1.0;
  return j;
}

bool is_persymmetric(const Eigen::MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) {
    fail(ErrorKind::kInvalidDimension,
         "is_persymmetric requires a square matrix, got " +
             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  return (m - flip_conj(m)).norm() <= tol * m.norm();
}

bool is_persymmetric(const Eigen::VectorXcd& s, double tol) {
  const Eigen::VectorXcd flipped = s.conjugate().reverse();
  return (s - flipped).norm() <= tol * s.norm();
}

CanonicalTransform::CanonicalTransform(Eigen::MatrixXcd t, Eigen::MatrixXd v,
                                       Eigen::MatrixXd j)
    : t_(std::move(t)), v_(std::move(v)), j_(std::move(j)) {}

void CanonicalTransform::apply(const Eigen::MatrixXcd& x, Eigen::MatrixXd& re,
                               Eigen::MatrixXd& im) const {
  if (x.rows() != size()) {
    fail(ErrorKind::kInvalidDimension,
         "expected vectors of length " + std::to_string(size()) + ", got " +
             std::to_string(x.rows()));
  }
  const Eigen::MatrixXcd tx = t_ * x;
  re.noalias() = v_ * tx.real();
  im.noalias() = v_ * tx.imag();
}

Eigen::MatrixXd CanonicalTransform::transform_covariance(
    const Eigen::MatrixXcd& m0) const {
  const Eigen::MatrixXcd c = t_ * m0 * t_.adjoint();
  Eigen::MatrixXd m = 0.5 * v_ * c.real() * v_.transpose();
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXcd persymmetric_unitary(Eigen::Index n) {
  if (n < 1) {
    fail(ErrorKind::kInvalidDimension, "transform requires N >= 1");
  }
  const Eigen::Index m = n / 2;
  const double h = 1.0 / std::sqrt(2.0);
  const cdouble i_unit(0.0, 1.0);
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::Index lower = n - m;  // first row of the imaginary block
  for (Eigen::Index r = 0; r < m; ++r) {
    t(r, r) = h;
    t(r, n - 1 - r) = h;
    t(lower + r, r) = i_unit * h;
    t(lower + r, n - 1 - r) = -i_unit * h;
  }
  if (n % 2 == 1) t(m, m) = 1.0;
  return t;
}

CanonicalTransform build_transform(const SteeringVector& s, double tol) {
  const Eigen::Index n = s.size();
  if (n < 1) fail(ErrorKind::kInvalidDimension, "empty steering vector");
  if (std::abs(s.entries.norm() - 1.0) > kUnitNormTol) {
    fail(ErrorKind::kNormalization,
         "steering vector norm " + std::to_string(s.entries.norm()) +
             " differs from 1");
  }
  if (!is_persymmetric(s.entries, tol)) {
    fail(ErrorKind::kModelViolation, "steering vector is not persymmetric");
  }

  Eigen::MatrixXcd t = persymmetric_unitary(n);
  const Eigen::VectorXcd ts = t * s.entries;
  if (ts.imag().norm() > 1e-10) {
    fail(ErrorKind::kModelViolation, "T s is not real-valued");
  }
  const Eigen::VectorXd u = ts.real();

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
  e1(0) = 1.0;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  if ((u - e1).norm() > kAlignedTol) {
    // Stable Householder vector w = u + sign(u0) e1 gives H u = -sign(u0) e1;
    // rescale by -sign(u0) so that V u = e1 holds exactly.
    const double sgn = u(0) >= 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd w = u;
    w(0) += sgn;
    v -= (2.0 / w.squaredNorm()) * w * w.transpose();
    v *= -sgn;
  }
  return CanonicalTransform(std::move(t), std::move(v), exchange_matrix(n));
}

CanonicalizedData canonicalize(const Eigen::VectorXcd& r,
                               const Eigen::MatrixXcd& rk,
                               const CanonicalTransform& xf) {
  if (rk.cols() < 1) {
    fail(ErrorKind::kInvalidDimension, "at least one secondary vector needed");
  }
  if (r.size() != xf.size() || rk.rows() != xf.size()) {
    fail(ErrorKind::kInvalidDimension,
         "data length does not match transform size " +
             std::to_string(xf.size()));
  }
  CanonicalizedData out;
  Eigen::MatrixXd re, im;
  xf.apply(r, re, im);
  out.z1 = re.col(0);
  out.z2 = im.col(0);
  xf.apply(rk, out.z1k, out.z2k);
  return out;
}

CanonicalizedData canonicalize(const Eigen::VectorXcd& r,
                               const std::vector<Eigen::VectorXcd>& rk,
                               const CanonicalTransform& xf) {
  Eigen::MatrixXcd packed(xf.size(), static_cast<Eigen::Index>(rk.size()));
  for (std::size_t k = 0; k < rk.size(); ++k) {
    if (rk[k].size() != xf.size()) {
      fail(ErrorKind::kInvalidDimension,
           "secondary vector " + std::to_string(k) + " has length " +
               std::to_string(rk[k].size()));
    }
    packed.col(static_cast<Eigen::Index>(k)) = rk[k];
  }
  return canonicalize(r, packed, xf);
}

}  // namespace persym
