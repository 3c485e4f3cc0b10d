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

#ifndef PERSYM_PERSYM_CORE_HPP_
#define PERSYM_PERSYM_CORE_HPP_

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace persym {

using cdouble = std::complex<double>;

inline constexpr double kDefaultPersymmetryTol = 1e-10;

// Unit-norm steering vector satisfying s = J s*. Construction does not
// validate; build_transform() does.
struct SteeringVector {
  Eigen::VectorXcd entries;

  Eigen::Index size() const { return entries.size(); }
};

// Hermitian positive definite covariance with M0 = J M0* J.
struct PersymmetricCovariance {
  Eigen::MatrixXcd entries;

  Eigen::Index size() const { return entries.rows(); }
};

// N x N anti-identity: J(i, j) = 1 iff j = N - 1 - i.
Eigen::MatrixXd exchange_matrix(Eigen::Index n);

// True iff ||M - J M* J||_F <= tol * ||M||_F.
bool is_persymmetric(const Eigen::MatrixXcd& m,
                     double tol = kDefaultPersymmetryTol);

// Same test for a vector: ||s - J s*|| <= tol * ||s||.
bool is_persymmetric(const Eigen::VectorXcd& s,
                     double tol = kDefaultPersymmetryTol);

// The unitary T mapping persymmetric Hermitian matrices to real symmetric
// ones, the exchange J, and a real orthogonal V whose first row is (T s)^T so
// that V T s = e1. Immutable once built.
class CanonicalTransform {
 public:
  CanonicalTransform(Eigen::MatrixXcd t, Eigen::MatrixXd v, Eigen::MatrixXd j);

  const Eigen::MatrixXcd& T() const { return t_; }
  const Eigen::MatrixXd& V() const { return v_; }
  const Eigen::MatrixXd& J() const { return j_; }
  Eigen::Index size() const { return v_.rows(); }

  // V * Re(T x) and V * Im(T x), column-wise.
  void apply(const Eigen::MatrixXcd& x, Eigen::MatrixXd& re,
             Eigen::MatrixXd& im) const;

  // (1/2) V T M0 T^H V^T with the imaginary residue dropped.
  Eigen::MatrixXd transform_covariance(const Eigen::MatrixXcd& m0) const;

 private:
  Eigen::MatrixXcd t_;
  Eigen::MatrixXd v_;
  Eigen::MatrixXd j_;
};

// Real-valued data after the canonical map. Secondary vectors are stored as
// the columns of z1k / z2k (N x K).
struct CanonicalizedData {
  Eigen::VectorXd z1;
  Eigen::VectorXd z2;
  Eigen::MatrixXd z1k;
  Eigen::MatrixXd z2k;

  Eigen::Index n() const { return z1.size(); }
  Eigen::Index k() const { return z1k.cols(); }
};

// The persymmetric-to-real unitary. For N = 2m:
//   T = 1/sqrt(2) [[I, J], [iI, -iJ]]
// and for N = 2m + 1 the middle row/column is sqrt(2) / sqrt(2) = 1.
Eigen::MatrixXcd persymmetric_unitary(Eigen::Index n);

CanonicalTransform build_transform(const SteeringVector& s,
                                   double tol = kDefaultPersymmetryTol);

CanonicalizedData canonicalize(const Eigen::VectorXcd& r,
                               const std::vector<Eigen::VectorXcd>& rk,
                               const CanonicalTransform& xf);

// Same as above with secondaries packed as the columns of an N x K matrix.
CanonicalizedData canonicalize(const Eigen::VectorXcd& r,
                               const Eigen::MatrixXcd& rk,
                               const CanonicalTransform& xf);

}  // namespace persym

#endif  // PERSYM_PERSYM_CORE_HPP_
