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

#ifndef PERSYM_SUFFICIENT_STATS_HPP_
#define PERSYM_SUFFICIENT_STATS_HPP_

#include <array>

#include <Eigen/Dense>

#include "persym/persym_core.hpp"

namespace persym {

// Maximum condition number of S accepted by compute_psi().
inline constexpr double kMaxConditionNumber = 1e12;

// The pair (Zp, S): Zp = [z1 z2] is N x 2, S = Zs Zs^T is N x N with
// Zs = [z11 .. z1K z21 .. z2K]. Block views follow the partition of the first
// row/column from the remaining N - 1.
class SufficientStatistic {
 public:
  // Validates shapes and symmetry (relative 1e-12) and symmetrizes S.
  SufficientStatistic(Eigen::MatrixXd zp, Eigen::MatrixXd s, Eigen::Index k);

  const Eigen::MatrixXd& Zp() const { return zp_; }
  const Eigen::MatrixXd& S() const { return s_; }
  Eigen::Index n() const { return zp_.rows(); }
  Eigen::Index k() const { return k_; }

  Eigen::RowVector2d z1p() const { return zp_.row(0); }
  auto Z2p() const { return zp_.bottomRows(n() - 1); }
  double s11() const { return s_(0, 0); }
  auto s12() const { return s_.row(0).tail(n() - 1); }
  auto s21() const { return s_.col(0).tail(n() - 1); }
  auto S22() const { return s_.bottomRightCorner(n() - 1, n() - 1); }

 private:
  Eigen::MatrixXd zp_;
  Eigen::MatrixXd s_;
  Eigen::Index k_;
};

// Psi0 = Zp^T S^-1 Zp and Psi1 = Z2p^T S22^-1 Z2p with eigenvalues
// lambda = (l1 >= l2 of Psi0, l3 >= l4 of Psi1). Ties are ordered
// descending with no further tie-break; the MIS does not depend on it.
struct PsiPair {
  Eigen::Matrix2d psi0 = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d psi1 = Eigen::Matrix2d::Zero();
  std::array<double, 4> lambda{};
  // Dimension N of the statistic the pair was computed from; 0 when the pair
  // was assembled by hand.
  Eigen::Index n = 0;

  double trace0() const { return psi0.trace(); }
  double trace1() const { return psi1.trace(); }
  double det0() const { return lambda[0] * lambda[1]; }
  double det1() const { return lambda[2] * lambda[3]; }
};

struct MISVector {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;

  std::array<double, 3> as_array() const { return {t1, t2, t3}; }
};

struct ScaleEstimates {
  double gamma0_hat = 0.0;
  double gamma1_hat = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
};

// Builds (Zp, S) from canonical data. Requires 2K >= N; logs a warning when
// K < 2N.
SufficientStatistic assemble(const CanonicalizedData& data);

// Closed-form eigenvalues (max, min) of a symmetric 2 x 2 matrix. The
// discriminant is evaluated as (a - d)^2 + 4 b^2 so it never goes negative.
std::array<double, 2> eig2_desc(const Eigen::Matrix2d& a);

// As above, with an externally supplied determinant; the small eigenvalue is
// det / lambda_max.
std::array<double, 2> eig2_desc(const Eigen::Matrix2d& a, double det);

// Pair with eigenvalues filled in from the two matrices.
PsiPair make_psi_pair(const Eigen::Matrix2d& psi0, const Eigen::Matrix2d& psi1);

// Both quadratic forms from one Cholesky factorization of S in reversed
// index order; the leading block of that factor whitens S22, so Psi0 - Psi1
// comes out as an explicit rank-one term.
PsiPair compute_psi(const SufficientStatistic& stat);

// t = (l1 / l4, l2 / l4, l3 / l4). Throws kDegenerateStatistic for N < 3 or
// when l4 is not positive relative to l3.
MISVector mis(const PsiPair& psis);

// ML estimate of the power scaling for one quadratic form, evaluated in the
// cancellation-free form 2N / (beta + (K + 1 - N) tr). Returns {gamma, beta}.
std::array<double, 2> scale_estimate(double trace, double det, Eigen::Index k,
                                     Eigen::Index n);

ScaleEstimates scale_estimates(const PsiPair& psis, Eigen::Index k,
                               Eigen::Index n);

}  // namespace persym

#endif  // PERSYM_SUFFICIENT_STATS_HPP_
