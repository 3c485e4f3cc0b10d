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

#include "persym/sufficient_stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "persym/error.hpp"
#include "persym/log.hpp"

namespace persym {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kDegenerateRatio = 1e-12;

// Gram determinant of the 2-column matrix b, via one Gram-Schmidt step.
double gram_det(const Eigen::Ref<const Eigen::MatrixX2d>& b) {
  const double a = b.col(0).squaredNorm();
  if (a == 0.0) return 0.0;
  const double c = b.col(0).dot(b.col(1));
  return a * (b.col(1) - (c / a) * b.col(0)).squaredNorm();
}

}  // namespace

SufficientStatistic::SufficientStatistic(Eigen::MatrixXd zp,
                                         Eigen::MatrixXd s, Eigen::Index k)
    : zp_(std::move(zp)), s_(std::move(s)), k_(k) {
  if (zp_.cols() != 2 || zp_.rows() < 2) {
    fail(ErrorKind::kInvalidDimension,
         "Zp must be N x 2 with N >= 2, got " + std::to_string(zp_.rows()) +
             "x" + std::to_string(zp_.cols()));
  }
  if (s_.rows() != zp_.rows() || s_.cols() != zp_.rows()) {
    fail(ErrorKind::kInvalidDimension, "S must be N x N with N = rows(Zp)");
  }
  if (k_ < 1) fail(ErrorKind::kInvalidDimension, "K must be >= 1");
  if (!zp_.allFinite() || !s_.allFinite()) {
    fail(ErrorKind::kModelViolation, "non-finite entries in (Zp, S)");
  }
  if ((s_ - s_.transpose()).norm() > kSymmetryTol * s_.norm()) {
    fail(ErrorKind::kModelViolation, "S is not symmetric");
  }
  s_ = 0.5 * (s_ + s_.transpose()).eval();
}

SufficientStatistic assemble(const CanonicalizedData& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index k = data.k();
  if (k < 1) fail(ErrorKind::kInvalidDimension, "K must be >= 1");
  if (data.z2.size() != n || data.z1k.rows() != n || data.z2k.rows() != n ||
      data.z2k.cols() != k) {
    fail(ErrorKind::kInvalidDimension, "inconsistent canonical data shapes");
  }
  if (2 * k < n) {
    fail(ErrorKind::kSingularSecondary,
         "2K = " + std::to_string(2 * k) + " < N = " + std::to_string(n) +
             ": S is singular");
  }
  if (k < 2 * n) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      logger().warn("K = {} < 2N = {}; results are outside the validated "
                    "regime K >= 2N",
                    k, 2 * n);
    }
  }

  Eigen::MatrixXd zp(n, 2);
  zp.col(0) = data.z1;
  zp.col(1) = data.z2;

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  s.selfadjointView<Eigen::Lower>().rankUpdate(data.z1k);
  s.selfadjointView<Eigen::Lower>().rankUpdate(data.z2k);
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return SufficientStatistic(std::move(zp), std::move(s), k);
}

std::array<double, 2> eig2_desc(const Eigen::Matrix2d& a, double det) {
  const double p = a(0, 0);
  const double q = a(1, 1);
  const double b = 0.5 * (a(0, 1) + a(1, 0));
  const double tr = p + q;
  const double root = std::sqrt((p - q) * (p - q) + 4.0 * b * b);
  const double hi = 0.5 * (tr + root);
  double lo = hi > 0.0 ? det / hi : 0.5 * (tr - root);
  if (lo > hi) lo = hi;
  return {hi, lo};
}

std::array<double, 2> eig2_desc(const Eigen::Matrix2d& a) {
  const double b = 0.5 * (a(0, 1) + a(1, 0));
  return eig2_desc(a, a(0, 0) * a(1, 1) - b * b);
}

PsiPair make_psi_pair(const Eigen::Matrix2d& psi0,
                      const Eigen::Matrix2d& psi1) {
  PsiPair out;
  out.psi0 = psi0;
  out.psi1 = psi1;
  const auto l0 = eig2_desc(psi0);
  const auto l1 = eig2_desc(psi1);
  out.lambda = {l0[0], l0[1], l1[0], l1[1]};
  return out;
}

PsiPair compute_psi(const SufficientStatistic& stat) {
  const Eigen::Index n = stat.n();
  // Reversed ordering puts S22 in the leading block of the factor.
  const Eigen::MatrixXd s_rev = stat.S().reverse();
  const Eigen::LLT<Eigen::MatrixXd> llt(s_rev);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::kNumericalConditioning,
         "S is not numerically positive definite");
  }
  const double rcond = llt.rcond();
  if (!(rcond * kMaxConditionNumber > 1.0)) {
    std::ostringstream msg;
    msg << "condition number of S is about " << 1.0 / rcond << " > "
        << kMaxConditionNumber;
    fail(ErrorKind::kNumericalConditioning, msg.str());
  }

  Eigen::MatrixX2d b = stat.Zp().colwise().reverse();
  llt.matrixL().solveInPlace(b);
  const auto b1 = b.topRows(n - 1);

  PsiPair out;
  out.n = n;
  out.psi1 = b1.transpose() * b1;
  const Eigen::RowVector2d w = b.row(n - 1);
  out.psi0 = out.psi1 + w.transpose() * w;

  const auto l0 = eig2_desc(out.psi0, gram_det(b));
  const auto l1 = eig2_desc(out.psi1, gram_det(b1));
  out.lambda = {l0[0], l0[1], l1[0], l1[1]};
  return out;
}

MISVector mis(const PsiPair& psis) {
  const auto& l = psis.lambda;
  if (psis.n != 0 && psis.n < 3) {
    fail(ErrorKind::kDegenerateStatistic,
         "the MIS needs N >= 3 (Psi1 has rank <= 1 for N = " +
             std::to_string(psis.n) + ")");
  }
  if (!(l[3] > kDegenerateRatio * l[2])) {
    std::ostringstream msg;
    msg << "lambda4 is degenerate; lambda = (" << l[0] << ", " << l[1] << ", "
        << l[2] << ", " << l[3] << ")";
    fail(ErrorKind::kDegenerateStatistic, msg.str());
  }
  return {l[0] / l[3], l[1] / l[3], l[2] / l[3]};
}

std::array<double, 2> scale_estimate(double trace, double det, Eigen::Index k,
                                     Eigen::Index n) {
  const double c = static_cast<double>(k + 1 - n);
  const double d = static_cast<double>(2 * k + 2 - n);
  if (!(c > 0.0)) {
    fail(ErrorKind::kDomain, "scale estimates need K + 1 > N");
  }
  if (!(trace > 0.0)) {
    fail(ErrorKind::kDegenerateStatistic, "Tr[Psi] = 0");
  }
  det = std::max(det, 0.0);
  const double nn = static_cast<double>(n);
  const double beta = std::sqrt(trace * trace * c * c + 4.0 * nn * d * det);
  // (beta - c tr) / (2 d det) == 2N / (beta + c tr); the limit for det -> 0
  // is N / (c tr).
  const double gamma = det < kDegenerateRatio * trace * trace
                           ? nn / (c * trace)
                           : 2.0 * nn / (beta + c * trace);
  return {gamma, beta};
}

ScaleEstimates scale_estimates(const PsiPair& psis, Eigen::Index k,
                               Eigen::Index n) {
  const auto e0 = scale_estimate(psis.trace0(), psis.det0(), k, n);
  const auto e1 = scale_estimate(psis.trace1(), psis.det1(), k, n);
  return {e0[0], e1[0], e0[1], e1[1]};
}

}  // namespace persym
