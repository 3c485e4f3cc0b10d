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

#include "persym/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "persym/error.hpp"
#include "persym/scenario.hpp"

namespace persym {

namespace {

constexpr int kMaxSampleAttempts = 100;
constexpr double kOrthogonalityTol = 1e-12;

double condition_number(const Eigen::MatrixXd& m) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  return smallest > 0.0 ? sv(0) / smallest
                        : std::numeric_limits<double>::infinity();
}

void require_same_n(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    fail(ErrorKind::kInvalidDimension, "group element has N = " +
                                           std::to_string(a) +
                                           ", statistic has N = " +
                                           std::to_string(b));
  }
}

}  // namespace

GroupElement identity_element(Eigen::Index n) {
  return {Eigen::MatrixXd::Identity(n, n), Eigen::Matrix2d::Identity(), 1.0};
}

GroupElement inverse(const GroupElement& a) {
  return {a.G.inverse(), a.U.transpose(), 1.0 / a.phi};
}

void validate(const GroupElement& a) {
  const Eigen::Index n = a.n();
  if (n < 2 || a.G.cols() != n) {
    fail(ErrorKind::kInvalidDimension, "G must be N x N with N >= 2");
  }
  if (!a.G.col(0).tail(n - 1).isZero(0.0)) {
    fail(ErrorKind::kModelViolation, "G is not block upper-triangular");
  }
  if (a.G(0, 0) == 0.0) fail(ErrorKind::kModelViolation, "g11 = 0");
  if (a.G.bottomRightCorner(n - 1, n - 1).determinant() == 0.0) {
    fail(ErrorKind::kModelViolation, "G22 is singular");
  }
  if (!(a.U * a.U.transpose())
           .isApprox(Eigen::Matrix2d::Identity(), kOrthogonalityTol)) {
    fail(ErrorKind::kModelViolation, "U is not orthogonal");
  }
  if (!(a.phi > 0.0)) fail(ErrorKind::kModelViolation, "phi must be > 0");
}

GroupElement sample_group_element(Eigen::Index n, Rng& rng, double spread) {
  if (n < 2) fail(ErrorKind::kInvalidDimension, "group needs N >= 2");
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    fail(ErrorKind::kDomain, "spread must be positive");
  }
  GroupElement out;
  out.G = Eigen::MatrixXd::Zero(n, n);
  bool accepted = false;
  for (int attempt = 0; attempt < kMaxSampleAttempts && !accepted; ++attempt) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i <= (j == 0 ? 0 : n - 1); ++i) {
        out.G(i, j) = spread * standard_normal(rng);
      }
    }
    accepted = out.G(0, 0) != 0.0 &&
               condition_number(out.G) <= kMaxSampledCondition &&
               condition_number(out.G.bottomRightCorner(n - 1, n - 1)) <=
                   kMaxSampledCondition;
  }
  if (!accepted) {
    fail(ErrorKind::kDomain, "no well-conditioned group element after " +
                                 std::to_string(kMaxSampleAttempts) +
                                 " attempts");
  }

  const double theta = 2.0 * std::numbers::pi * uniform01(rng);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  out.U << c, -s, s, c;
  if (uniform01(rng) < 0.5) out.U.col(1) *= -1.0;

  const double lo = std::log(1e-2 * spread);
  const double hi = std::log(1e2 * spread);
  out.phi = std::exp(lo + (hi - lo) * uniform01(rng));
  return out;
}

GroupElement compose(const GroupElement& a, const GroupElement& b) {
  if (a.n() != b.n()) {
    fail(ErrorKind::kInvalidDimension, "cannot compose elements of different N");
  }
  return {b.G * a.G, a.U * b.U, a.phi * b.phi};
}

SufficientStatistic act_l1(const Eigen::MatrixXd& g, const Eigen::Matrix2d& u,
                           const SufficientStatistic& stat) {
  require_same_n(g.rows(), stat.n());
  Eigen::MatrixXd zp = g * stat.Zp() * u;
  Eigen::MatrixXd s = g * stat.S() * g.transpose();
  s = 0.5 * (s + s.transpose()).eval();
  return SufficientStatistic(std::move(zp), std::move(s), stat.k());
}

SufficientStatistic act_l2(double phi, const SufficientStatistic& stat) {
  if (!(phi > 0.0)) fail(ErrorKind::kDomain, "phi must be > 0");
  return SufficientStatistic(stat.Zp(), phi * stat.S(), stat.k());
}

SufficientStatistic act(const GroupElement& elem,
                        const SufficientStatistic& stat) {
  require_same_n(elem.n(), stat.n());
  if (!(elem.phi > 0.0)) fail(ErrorKind::kDomain, "phi must be > 0");
  Eigen::MatrixXd zp = elem.G * stat.Zp() * elem.U;
  Eigen::MatrixXd s = elem.G * stat.S() * elem.G.transpose();
  s = 0.5 * elem.phi * (s + s.transpose()).eval();
  return SufficientStatistic(std::move(zp), std::move(s), stat.k());
}

double relative_deviation(const std::vector<double>& a,
                          const std::vector<double>& b, double eps) {
  if (a.size() != b.size()) {
    fail(ErrorKind::kInvalidDimension, "statistic changed its arity");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst,
                     std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), eps));
  }
  return worst;
}

double invariance_report(const SufficientStatistic& stat, const StatisticFn& f,
                         std::size_t n_elements, Rng& rng, double spread) {
  const std::vector<double> reference = f(stat);
  double worst = 0.0;
  for (std::size_t e = 0; e < n_elements; ++e) {
    const GroupElement g = sample_group_element(stat.n(), rng, spread);
    worst = std::max(worst, relative_deviation(f(act(g, stat)), reference));
  }
  return worst;
}

double discrimination_check(Rng& rng, std::size_t n_pairs, Eigen::Index n,
                            Eigen::Index k) {
  if (n_pairs == 0) fail(ErrorKind::kDomain, "n_pairs must be >= 1");
  std::size_t distinct = 0;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const auto a = mis(compute_psi(sample_white_statistic(n, k, rng)));
    const auto b = mis(compute_psi(sample_white_statistic(n, k, rng)));
    const bool differs = std::abs(a.t1 - b.t1) > 1e-6 ||
                         std::abs(a.t2 - b.t2) > 1e-6 ||
                         std::abs(a.t3 - b.t3) > 1e-6;
    if (differs) ++distinct;
  }
  return static_cast<double>(distinct) / static_cast<double>(n_pairs);
}

}  // namespace persym
