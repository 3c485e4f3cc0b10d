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

#ifndef PERSYM_INVARIANCE_HPP_
#define PERSYM_INVARIANCE_HPP_

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "persym/random.hpp"
#include "persym/sufficient_stats.hpp"

namespace persym {

// Element (G, U, phi) of the invariance group: G is block upper-triangular
// [[g11, g12], [0, G22]] with g11 != 0 and G22 invertible, U is 2 x 2
// orthogonal, phi > 0.
struct GroupElement {
  Eigen::MatrixXd G;
  Eigen::Matrix2d U;
  double phi = 1.0;

  Eigen::Index n() const { return G.rows(); }
};

// Upper bound on cond(G) and cond(G22) accepted by sample_group_element().
inline constexpr double kMaxSampledCondition = 1e3;

GroupElement identity_element(Eigen::Index n);
GroupElement inverse(const GroupElement& a);

// Throws kModelViolation when the structural constraints do not hold.
void validate(const GroupElement& a);

// g11, g12 and G22 entries are N(0, spread^2); U is a uniform rotation,
// reflected with probability 1/2; phi is log-uniform on
// [1e-2 spread, 1e2 spread]. Resamples until the conditioning bound holds,
// giving up after 100 attempts.
GroupElement sample_group_element(Eigen::Index n, Rng& rng,
                                  double spread = 1.0);

// (Ga, Ua, pa) o (Gb, Ub, pb) = (Gb Ga, Ua Ub, pa pb), so that
// act(compose(a, b), x) == act(b, act(a, x)).
GroupElement compose(const GroupElement& a, const GroupElement& b);

// (Zp, S) -> (G Zp U, phi G S G^T).
SufficientStatistic act(const GroupElement& elem,
                        const SufficientStatistic& stat);

// The two sub-actions whose sequence is act():
// (Zp, S) -> (G Zp U, G S G^T) and (Zp, S) -> (Zp, phi S).
SufficientStatistic act_l1(const Eigen::MatrixXd& g, const Eigen::Matrix2d& u,
                           const SufficientStatistic& stat);
SufficientStatistic act_l2(double phi, const SufficientStatistic& stat);

using StatisticFn =
    std::function<std::vector<double>(const SufficientStatistic&)>;

// max_i |a_i - b_i| / max(|b_i|, eps).
double relative_deviation(const std::vector<double>& a,
                          const std::vector<double>& b, double eps = 1e-12);

// Largest relative deviation of f over `n_elements` sampled group actions.
double invariance_report(const SufficientStatistic& stat, const StatisticFn& f,
                         std::size_t n_elements, Rng& rng,
                         double spread = 1.0);

// Fraction of independently drawn white statistics (n x 2, k secondaries)
// whose MIS vectors differ by more than 1e-6 in some component.
double discrimination_check(Rng& rng, std::size_t n_pairs, Eigen::Index n = 8,
                            Eigen::Index k = 16);

}  // namespace persym

#endif  // PERSYM_INVARIANCE_HPP_
