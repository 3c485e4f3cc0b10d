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

#ifndef PERSYM_SCENARIO_HPP_
#define PERSYM_SCENARIO_HPP_

#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "persym/persym_core.hpp"
#include "persym/random.hpp"
#include "persym/sufficient_stats.hpp"

namespace persym {

enum class Hypothesis { kH0, kH1 };

std::string_view to_string(Hypothesis h);

// Simulation parameters. Under H1 exactly one of `alpha` / `sinr_db` is set;
// under H0 neither is. A `sinr_db` of -infinity means alpha = 0.
struct ScenarioConfig {
  Eigen::Index n = 8;
  Eigen::Index k = 16;
  double rho = 0.9;
  double doppler_fc = 0.0;
  double cnr_db = 20.0;
  double gamma = 1.0;
  std::optional<cdouble> alpha;
  std::optional<double> sinr_db;
  // Target phase (radians) used when the amplitude comes from sinr_db.
  double alpha_phase = 0.0;
  double nu = 0.0;
  Hypothesis hypothesis = Hypothesis::kH0;
  std::uint64_t seed = 0;

  // Throws kDomain / kInvalidDimension on violated invariants. With
  // `require_mis` the MIS must be computable (N >= 3).
  void validate(bool require_mis = false) const;

  // Same scenario with the signal removed and the hypothesis set to H0.
  ScenarioConfig null_hypothesis() const;
  // Same scenario under H1 at the given SINR (dB).
  ScenarioConfig with_sinr(double sinr_db, double phase = 0.0) const;
};

struct Dataset {
  Eigen::VectorXcd r;
  Eigen::MatrixXcd rk;  // N x K, one secondary vector per column
  Hypothesis truth = Hypothesis::kH0;
  ScenarioConfig scenario;
};

// s_n = exp(i 2 pi nu (n - (N - 1) / 2)) / sqrt(N).
SteeringVector steering(Eigen::Index n, double nu);

// sigma_c^2 Toeplitz(rho^|i-j| exp(i 2 pi fc (i - j))) + I, sigma_c^2 =
// 10^(cnr_db / 10).
PersymmetricCovariance covariance_model(Eigen::Index n, double rho,
                                        double doppler_fc, double cnr_db);

// 2 |alpha|^2 s^H M0^-1 s, the SINR of the canonical problem.
double sinr(cdouble alpha, const SteeringVector& s,
            const PersymmetricCovariance& m0);

// Amplitude with the given SINR (dB) and phase; -infinity dB gives 0.
cdouble alpha_for_sinr(double sinr_db, double phase, const SteeringVector& s,
                       const PersymmetricCovariance& m0);

// A validated scenario with its steering vector, covariance, lower Cholesky
// factor and canonical transform precomputed, ready for repeated sampling.
class ScenarioModel {
 public:
  explicit ScenarioModel(const ScenarioConfig& cfg);

  const ScenarioConfig& config() const { return cfg_; }
  const SteeringVector& steering_vector() const { return s_; }
  const PersymmetricCovariance& covariance() const { return m0_; }
  const CanonicalTransform& transform() const { return xf_; }
  // Signal amplitude actually injected (0 under H0).
  cdouble alpha() const { return alpha_; }
  double sinr() const;

  // Draw order: primary (re, im per entry), then secondaries column-major.
  Dataset sample(Rng& rng) const;
  SufficientStatistic sample_statistic(Rng& rng) const;

 private:
  ScenarioConfig cfg_;
  SteeringVector s_;
  PersymmetricCovariance m0_;
  Eigen::MatrixXcd lower_;
  CanonicalTransform xf_;
  cdouble alpha_;
};

Dataset sample_dataset(const ScenarioConfig& cfg, Rng& rng);

// (Zp, S) with white real Gaussian entries: Zp is N x 2, S = Zs Zs^T with
// Zs N x 2K. Cheap source of generic statistics for property tests.
SufficientStatistic sample_white_statistic(Eigen::Index n, Eigen::Index k,
                                           Rng& rng);

}  // namespace persym

#endif  // PERSYM_SCENARIO_HPP_
