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

#ifndef PERSYM_MONTECARLO_HPP_
#define PERSYM_MONTECARLO_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "persym/detectors.hpp"
#include "persym/scenario.hpp"

namespace persym {

// A scalar decision statistic evaluated once per trial. The quadratic forms
// are computed once and shared by every statistic of a run.
struct NamedStatistic {
  std::string name;
  std::function<double(const SufficientStatistic&, const PsiPair&)> fn;
};

// Direct-form detector statistic.
NamedStatistic detector_statistic(Detector kind);
// Tr[Psi0]: not invariant to the power scaling, used as a negative control.
NamedStatistic trace_psi0_statistic();

struct TrialPlan {
  ScenarioConfig scenario;
  Detector detector = Detector::kGlr;
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;  // hint only; never changes results
};

struct EstimateWithCI {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

struct CalibrationResult {
  double threshold = 0.0;
  double target_pfa = 0.0;
  double achieved_pfa = 0.0;
  // 95% Clopper-Pearson interval of the false-alarm rate at `threshold`.
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t trials = 0;
};

// samples[s][i] is statistic s on trial i. Trial i draws from
// make_stream(master_seed, i). Errors are rethrown with the lowest failing
// trial index attached.
std::vector<std::vector<double>> run_trials(
    const ScenarioModel& model, std::span<const NamedStatistic> statistics,
    std::size_t trials, std::uint64_t master_seed, unsigned workers = 1);

// Threshold = the ceil((1 - pfa) n)-th order statistic of the H0 samples.
CalibrationResult calibrate_threshold(std::vector<double> h0_samples,
                                      double target_pfa);
CalibrationResult calibrate_threshold(const TrialPlan& plan,
                                      double target_pfa);

// Fraction of samples >= eta with a 95% Wilson interval.
EstimateWithCI estimate_rate(std::span<const double> samples, double eta);
EstimateWithCI estimate_rate(const TrialPlan& plan, double eta);

EstimateWithCI wilson_interval(std::size_t successes, std::size_t n,
                               double z = 1.959963984540054);
std::array<double, 2> clopper_pearson(std::size_t successes, std::size_t n,
                                      double confidence = 0.95);

// |p_hat - p| <= n_sigma sqrt(p (1 - p) / n).
bool within_binomial_band(double p_hat, double target, std::size_t n,
                          double n_sigma = 3.0);

struct CfarCell {
  std::string statistic;
  double gamma = 0.0;
  double rho = 0.0;
  EstimateWithCI pfa;
  bool pass = false;
  bool reference = false;
};

struct CfarSweepResult {
  std::vector<CalibrationResult> calibrations;  // one per statistic
  std::vector<CfarCell> cells;                  // statistic-major order

  bool all_pass() const;
};

// Calibrates every statistic once on the reference cell (gamma = 1,
// rho = rho_grid[0]) and estimates the false-alarm rate on every
// (gamma, rho) cell with its own seed. The reference cell, when it is part
// of the grid, reports the calibration samples. The calibration run uses
// `calibration_trials` draws (0: same as `trials`).
CfarSweepResult cfar_sweep(std::span<const NamedStatistic> statistics,
                           const ScenarioConfig& base,
                           std::span<const double> gamma_grid,
                           std::span<const double> rho_grid, double target_pfa,
                           std::size_t trials, std::uint64_t seed,
                           unsigned workers = 1,
                           std::size_t calibration_trials = 0);

enum class MisComponent { kT1, kT2, kT3 };

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
  bool pass = false;
};

// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic critical value sqrt(-ln(alpha / 2) / 2) sqrt((n + m) / (n m)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha);

// KS test of one MIS component between samples drawn under `h0` and `h1`.
// Passes when the distance is below the 1% critical value.
KsResult ancillarity_check(const ScenarioConfig& h0, const ScenarioConfig& h1,
                           std::size_t n_samples, std::uint64_t seed,
                           MisComponent component = MisComponent::kT3,
                           unsigned workers = 1);

struct RocPoint {
  double pfa = 0.0;
  double threshold = 0.0;
  EstimateWithCI pd;
};

// For each target pfa (sorted ascending): calibrate on H0 draws of
// `scenario`, then estimate Pd on H1 draws at `sinr_db`.
std::vector<RocPoint> roc_curve(Detector detector,
                                const ScenarioConfig& scenario, double sinr_db,
                                std::vector<double> pfa_grid,
                                std::size_t trials, std::uint64_t seed,
                                unsigned workers = 1);

}  // namespace persym

#endif  // PERSYM_MONTECARLO_HPP_
