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

#include "persym/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>

#include <boost/math/distributions/beta.hpp>

#include "persym/error.hpp"
#include "persym/log.hpp"

namespace persym {

namespace {

struct TrialFailure {
  std::size_t trial = 0;
  std::exception_ptr error;
};

void require_pfa(double pfa) {
  if (!(pfa > 0.0 && pfa <= 1.0)) {
    fail(ErrorKind::kDomain, "target pfa must lie in (0, 1]");
  }
}

std::size_t count_at_least(std::span<const double> samples, double eta) {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(),
                    [eta](double v) { return v >= eta; }));
}

double mis_component(const PsiPair& psi, MisComponent c) {
  const MISVector t = mis(psi);
  switch (c) {
    case MisComponent::kT1:
      return t.t1;
    case MisComponent::kT2:
      return t.t2;
    case MisComponent::kT3:
      return t.t3;
  }
  return t.t3;
}

}  // namespace

NamedStatistic detector_statistic(Detector kind) {
  return {std::string(to_string(kind)),
          [kind](const SufficientStatistic& stat, const PsiPair& psi) {
            return evaluate(kind, psi, stat.k(), stat.n());
          }};
}

NamedStatistic trace_psi0_statistic() {
  return {"trace-psi0", [](const SufficientStatistic&, const PsiPair& psi) {
            return psi.trace0();
          }};
}

std::vector<std::vector<double>> run_trials(
    const ScenarioModel& model, std::span<const NamedStatistic> statistics,
    std::size_t trials, std::uint64_t master_seed, unsigned workers) {
  std::vector<std::vector<double>> samples(statistics.size(),
                                           std::vector<double>(trials));
  if (trials == 0) return samples;

  const std::size_t n_workers =
      std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(trials, 1));
  std::vector<std::optional<TrialFailure>> failures(n_workers);

  auto run_range = [&](std::size_t worker, std::size_t begin,
                       std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        Rng rng = make_stream(master_seed, i);
        const SufficientStatistic stat = model.sample_statistic(rng);
        const PsiPair psi = compute_psi(stat);
        for (std::size_t s = 0; s < statistics.size(); ++s) {
          samples[s][i] = statistics[s].fn(stat, psi);
        }
      } catch (...) {
        failures[worker] = TrialFailure{i, std::current_exception()};
        return;
      }
    }
  };

  const std::size_t chunk = (trials + n_workers - 1) / n_workers;
  if (n_workers == 1) {
    run_range(0, 0, trials);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      const std::size_t begin = std::min(trials, w * chunk);
      const std::size_t end = std::min(trials, begin + chunk);
      pool.emplace_back(run_range, w, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  // Chunks are ordered, so the first recorded failure has the lowest index.
  for (const auto& f : failures) {
    if (!f) continue;
    try {
      std::rethrow_exception(f->error);
    } catch (const Error& e) {
      throw Error(e.kind(),
                  "trial " + std::to_string(f->trial) + ": " + e.detail());
    }
  }
  return samples;
}

CalibrationResult calibrate_threshold(std::vector<double> h0_samples,
                                      double target_pfa) {
  require_pfa(target_pfa);
  const std::size_t n = h0_samples.size();
  if (n == 0) fail(ErrorKind::kDomain, "no samples to calibrate on");
  if (static_cast<double>(n) < 100.0 / target_pfa) {
    logger().warn("{} trials for pfa {}: fewer than 100 / pfa", n, target_pfa);
  }
  std::sort(h0_samples.begin(), h0_samples.end());
  const double rank = std::ceil((1.0 - target_pfa) * static_cast<double>(n) -
                                1e-9);
  const std::size_t idx = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(rank, 1.0)), 1, n);

  CalibrationResult out;
  out.threshold = h0_samples[idx - 1];
  out.target_pfa = target_pfa;
  out.trials = n;
  const std::size_t hits = count_at_least(h0_samples, out.threshold);
  out.achieved_pfa = static_cast<double>(hits) / static_cast<double>(n);
  const auto ci = clopper_pearson(hits, n);
  out.ci_lo = ci[0];
  out.ci_hi = ci[1];
  return out;
}

CalibrationResult calibrate_threshold(const TrialPlan& plan,
                                      double target_pfa) {
  const ScenarioModel model(plan.scenario.null_hypothesis());
  const NamedStatistic stat = detector_statistic(plan.detector);
  auto samples = run_trials(model, std::span(&stat, 1), plan.trials,
                            plan.master_seed, plan.workers);
  return calibrate_threshold(std::move(samples[0]), target_pfa);
}

EstimateWithCI wilson_interval(std::size_t successes, std::size_t n,
                               double z) {
  if (n == 0 || successes > n) {
    fail(ErrorKind::kDomain, "invalid binomial counts");
  }
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  EstimateWithCI out;
  out.point = p;
  out.n = n;
  out.lo = std::clamp(center - half, 0.0, p);
  out.hi = std::clamp(center + half, p, 1.0);
  return out;
}

std::array<double, 2> clopper_pearson(std::size_t successes, std::size_t n,
                                      double confidence) {
  if (n == 0 || successes > n) {
    fail(ErrorKind::kDomain, "invalid binomial counts");
  }
  const double tail = 0.5 * (1.0 - confidence);
  const double x = static_cast<double>(successes);
  const double nn = static_cast<double>(n);
  const double lo =
      successes == 0
          ? 0.0
          : boost::math::quantile(boost::math::beta_distribution<>(x, nn - x + 1.0),
                                  tail);
  const double hi =
      successes == n
          ? 1.0
          : boost::math::quantile(boost::math::beta_distribution<>(x + 1.0, nn - x),
                                  1.0 - tail);
  return {lo, hi};
}

EstimateWithCI estimate_rate(std::span<const double> samples, double eta) {
  if (std::isnan(eta)) fail(ErrorKind::kDomain, "threshold is NaN");
  return wilson_interval(count_at_least(samples, eta), samples.size());
}

EstimateWithCI estimate_rate(const TrialPlan& plan, double eta) {
  const ScenarioModel model(plan.scenario);
  const NamedStatistic stat = detector_statistic(plan.detector);
  const auto samples = run_trials(model, std::span(&stat, 1), plan.trials,
                                  plan.master_seed, plan.workers);
  return estimate_rate(samples[0], eta);
}

bool within_binomial_band(double p_hat, double target, std::size_t n,
                          double n_sigma) {
  const double sigma =
      std::sqrt(target * (1.0 - target) / static_cast<double>(n));
  return std::abs(p_hat - target) <= n_sigma * sigma;
}

bool CfarSweepResult::all_pass() const {
  return std::all_of(cells.begin(), cells.end(),
                     [](const CfarCell& c) { return c.pass; });
}

CfarSweepResult cfar_sweep(std::span<const NamedStatistic> statistics,
                           const ScenarioConfig& base,
                           std::span<const double> gamma_grid,
                           std::span<const double> rho_grid, double target_pfa,
                           std::size_t trials, std::uint64_t seed,
                           unsigned workers, std::size_t calibration_trials) {
  if (gamma_grid.empty() || rho_grid.empty()) {
    fail(ErrorKind::kDomain, "CFAR grids must be nonempty");
  }
  if (statistics.empty()) fail(ErrorKind::kDomain, "no statistics to sweep");
  if (trials == 0) fail(ErrorKind::kDomain, "trials must be >= 1");
  require_pfa(target_pfa);

  ScenarioConfig reference = base.null_hypothesis();
  reference.gamma = 1.0;
  reference.rho = rho_grid[0];
  if (calibration_trials == 0) calibration_trials = trials;
  const auto calibration_samples =
      run_trials(ScenarioModel(reference), statistics, calibration_trials,
                 derive_seed(seed, 0), workers);

  CfarSweepResult out;
  for (const auto& samples : calibration_samples) {
    out.calibrations.push_back(calibrate_threshold(samples, target_pfa));
  }

  std::vector<std::vector<CfarCell>> per_stat(statistics.size());
  for (std::size_t gi = 0; gi < gamma_grid.size(); ++gi) {
    for (std::size_t ri = 0; ri < rho_grid.size(); ++ri) {
      const std::size_t cell_index = gi * rho_grid.size() + ri;
      const bool is_reference = gamma_grid[gi] == 1.0 && ri == 0;
      std::vector<std::vector<double>> fresh;
      if (!is_reference) {
        ScenarioConfig cfg = reference;
        cfg.gamma = gamma_grid[gi];
        cfg.rho = rho_grid[ri];
        fresh = run_trials(ScenarioModel(cfg), statistics, trials,
                           derive_seed(seed, cell_index + 1), workers);
      }
      const auto& samples = is_reference ? calibration_samples : fresh;
      for (std::size_t s = 0; s < statistics.size(); ++s) {
        CfarCell cell;
        cell.statistic = statistics[s].name;
        cell.gamma = gamma_grid[gi];
        cell.rho = rho_grid[ri];
        cell.reference = is_reference;
        cell.pfa = estimate_rate(samples[s], out.calibrations[s].threshold);
        cell.pass =
            within_binomial_band(cell.pfa.point, target_pfa, cell.pfa.n);
        per_stat[s].push_back(cell);
      }
    }
  }
  for (auto& cells : per_stat) {
    out.cells.insert(out.cells.end(), cells.begin(), cells.end());
  }
  return out;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::kDomain, "empty KS sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0) || n == 0 || m == 0) {
    fail(ErrorKind::kDomain, "invalid KS critical value arguments");
  }
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) *
         std::sqrt((nn + mm) / (nn * mm));
}

KsResult ancillarity_check(const ScenarioConfig& h0, const ScenarioConfig& h1,
                           std::size_t n_samples, std::uint64_t seed,
                           MisComponent component, unsigned workers) {
  h0.validate(true);
  h1.validate(true);
  if (n_samples == 0) fail(ErrorKind::kDomain, "n_samples must be >= 1");
  const NamedStatistic stat{
      "mis", [component](const SufficientStatistic&, const PsiPair& psi) {
        return mis_component(psi, component);
      }};
  auto a = run_trials(ScenarioModel(h0), std::span(&stat, 1), n_samples,
                      derive_seed(seed, 0), workers);
  auto b = run_trials(ScenarioModel(h1), std::span(&stat, 1), n_samples,
                      derive_seed(seed, 1), workers);
  KsResult out;
  out.statistic = ks_two_sample(std::move(a[0]), std::move(b[0]));
  out.critical = ks_critical_value(n_samples, n_samples, 0.01);
  out.pass = out.statistic < out.critical;
  return out;
}

std::vector<RocPoint> roc_curve(Detector detector,
                                const ScenarioConfig& scenario, double sinr_db,
                                std::vector<double> pfa_grid,
                                std::size_t trials, std::uint64_t seed,
                                unsigned workers) {
  if (pfa_grid.empty()) fail(ErrorKind::kDomain, "empty pfa grid");
  for (double p : pfa_grid) require_pfa(p);
  if (trials == 0) fail(ErrorKind::kDomain, "trials must be >= 1");
  std::sort(pfa_grid.begin(), pfa_grid.end());

  const NamedStatistic stat = detector_statistic(detector);
  const auto h0 =
      run_trials(ScenarioModel(scenario.null_hypothesis()), std::span(&stat, 1),
                 trials, derive_seed(seed, 0), workers);
  const auto h1 = run_trials(
      ScenarioModel(scenario.with_sinr(sinr_db, scenario.alpha_phase)),
      std::span(&stat, 1), trials, derive_seed(seed, 1), workers);

  std::vector<RocPoint> out;
  for (double pfa : pfa_grid) {
    RocPoint point;
    point.pfa = pfa;
    point.threshold = calibrate_threshold(h0[0], pfa).threshold;
    point.pd = estimate_rate(h1[0], point.threshold);
    if (!out.empty() && point.pd.point < out.back().pd.point) {
      fail(ErrorKind::kDomain, "ROC is not monotone in pfa");
    }
    out.push_back(point);
  }
  return out;
}

}  // namespace persym
