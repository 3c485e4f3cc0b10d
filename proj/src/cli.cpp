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

#include "persym/cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "persym/error.hpp"
#include "persym/invariance.hpp"
#include "persym/log.hpp"
#include "persym/montecarlo.hpp"

#ifndef PERSYM_VERSION
#define PERSYM_VERSION "0.0.0"
#endif

namespace persym::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<const char*, 17> kConfigKeys = {
    "n",      "k",        "rho",        "doppler_fc", "cnr_db",   "gamma",
    "nu",     "alpha_re", "alpha_im",   "sinr_db",    "trials",   "pfa",
    "detector", "gamma_grid", "rho_grid", "pfa_grid", "sinr_grid"};

// Calibration runs this many times longer than each CFAR cell.
constexpr std::size_t kCfarCalibrationFactor = 10;

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) config_fail("'" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_fail("'" + key + "' must be finite");
  return x;
}

// A number, or one of the strings "-inf" / "inf".
double as_db(const json& v, const std::string& key) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    config_fail("'" + key + "' must be a number or \"-inf\"");
  }
  return as_number(v, key);
}

long long as_integer(const json& v, const std::string& key, long long min) {
  if (!v.is_number_integer()) config_fail("'" + key + "' must be an integer");
  const long long x = v.get<long long>();
  if (x < min) config_fail("'" + key + "' must be >= " + std::to_string(min));
  return x;
}

std::vector<double> as_grid(const json& v, const std::string& key,
                            double (*elem)(const json&, const std::string&)) {
  if (!v.is_array()) config_fail("'" + key + "' must be an array");
  if (v.empty()) config_fail("'" + key + "' must not be empty");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(elem(e, key));
  return out;
}

std::vector<Detector> as_detectors(const json& v) {
  std::vector<std::string> names;
  if (v.is_string()) {
    names.push_back(v.get<std::string>());
  } else if (v.is_array() && !v.empty()) {
    for (const auto& e : v) {
      if (!e.is_string()) config_fail("'detector' entries must be strings");
      names.push_back(e.get<std::string>());
    }
  } else {
    config_fail("'detector' must be a name or a nonempty array of names");
  }
  std::vector<Detector> out;
  for (const auto& name : names) {
    if (name == "all") {
      out.assign(kAllDetectors.begin(), kAllDetectors.end());
      continue;
    }
    const auto d = parse_detector(name);
    if (!d) {
      config_fail("unknown detector '" + name +
                  "' (expected glr, 2s-glr, rao, wald or all)");
    }
    if (std::find(out.begin(), out.end(), *d) == out.end()) out.push_back(*d);
  }
  return out;
}

std::size_t default_trials(Command c) {
  switch (c) {
    case Command::kInvarianceCheck:
      return 100;
    case Command::kMisSample:
      return 1000;
    case Command::kCfar:
    case Command::kRoc:
      return 100000;
  }
  return 1000;
}

void check_scenario(const ScenarioConfig& cfg, bool require_mis) {
  try {
    cfg.validate(require_mis);
    (void)ScenarioModel(cfg);
  } catch (const Error& e) {
    config_fail(e.what());
  }
}

json db_json(double v) {
  if (std::isinf(v)) return v < 0 ? json("-inf") : json("inf");
  return json(v);
}

json grid_json(const std::vector<double>& g, bool db = false) {
  json out = json::array();
  for (double v : g) out.push_back(db ? db_json(v) : json(v));
  return out;
}

// Runs body(i) for i in [0, n) on up to `workers` threads over contiguous
// chunks. body receives its chunk index so callers can keep per-chunk
// accumulators. Rethrows the failure with the lowest index.
void parallel_chunks(std::size_t n, unsigned workers,
                     const std::function<void(std::size_t, std::size_t)>& body,
                     std::size_t& n_chunks) {
  n_chunks = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  const std::size_t chunk = (n + n_chunks - 1) / n_chunks;
  std::vector<std::pair<std::size_t, std::exception_ptr>> errors(
      n_chunks, {std::numeric_limits<std::size_t>::max(), nullptr});
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = std::min(n, c * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    for (std::size_t i = begin; i < end; ++i) {
      try {
        body(c, i);
      } catch (...) {
        errors[c] = {i, std::current_exception()};
        return;
      }
    }
  };
  if (n_chunks == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t c = 0; c < n_chunks; ++c) pool.emplace_back(run_chunk, c);
    for (auto& t : pool) t.join();
  }
  for (const auto& [index, error] : errors) {
    if (!error) continue;
    try {
      std::rethrow_exception(error);
    } catch (const Error& e) {
      throw Error(e.kind(), "statistic " + std::to_string(index) + ": " +
                                e.detail());
    }
  }
}

double rel(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-12);
}

double max_rel_entries(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << body;
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

void write_atomically(const std::filesystem::path& path,
                      const std::string& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, body);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
  }
}

struct CommandOutput {
  std::string csv;
  json summary;
  bool pass = true;
};

CommandOutput cmd_invariance(const RunConfig& cfg, std::uint64_t seed,
                             unsigned workers, bool inject,
                             std::ostream& out) {
  InvarianceOptions opts;
  opts.statistics = cfg.trials;
  opts.inject_non_invariant = inject;
  const auto results = run_invariance_suites(cfg, opts, seed, workers);
  CommandOutput o;
  o.csv = "suite,max_deviation,tolerance,pass\n";
  json suites = json::array();
  for (const auto& r : results) {
    o.csv += fmt::format("{},{},{},{}\n", r.suite, fmt_double(r.max_deviation),
                         fmt_double(r.tolerance), fmt_bool(r.pass));
    out << fmt::format("{:<26} max deviation {:<12.3e} tolerance {:<8.0e} {}\n",
                       r.suite, r.max_deviation, r.tolerance,
                       r.pass ? "pass" : "FAIL");
    o.pass = o.pass && r.pass;
    suites.push_back({{"suite", r.suite},
                      {"max_deviation", r.max_deviation},
                      {"tolerance", r.tolerance},
                      {"pass", r.pass}});
  }
  o.summary = {{"all_pass", o.pass},
               {"statistics", opts.statistics},
               {"elements_per_statistic", opts.elements_per_statistic},
               {"suites", suites}};
  return o;
}

CommandOutput cmd_cfar(const RunConfig& cfg, std::uint64_t seed,
                       unsigned workers, std::ostream& out) {
  std::vector<NamedStatistic> stats;
  for (Detector d : cfg.detectors) stats.push_back(detector_statistic(d));
  const auto res = cfar_sweep(stats, cfg.scenario, cfg.gamma_grid,
                              cfg.rho_grid, cfg.pfa, cfg.trials, seed, workers,
                              kCfarCalibrationFactor * cfg.trials);
  CommandOutput o;
  o.csv = "detector,gamma,rho,pfa_hat,ci_lo,ci_hi,pass\n";
  std::size_t passed = 0;
  for (const auto& c : res.cells) {
    o.csv += fmt::format("{},{},{},{},{},{},{}\n", c.statistic,
                         fmt_double(c.gamma), fmt_double(c.rho),
                         fmt_double(c.pfa.point), fmt_double(c.pfa.lo),
                         fmt_double(c.pfa.hi), fmt_bool(c.pass));
    if (c.pass) ++passed;
  }
  o.pass = res.all_pass();
  json cal = json::array();
  for (std::size_t i = 0; i < res.calibrations.size(); ++i) {
    const auto& c = res.calibrations[i];
    cal.push_back({{"detector", stats[i].name},
                   {"threshold", c.threshold},
                   {"achieved_pfa", c.achieved_pfa},
                   {"ci_lo", c.ci_lo},
                   {"ci_hi", c.ci_hi},
                   {"trials", c.trials}});
  }
  o.summary = {{"all_pass", o.pass},
               {"cells", res.cells.size()},
               {"cells_passed", passed},
               {"target_pfa", cfg.pfa},
               {"band_sigma", 3.0},
               {"calibrations", cal}};
  out << fmt::format("cfar: {} of {} cells inside the 3-sigma band\n", passed,
                     res.cells.size());
  return o;
}

CommandOutput cmd_roc(const RunConfig& cfg, std::uint64_t seed,
                      unsigned workers, std::ostream& out) {
  CommandOutput o;
  o.csv = "detector,sinr_db,pfa,pd,ci_lo,ci_hi\n";
  json curves = json::array();
  for (Detector d : cfg.detectors) {
    for (std::size_t j = 0; j < cfg.sinr_grid.size(); ++j) {
      const double db = cfg.sinr_grid[j];
      const auto roc = roc_curve(d, cfg.scenario, db, cfg.pfa_grid, cfg.trials,
                                 derive_seed(seed, j), workers);
      json points = json::array();
      for (const auto& p : roc) {
        o.csv += fmt::format("{},{},{},{},{},{}\n", to_string(d),
                             fmt_double(db), fmt_double(p.pfa),
                             fmt_double(p.pd.point), fmt_double(p.pd.lo),
                             fmt_double(p.pd.hi));
        points.push_back({{"pfa", p.pfa},
                          {"threshold", p.threshold},
                          {"pd", p.pd.point}});
      }
      curves.push_back({{"detector", to_string(d)},
                        {"sinr_db", db_json(db)},
                        {"points", points}});
    }
  }
  o.summary = {{"monotone", true}, {"curves", curves}};
  out << fmt::format("roc: {} curves\n", curves.size());
  return o;
}

CommandOutput cmd_mis_sample(const RunConfig& cfg, std::uint64_t seed,
                             unsigned workers, std::ostream& out) {
  std::vector<NamedStatistic> stats;
  for (int c = 0; c < 3; ++c) {
    stats.push_back({"t", [c](const SufficientStatistic&, const PsiPair& p) {
                       return mis(p).as_array()[static_cast<std::size_t>(c)];
                     }});
  }
  for (int c = 0; c < 4; ++c) {
    stats.push_back({"lambda", [c](const SufficientStatistic&, const PsiPair& p) {
                       return p.lambda[static_cast<std::size_t>(c)];
                     }});
  }
  const auto s = run_trials(ScenarioModel(cfg.scenario), stats, cfg.trials,
                            seed, workers);
  const std::string hyp(to_string(cfg.scenario.hypothesis));
  CommandOutput o;
  o.csv = "trial,hypothesis,t1,t2,t3,lambda1,lambda2,lambda3,lambda4\n";
  std::size_t violations = 0;
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    o.csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", i, hyp,
                         fmt_double(s[0][i]), fmt_double(s[1][i]),
                         fmt_double(s[2][i]), fmt_double(s[3][i]),
                         fmt_double(s[4][i]), fmt_double(s[5][i]),
                         fmt_double(s[6][i]));
    const double slack = 1e-10;
    if (s[0][i] + slack < s[2][i] || s[2][i] + slack < s[1][i] ||
        s[1][i] + slack < 1.0) {
      ++violations;
    }
  }
  o.pass = violations == 0;
  o.summary = {{"trials", cfg.trials},
               {"hypothesis", hyp},
               {"interlacing_violations", violations}};
  out << fmt::format("mis-sample: {} rows, {} interlacing violations\n",
                     cfg.trials, violations);
  return o;
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::kInvarianceCheck:
      return "invariance-check";
    case Command::kCfar:
      return "cfar";
    case Command::kRoc:
      return "roc";
    case Command::kMisSample:
      return "mis-sample";
  }
  return "unknown";
}

RunConfig parse_config(std::string_view json_text, Command command) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    config_fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_fail("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(kConfigKeys.begin(), kConfigKeys.end(),
                     [&](const char* k) { return key == k; }) ==
        kConfigKeys.end()) {
      config_fail("unknown config key '" + key + "'");
    }
  }

  RunConfig cfg;
  ScenarioConfig& sc = cfg.scenario;
  if (j.contains("n")) sc.n = as_integer(j["n"], "n", 2);
  if (j.contains("k")) sc.k = as_integer(j["k"], "k", 1);
  if (j.contains("rho")) sc.rho = as_number(j["rho"], "rho");
  if (j.contains("doppler_fc")) {
    sc.doppler_fc = as_number(j["doppler_fc"], "doppler_fc");
  }
  if (j.contains("cnr_db")) sc.cnr_db = as_number(j["cnr_db"], "cnr_db");
  if (j.contains("gamma")) sc.gamma = as_number(j["gamma"], "gamma");
  if (j.contains("nu")) sc.nu = as_number(j["nu"], "nu");
  const bool has_alpha = j.contains("alpha_re") || j.contains("alpha_im");
  if (has_alpha && j.contains("sinr_db")) {
    config_fail("alpha_re/alpha_im and sinr_db are mutually exclusive");
  }
  if (has_alpha) {
    const double re = j.contains("alpha_re") ? as_number(j["alpha_re"], "alpha_re") : 0.0;
    const double im = j.contains("alpha_im") ? as_number(j["alpha_im"], "alpha_im") : 0.0;
    sc.alpha = cdouble(re, im);
  }
  if (j.contains("sinr_db")) sc.sinr_db = as_db(j["sinr_db"], "sinr_db");
  sc.hypothesis = (sc.alpha || sc.sinr_db) ? Hypothesis::kH1 : Hypothesis::kH0;

  cfg.trials = j.contains("trials")
                   ? static_cast<std::size_t>(as_integer(j["trials"], "trials", 1))
                   : default_trials(command);
  if (j.contains("pfa")) cfg.pfa = as_number(j["pfa"], "pfa");
  if (!(cfg.pfa > 0.0 && cfg.pfa <= 1.0)) config_fail("'pfa' must lie in (0, 1]");
  cfg.detectors = j.contains("detector")
                      ? as_detectors(j["detector"])
                      : std::vector<Detector>(kAllDetectors.begin(),
                                              kAllDetectors.end());

  cfg.gamma_grid = j.contains("gamma_grid")
                       ? as_grid(j["gamma_grid"], "gamma_grid", as_number)
                       : std::vector<double>{0.25, 1.0, 4.0};
  cfg.rho_grid = j.contains("rho_grid")
                     ? as_grid(j["rho_grid"], "rho_grid", as_number)
                     : std::vector<double>{0.0, 0.9, 0.99};
  cfg.pfa_grid = j.contains("pfa_grid")
                     ? as_grid(j["pfa_grid"], "pfa_grid", as_number)
                     : std::vector<double>{cfg.pfa};
  for (double p : cfg.pfa_grid) {
    if (!(p > 0.0 && p <= 1.0)) config_fail("'pfa_grid' values must lie in (0, 1]");
  }
  if (j.contains("sinr_grid")) {
    cfg.sinr_grid = as_grid(j["sinr_grid"], "sinr_grid", as_db);
  } else if (sc.sinr_db) {
    cfg.sinr_grid = {*sc.sinr_db};
  }

  const bool require_mis = command == Command::kInvarianceCheck ||
                           command == Command::kMisSample;
  check_scenario(sc, require_mis);

  switch (command) {
    case Command::kCfar:
      for (double g : cfg.gamma_grid) {
        for (double r : cfg.rho_grid) {
          ScenarioConfig cell = sc.null_hypothesis();
          cell.gamma = g;
          cell.rho = r;
          check_scenario(cell, false);
        }
      }
      break;
    case Command::kRoc:
      if (sc.alpha && cfg.sinr_grid.empty()) {
        const double lin = ScenarioModel(sc).sinr();
        cfg.sinr_grid = {lin > 0.0 ? 10.0 * std::log10(lin)
                                   : -std::numeric_limits<double>::infinity()};
        sc.alpha_phase = std::arg(*sc.alpha);
      }
      if (cfg.sinr_grid.empty()) {
        config_fail("roc needs 'sinr_db', 'sinr_grid' or an alpha amplitude");
      }
      break;
    case Command::kInvarianceCheck:
    case Command::kMisSample:
      break;
  }
  return cfg;
}

std::string config_to_json(const RunConfig& cfg, Command command) {
  const ScenarioConfig& sc = cfg.scenario;
  json j;
  j["n"] = sc.n;
  j["k"] = sc.k;
  j["rho"] = sc.rho;
  j["doppler_fc"] = sc.doppler_fc;
  j["cnr_db"] = sc.cnr_db;
  j["gamma"] = sc.gamma;
  j["nu"] = sc.nu;
  if (sc.alpha) {
    j["alpha_re"] = sc.alpha->real();
    j["alpha_im"] = sc.alpha->imag();
  }
  if (sc.sinr_db) j["sinr_db"] = db_json(*sc.sinr_db);
  j["hypothesis"] = std::string(to_string(sc.hypothesis));
  j["trials"] = cfg.trials;
  j["pfa"] = cfg.pfa;
  json dets = json::array();
  for (Detector d : cfg.detectors) dets.push_back(std::string(to_string(d)));
  j["detector"] = dets;
  switch (command) {
    case Command::kCfar:
      j["gamma_grid"] = grid_json(cfg.gamma_grid);
      j["rho_grid"] = grid_json(cfg.rho_grid);
      j["calibration_trials"] = kCfarCalibrationFactor * cfg.trials;
      break;
    case Command::kRoc:
      j["pfa_grid"] = grid_json(cfg.pfa_grid);
      j["sinr_grid"] = grid_json(cfg.sinr_grid, true);
      break;
    case Command::kInvarianceCheck:
    case Command::kMisSample:
      break;
  }
  return j.dump(2);
}

std::vector<SuiteResult> run_invariance_suites(const RunConfig& cfg,
                                               const InvarianceOptions& opts,
                                               std::uint64_t seed,
                                               unsigned workers) {
  struct SuiteDef {
    const char* name;
    double tolerance;
  };
  std::vector<SuiteDef> defs = {
      {"mis-invariance", 1e-8},       {"glr-invariance", 1e-8},
      {"2s-glr-invariance", 1e-8},    {"rao-invariance", 1e-6},
      {"wald-invariance", 1e-8},      {"glr-mis-form", 1e-9},
      {"2s-glr-mis-form", 1e-12},     {"wald-mis-form", 1e-10},
      {"sub-action-factorization", 1e-12},
      {"l1-eigenvalue-invariance", 1e-8},
      {"scaling-law", 1e-10},         {"interlacing", 1e-10},
      {"rank-one", 1e-10}};
  if (opts.inject_non_invariant) defs.push_back({"injected-trace-psi0", 1e-8});
  enum Idx {
    kMis, kGlrInv, k2sInv, kRaoInv, kWaldInv, kGlrForm, k2sForm, kWaldForm,
    kFactor, kL1, kScaling, kInterlace, kRankOne, kInjected
  };

  const ScenarioModel model(cfg.scenario);
  const Eigen::Index n = cfg.scenario.n;
  const Eigen::Index k = cfg.scenario.k;
  std::vector<std::vector<double>> worst(
      std::max(1u, workers), std::vector<double>(defs.size(), 0.0));

  auto body = [&](std::size_t chunk, std::size_t i) {
    auto& w = worst[chunk];
    auto bump = [&](int idx, double v) {
      w[static_cast<std::size_t>(idx)] =
          std::max(w[static_cast<std::size_t>(idx)], std::isnan(v) ? std::numeric_limits<double>::infinity() : v);
    };
    Rng rng = make_stream(seed, i);
    const SufficientStatistic stat = model.sample_statistic(rng);
    const PsiPair psi = compute_psi(stat);
    const MISVector t = mis(psi);
    std::array<double, 4> ref{};
    for (std::size_t d = 0; d < 4; ++d) {
      ref[d] = evaluate(kAllDetectors[d], psi, k, n);
    }

    bump(kGlrForm, rel(mis_form(Detector::kGlr, t, k, n), ref[0]));
    bump(k2sForm, rel(mis_form(Detector::kTwoStepGlr, t, k, n), ref[1]));
    bump(kWaldForm, rel(mis_form(Detector::kWald, t, k, n), ref[3]));
    bump(kInterlace, std::max({0.0, t.t3 - t.t1, t.t2 - t.t3, 1.0 - t.t2}));
    Eigen::Matrix2d delta = psi.psi0 - psi.psi1;
    const auto ed = eig2_desc(delta);
    bump(kRankOne, std::abs(ed[1]) / psi.lambda[0]);
    for (double phi : {1e-2, 1.0, 1e2}) {
      const auto scaled = compute_psi(act_l2(phi, stat)).lambda;
      for (std::size_t q = 0; q < 4; ++q) {
        bump(kScaling, rel(scaled[q] * phi, psi.lambda[q]));
      }
    }

    for (std::size_t e = 0; e < opts.elements_per_statistic; ++e) {
      const GroupElement g = sample_group_element(n, rng);
      const SufficientStatistic img = act(g, stat);
      const PsiPair p2 = compute_psi(img);
      const MISVector t2 = mis(p2);
      bump(kMis, std::max({rel(t2.t1, t.t1), rel(t2.t2, t.t2), rel(t2.t3, t.t3)}));
      bump(kGlrInv, rel(evaluate(Detector::kGlr, p2, k, n), ref[0]));
      bump(k2sInv, rel(evaluate(Detector::kTwoStepGlr, p2, k, n), ref[1]));
      bump(kRaoInv, rel(evaluate(Detector::kRao, p2, k, n), ref[2]));
      bump(kWaldInv, rel(evaluate(Detector::kWald, p2, k, n), ref[3]));

      const SufficientStatistic l1 = act_l1(g.G, g.U, stat);
      const SufficientStatistic seq = act_l2(g.phi, l1);
      bump(kFactor, std::max(max_rel_entries(seq.Zp(), img.Zp()),
                             max_rel_entries(seq.S(), img.S())));
      const auto l1_lambda = compute_psi(l1).lambda;
      for (std::size_t q = 0; q < 4; ++q) {
        bump(kL1, rel(l1_lambda[q], psi.lambda[q]));
      }
      if (opts.inject_non_invariant) bump(kInjected, rel(p2.trace0(), psi.trace0()));
    }
  };

  std::size_t n_chunks = 0;
  parallel_chunks(opts.statistics, workers, body, n_chunks);

  std::vector<SuiteResult> out;
  for (std::size_t s = 0; s < defs.size(); ++s) {
    SuiteResult r;
    r.suite = defs[s].name;
    r.tolerance = defs[s].tolerance;
    for (std::size_t c = 0; c < n_chunks; ++c) {
      r.max_deviation = std::max(r.max_deviation, worst[c][s]);
    }
    r.pass = r.max_deviation <= r.tolerance;
    out.push_back(r);
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Invariance and CFAR checks for persymmetric adaptive detectors",
               "persym"};
  app.set_version_flag("--version", PERSYM_VERSION);
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    bool inject = false;
  } o;

  const std::array<std::pair<Command, const char*>, 4> commands = {{
      {Command::kInvarianceCheck, "Run the invariance and identity suites"},
      {Command::kCfar, "False-alarm rate sweep over (gamma, rho)"},
      {Command::kRoc, "Detection probability versus false-alarm rate"},
      {Command::kMisSample, "Dump MIS and eigenvalue samples"},
  }};
  std::vector<std::pair<Command, CLI::App*>> subs;
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(std::string(to_string(cmd)), help);
    sub->add_option("--config", o.config, "JSON config file (defaults if omitted)");
    sub->add_option("--out", o.out, "CSV output path")->required();
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--workers", o.workers, "Worker threads (never changes results)")
        ->check(CLI::PositiveNumber);
    if (cmd == Command::kInvarianceCheck) {
      sub->add_flag("--inject-non-invariant", o.inject,
                    "Add a deliberately non-invariant statistic (must fail)");
    }
    subs.emplace_back(cmd, sub);
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  Command command = Command::kInvarianceCheck;
  for (const auto& [cmd, sub] : subs) {
    if (sub->parsed()) command = cmd;
  }

  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();
  RunConfig cfg;
  try {
    std::string text = "{}";
    if (!o.config.empty()) {
      std::ifstream f(o.config, std::ios::binary);
      if (!f) config_fail("cannot read config '" + o.config + "'");
      std::ostringstream ss;
      ss << f.rdbuf();
      text = ss.str();
    }
    cfg = parse_config(text, command);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const std::filesystem::path csv_path = o.out;
  std::filesystem::path summary_path = csv_path;
  summary_path += ".summary.json";
  std::filesystem::path manifest_path = csv_path;
  manifest_path += ".manifest.json";

  try {
    std::ofstream probe(csv_path, std::ios::binary | std::ios::trunc);
    if (!probe) throw IoError("cannot open '" + csv_path.string() + "' for writing");
    probe.close();

    CommandOutput result;
    try {
      switch (command) {
        case Command::kInvarianceCheck:
          result = cmd_invariance(cfg, o.seed, o.workers, o.inject, out);
          break;
        case Command::kCfar:
          result = cmd_cfar(cfg, o.seed, o.workers, out);
          break;
        case Command::kRoc:
          result = cmd_roc(cfg, o.seed, o.workers, out);
          break;
        case Command::kMisSample:
          result = cmd_mis_sample(cfg, o.seed, o.workers, out);
          break;
      }
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitPropertyFailure;
    }

    write_file(csv_path, result.csv);
    result.summary["command"] = std::string(to_string(command));
    write_file(summary_path, result.summary.dump(2) + "\n");

    const double duration = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - started)
                                .count();
    json manifest;
    manifest["command"] = std::string(to_string(command));
    manifest["config"] = json::parse(config_to_json(cfg, command));
    manifest["seed"] = o.seed;
    manifest["workers"] = o.workers;
    manifest["version"] = PERSYM_VERSION;
    manifest["started_utc"] = started_utc;
    manifest["duration_s"] = duration;
    manifest["outputs"] = {csv_path.string(), summary_path.string()};
    write_atomically(manifest_path, manifest.dump(2) + "\n");

    if (!result.pass) {
      err << to_string(command) << ": property check failed\n";
      return kExitPropertyFailure;
    }
    return kExitOk;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIoError;
  }
}

}  // namespace persym::cli
