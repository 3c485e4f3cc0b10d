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

#ifndef PERSYM_CLI_HPP_
#define PERSYM_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "persym/detectors.hpp"
#include "persym/scenario.hpp"

namespace persym::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitPropertyFailure = 1,
  kExitConfigError = 2,
  kExitIoError = 3,
};

enum class Command { kInvarianceCheck, kCfar, kRoc, kMisSample };

std::string_view to_string(Command c);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A config file with every default filled in and every value validated for
// the given command.
struct RunConfig {
  ScenarioConfig scenario;
  std::size_t trials = 0;
  double pfa = 1e-2;
  std::vector<Detector> detectors;
  std::vector<double> gamma_grid;
  std::vector<double> rho_grid;
  std::vector<double> pfa_grid;
  std::vector<double> sinr_grid;
};

// Parses JSON text. Unknown keys, wrong types and out-of-domain values throw
// ConfigError.
RunConfig parse_config(std::string_view json_text, Command command);

// JSON rendering of a resolved config, as recorded in the run manifest.
std::string config_to_json(const RunConfig& cfg, Command command);

struct SuiteResult {
  std::string suite;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct InvarianceOptions {
  std::size_t statistics = 100;
  std::size_t elements_per_statistic = 1000;
  bool inject_non_invariant = false;
};

// The invariance, identity, sub-action, scaling and interlacing suites over
// statistics drawn from `cfg.scenario`. Statistic i uses
// make_stream(seed, i), so the result does not depend on `workers`.
std::vector<SuiteResult> run_invariance_suites(const RunConfig& cfg,
                                               const InvarianceOptions& opts,
                                               std::uint64_t seed,
                                               unsigned workers);

// Entry point of the `persym` tool. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace persym::cli

#endif  // PERSYM_CLI_HPP_
