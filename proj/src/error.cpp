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

#include "persym/error.hpp"

#include <cstdlib>
#include <memory>

#include <spdlog/sinks/stdout_color_sinks.h>

#include "persym/log.hpp"

namespace persym {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidDimension:
      return "invalid-dimension";
    case ErrorKind::kModelViolation:
      return "model-violation";
    case ErrorKind::kNormalization:
      return "normalization";
    case ErrorKind::kSingularSecondary:
      return "singular-secondary";
    case ErrorKind::kNumericalConditioning:
      return "numerical-conditioning";
    case ErrorKind::kDegenerateStatistic:
      return "degenerate-statistic";
    case ErrorKind::kNearSingularDenominator:
      return "near-singular-denominator";
    case ErrorKind::kUnsupportedForm:
      return "unsupported-form";
    case ErrorKind::kDomain:
      return "domain";
  }
  return "unknown";
}

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto log = spdlog::stderr_color_mt("persym");
    log->set_pattern("[%l] %v");
    const char* env = std::getenv("PERSYM_LOG");
    auto level = spdlog::level::warn;
    if (env != nullptr) {
      const auto parsed = spdlog::level::from_str(env);
      if (parsed != spdlog::level::off || std::string(env) == "off") {
        level = parsed;
      }
    }
    log->set_level(level);
    return log;
  }();
  return *instance;
}

}  // namespace persym
