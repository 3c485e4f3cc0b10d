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

#ifndef PERSYM_ERROR_HPP_
#define PERSYM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace persym {

// Failure categories raised by the library. Every exception thrown by persym
// derives from Error and carries one of these kinds.
enum class ErrorKind {
  kInvalidDimension,
  kModelViolation,
  kNormalization,
  kSingularSecondary,
  kNumericalConditioning,
  kDegenerateStatistic,
  kNearSingularDenominator,
  kUnsupportedForm,
  kDomain,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace persym

#endif  // PERSYM_ERROR_HPP_
