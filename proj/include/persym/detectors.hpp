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

#ifndef PERSYM_DETECTORS_HPP_
#define PERSYM_DETECTORS_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "persym/sufficient_stats.hpp"

namespace persym {

enum class Detector { kGlr, kTwoStepGlr, kRao, kWald };
enum class Form { kDirect, kMisForm };

inline constexpr std::array<Detector, 4> kAllDetectors = {
    Detector::kGlr, Detector::kTwoStepGlr, Detector::kRao, Detector::kWald};

// Wire names: "glr", "2s-glr", "rao", "wald".
std::string_view to_string(Detector kind);
std::optional<Detector> parse_detector(std::string_view name);

// Rao has no closed MIS form; only its direct form is provided.
constexpr bool has_mis_form(Detector kind) { return kind != Detector::kRao; }

inline constexpr double kRaoDenominatorTol = 1e-12;

struct DetectorOutput {
  double value = 0.0;
  Detector kind = Detector::kGlr;
  Form form = Form::kDirect;
  double gamma0_hat = 0.0;
  double gamma1_hat = 0.0;
  std::array<double, 4> lambda{};
};

// Direct forms, evaluated on the quadratic forms.
double glr(const PsiPair& psis, Eigen::Index k, Eigen::Index n);
double two_step_glr(const PsiPair& psis);
double rao(const PsiPair& psis, Eigen::Index k, Eigen::Index n);
double wald(const PsiPair& psis, Eigen::Index k, Eigen::Index n);

// Auxiliary functions of the MIS-form expressions:
//   g_gamma_num(l1 / l2) = l1 * gamma0_hat,  g_gamma_den(l3 / l4) = l3 * gamma1_hat.
// lambda * gamma_hat is invariant to a common scaling of the two eigenvalues,
// so both are evaluated on the eigenvalue pair (ratio, 1).
double g_gamma_num(double t1_over_t2, Eigen::Index k, Eigen::Index n);
double g_gamma_den(double t3, Eigen::Index k, Eigen::Index n);

// The statistic computed from the MIS alone. Throws kUnsupportedForm for Rao.
double mis_form(Detector kind, const MISVector& t, Eigen::Index k,
                Eigen::Index n);

double evaluate(Detector kind, const PsiPair& psis, Eigen::Index k,
                Eigen::Index n);

// Evaluation with diagnostics. MIS form requires N >= 3.
DetectorOutput evaluate(Detector kind, Form form, const PsiPair& psis,
                        Eigen::Index k, Eigen::Index n);

}  // namespace persym

#endif  // PERSYM_DETECTORS_HPP_
