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

#include "persym/detectors.hpp"

#include <cmath>
#include <sstream>

#include "persym/error.hpp"

namespace persym {

namespace {

double glr_exponent(Eigen::Index k, Eigen::Index n) {
  return static_cast<double>(n) / static_cast<double>(k + 1);
}

// log det(I + g Psi) = log(1 + g tr + g^2 det).
double log_det_shifted(double g, double trace, double det) {
  return std::log1p(g * trace + g * g * det);
}

void require_ratio(double x, const char* name) {
  if (!(x >= 1.0)) {
    std::ostringstream msg;
    msg << name << " = " << x << " must be >= 1";
    fail(ErrorKind::kDomain, msg.str());
  }
}

}  // namespace

std::string_view to_string(Detector kind) {
  switch (kind) {
    case Detector::kGlr:
      return "glr";
    case Detector::kTwoStepGlr:
      return "2s-glr";
    case Detector::kRao:
      return "rao";
    case Detector::kWald:
      return "wald";
  }
  return "unknown";
}

std::optional<Detector> parse_detector(std::string_view name) {
  for (Detector d : kAllDetectors) {
    if (to_string(d) == name) return d;
  }
  return std::nullopt;
}

double glr(const PsiPair& psis, Eigen::Index k, Eigen::Index n) {
  const ScaleEstimates g = scale_estimates(psis, k, n);
  const double p = glr_exponent(k, n);
  const double log_t =
      -p * std::log(g.gamma0_hat) +
      log_det_shifted(g.gamma0_hat, psis.trace0(), psis.det0()) +
      p * std::log(g.gamma1_hat) -
      log_det_shifted(g.gamma1_hat, psis.trace1(), psis.det1());
  return std::exp(log_t);
}

double two_step_glr(const PsiPair& psis) {
  const double den = psis.trace1();
  if (!(den > 0.0)) fail(ErrorKind::kDegenerateStatistic, "Tr[Psi1] = 0");
  return psis.trace0() / den;
}

double rao(const PsiPair& psis, Eigen::Index k, Eigen::Index n) {
  const double g0 = scale_estimate(psis.trace0(), psis.det0(), k, n)[0];
  const Eigen::Matrix2d delta = psis.psi0 - psis.psi1;
  const Eigen::Matrix2d a_inv =
      (Eigen::Matrix2d::Identity() + g0 * psis.psi0).inverse();
  const Eigen::Matrix2d da = delta * a_inv;
  const double num = g0 * (da * a_inv).trace();
  const double den = 1.0 - g0 * da.trace();
  if (!(std::abs(den) > kRaoDenominatorTol)) {
    std::ostringstream msg;
    msg << "Rao denominator " << den << " is within " << kRaoDenominatorTol
        << " of zero";
    fail(ErrorKind::kNearSingularDenominator, msg.str());
  }
  return num / den;
}

double wald(const PsiPair& psis, Eigen::Index k, Eigen::Index n) {
  const double g1 = scale_estimate(psis.trace1(), psis.det1(), k, n)[0];
  return g1 * (psis.trace0() - psis.trace1());
}

double g_gamma_num(double t1_over_t2, Eigen::Index k, Eigen::Index n) {
  require_ratio(t1_over_t2, "t1/t2");
  return t1_over_t2 * scale_estimate(t1_over_t2 + 1.0, t1_over_t2, k, n)[0];
}

double g_gamma_den(double t3, Eigen::Index k, Eigen::Index n) {
  require_ratio(t3, "t3");
  return t3 * scale_estimate(t3 + 1.0, t3, k, n)[0];
}

double mis_form(Detector kind, const MISVector& t, Eigen::Index k,
                Eigen::Index n) {
  switch (kind) {
    case Detector::kGlr: {
      const double g_num = g_gamma_num(t.t1 / t.t2, k, n);
      const double g_den = g_gamma_den(t.t3, k, n);
      const double p = glr_exponent(k, n);
      const double log_t =
          -p * (std::log(t.t3 * g_num) - std::log(t.t1 * g_den)) +
          std::log1p(g_num) + std::log1p((t.t2 / t.t1) * g_num) -
          std::log1p(g_den) - std::log1p(g_den / t.t3);
      return std::exp(log_t);
    }
    case Detector::kTwoStepGlr:
      return (t.t1 + t.t2) / (1.0 + t.t3);
    case Detector::kWald: {
      const double g_den = g_gamma_den(t.t3, k, n);
      return g_den * (t.t1 / t.t3 + t.t2 / t.t3 - (1.0 + 1.0 / t.t3));
    }
    case Detector::kRao:
      break;
  }
  fail(ErrorKind::kUnsupportedForm,
       std::string("no MIS form for detector ") + std::string(to_string(kind)));
}

double evaluate(Detector kind, const PsiPair& psis, Eigen::Index k,
                Eigen::Index n) {
  switch (kind) {
    case Detector::kGlr:
      return glr(psis, k, n);
    case Detector::kTwoStepGlr:
      return two_step_glr(psis);
    case Detector::kRao:
      return rao(psis, k, n);
    case Detector::kWald:
      return wald(psis, k, n);
  }
  fail(ErrorKind::kDomain, "unknown detector");
}

DetectorOutput evaluate(Detector kind, Form form, const PsiPair& psis,
                        Eigen::Index k, Eigen::Index n) {
  DetectorOutput out;
  out.kind = kind;
  out.form = form;
  out.lambda = psis.lambda;
  if (k + 1 > n && psis.trace0() > 0.0 && psis.trace1() > 0.0) {
    const ScaleEstimates g = scale_estimates(psis, k, n);
    out.gamma0_hat = g.gamma0_hat;
    out.gamma1_hat = g.gamma1_hat;
  }
  out.value = form == Form::kDirect ? evaluate(kind, psis, k, n)
                                    : mis_form(kind, mis(psis), k, n);
  if (!std::isfinite(out.value)) {
    fail(ErrorKind::kDegenerateStatistic,
         std::string(to_string(kind)) + " statistic is not finite");
  }
  return out;
}

}  // namespace persym
