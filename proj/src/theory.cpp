// Copyright 2026 The byzgd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "byzgd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "byzgd/common.hpp"

namespace byzgd::theory {
namespace {

double deviation(double v, double d, double samples, double D, double Lhat) {
  const double a = d / samples * std::log1p(2.0 * samples * D * Lhat * d);
  return v * std::sqrt(d) * std::max(a, std::sqrt(a));
}

double mix(double alpha, double beta) {
  return alpha * alpha + beta * beta + (beta - alpha) * (beta - alpha);
}

double eps_with_numerator(double alpha, double beta, double lambda0, double numerator,
                          double e1, double e2) {
  const double honest = (1.0 - alpha) / (1.0 - beta);
  const double bias = numerator / (1.0 - beta);
  return 2.0 * (1.0 + 1.0 / lambda0) * (honest * honest * e2 * e2 + bias * bias * e1 * e1);
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

}  // namespace

void TheoryParams::validate() const {
  require(v > 0, "v must be > 0");
  require(Lhat > 0, "Lhat must be > 0");
  require(L_F > 0, "L_F must be > 0");
  require(L > 0, "L must be > 0");
  require(D > 0, "D must be > 0");
  require(sigma_sq >= 0, "sigma_sq must be >= 0");
  require(lambda0 > 0, "lambda0 must be > 0");
  require(c_univ > 0, "c_univ must be > 0");
  require(d >= 1 && n >= 1 && m >= 1, "d, n, m must be >= 1");
  require(alpha >= 0 && alpha <= beta, "need 0 <= alpha <= beta");
  require(beta < 0.5, "beta must be < 1/2");
  require(delta > 0 && delta <= 1, "delta must lie in (0, 1]");
}

double eps1(const TheoryParams& p) { return deviation(p.v, p.d, p.n, p.D, p.Lhat) + 1.0 / p.n; }

double eps2(const TheoryParams& p) {
  return deviation(p.v, p.d, (1.0 - p.alpha) * p.m * p.n, p.D, p.Lhat);
}

double eps_combined(double alpha, double beta, double delta, double lambda0, double e1, double e2) {
  return eps_with_numerator(alpha, beta, lambda0, std::sqrt(1.0 - delta) + alpha + beta, e1, e2);
}

double eps_combined(const TheoryParams& p) {
  return eps_combined(p.alpha, p.beta, p.delta, p.lambda0, eps1(p), eps2(p));
}

double eps_tilde(double alpha, double beta, double delta, double lambda0, double e1, double e2) {
  const double numerator = (1.0 + beta) * std::sqrt(1.0 - delta) + alpha + beta;
  return eps_with_numerator(alpha, beta, lambda0, numerator, e1, e2);
}

double eps_tilde(const TheoryParams& p) {
  return eps_tilde(p.alpha, p.beta, p.delta, p.lambda0, eps1(p), eps2(p));
}

double delta_threshold_option1(double alpha, double beta, double lambda0) {
  const double delta0 = 1.0 - (1.0 - beta) * (1.0 - beta) / (1.0 + lambda0);
  return delta0 + 4.0 * alpha - 9.0 * alpha * alpha + 4.0 * alpha * alpha * alpha;
}

double delta_threshold_option2(double alpha, double beta, double lambda0) {
  const double shrink = (1.0 - beta) / (1.0 + beta);
  const double delta0 = 1.0 - shrink * shrink / (1.0 + lambda0);
  return delta0 + 4.0 * alpha - 8.0 * alpha * alpha + 4.0 * alpha * alpha * alpha;
}

EfCondition ef_condition(double alpha, double beta, double delta) {
  const double lead = 1.0 + std::sqrt(1.0 - delta);
  EfCondition out;
  out.value = lead * lead / ((1.0 - beta) * (1.0 - beta)) * mix(alpha, beta);
  out.satisfied = out.value < kEfConditionLimit;
  out.margin = kEfConditionLimit - out.value;
  return out;
}

EfDeltas ef_deltas(const TheoryParams& p) {
  const double c = p.c_univ;
  const double L = p.L_F;
  const double e1 = eps1(p);
  const double e2 = eps2(p);
  const double lead = 1.0 + std::sqrt(1.0 - p.delta);
  const double memory = 3.0 * (1.0 - p.delta) / p.delta * p.sigma_sq;
  const double robust = 9.0 * lead * lead / (c * (1.0 - p.beta) * (1.0 - p.beta)) *
                        mix(p.alpha, p.beta) * (e1 * e1 + memory);
  EfDeltas out;
  out.delta1 = robust / 2.0 + 50.0 / c * e2 * e2;
  out.delta2 = L * L / 2.0 * memory / c + 2.0 * L * e2 * e2 / c + (0.5 + L) * robust;
  out.delta3 = (L * L / 100.0 + 25.0 * L * L) * memory / c;
  return out;
}

EfNoByzBound ef_nobyz_terms(double F0_gap, double gamma, double T, double L_F, double L,
                            double delta) {
  if (!(gamma > 0) || !(gamma * L_F < 1.0)) throw InvalidInput("need 0 < gamma < 1/L_F");
  if (!(delta > 0 && delta <= 1)) throw InvalidInput("delta must lie in (0, 1]");
  if (!(T >= 0)) throw InvalidInput("T must be >= 0");
  const double slack = 0.5 - L_F * gamma / 2.0;
  EfNoByzBound out;
  out.optimization = F0_gap / (gamma * (T + 1.0) * slack);
  out.compression = 4.0 * gamma * gamma * L_F * L_F * L * L * (1.0 - delta) / (delta * delta * slack);
  return out;
}

double ef_nobyz_bound(double F0_gap, double gamma, double T, double L_F, double L, double delta) {
  return ef_nobyz_terms(F0_gap, gamma, T, L_F, L, delta).total();
}

double success_probability(const TheoryParams& p) {
  const double c = p.c_univ;
  const double local = c * (1.0 - p.alpha) * p.m * p.d / std::pow(1.0 + p.n * p.Lhat * p.D, p.d);
  const double pooled = c * p.d / std::pow(1.0 + (1.0 - p.alpha) * p.m * p.n * p.Lhat * p.D, p.d);
  return 1.0 - local - pooled;
}

std::string describe_failure_probability(const TheoryParams& p) {
  std::ostringstream out;
  out << "success probability >= " << success_probability(p) << " (up to c_univ = " << p.c_univ
      << ")\n"
      << "  failure terms: c1 (1-alpha) m d / (1 + n Lhat D)^d"
      << " + c2 d / (1 + (1-alpha) m n Lhat D)^d\n";
  return out.str();
}

}  // namespace byzgd::theory
