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

// Closed-form bound quantities and feasibility conditions.
//
// Universal constants are not identified, so every output that carries one is
// reported "up to c_univ". Logarithms are natural.

#ifndef BYZGD_THEORY_HPP_
#define BYZGD_THEORY_HPP_

#include <string>

namespace byzgd::theory {

struct TheoryParams {
  double v = 1.0;        // sub-exponential scale of the gradient noise
  double Lhat = 1.0;     // sqrt(sum_k L_k^2)
  double L_F = 1.0;      // smoothness of F
  double L = 1.0;        // Lipschitz constant
  double D = 1.0;        // parameter-space diameter
  double sigma_sq = 0.0; // bound on local gradient norms squared
  double lambda0 = 1e-2;
  double c_univ = 1.0;
  double d = 1.0;
  double n = 1.0;
  double m = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 1.0;

  /// Throws InvalidInput naming the first violated invariant.
  void validate() const;
};

double eps1(const TheoryParams& p);
double eps2(const TheoryParams& p);

double eps_combined(const TheoryParams& p);
double eps_combined(double alpha, double beta, double delta, double lambda0, double eps1,
                    double eps2);

/// Same as eps_combined with (1 + beta) sqrt(1 - delta) in the compression term.
double eps_tilde(const TheoryParams& p);
double eps_tilde(double alpha, double beta, double delta, double lambda0, double eps1, double eps2);

/// Smallest admissible delta for the restricted adversary (exclusive bound).
double delta_threshold_option1(double alpha, double beta, double lambda0);

/// Smallest admissible delta for the arbitrary adversary (exclusive bound).
double delta_threshold_option2(double alpha, double beta, double lambda0);

inline constexpr double kEfConditionLimit = 0.107;

struct EfCondition {
  double value = 0.0;
  bool satisfied = true;
  double margin = 0.0;  // kEfConditionLimit - value
};

EfCondition ef_condition(double alpha, double beta, double delta);

struct EfDeltas {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

/// Uses L = p.L_F and c = p.c_univ.
EfDeltas ef_deltas(const TheoryParams& p);

struct EfNoByzBound {
  double optimization = 0.0;  // F0_gap / (gamma (T+1) (1/2 - L_F gamma / 2))
  double compression = 0.0;   // 4 gamma^2 L_F^2 L^2 (1-delta) / (delta^2 (1/2 - L_F gamma / 2))
  double total() const { return optimization + compression; }
};

/// Requires 0 < gamma < 1 / L_F.
EfNoByzBound ef_nobyz_terms(double F0_gap, double gamma, double T, double L_F, double L,
                            double delta);
double ef_nobyz_bound(double F0_gap, double gamma, double T, double L_F, double L, double delta);

/// Lower bound on the success probability with c1 = c2 = c_univ.
double success_probability(const TheoryParams& p);

/// Multi-line human-readable report of the feasibility checks.
std::string describe_failure_probability(const TheoryParams& p);

}  // namespace byzgd::theory

#endif  // BYZGD_THEORY_HPP_
