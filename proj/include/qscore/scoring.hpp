// Copyright 2026 The qscore Authors
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

/// \file scoring.hpp
/// Quantum scoring rules generated by a convex scalar function f.
///
/// The value functional is V(rho) = Tr f(rho). A forecaster reporting sigma
/// when the state is rho is paid Tr(rho S(sigma)), and the rule is proper when
/// reporting the truth maximizes the expected payment. The gap between the
/// truthful and untruthful payments is the Bregman divergence of V.

#pragma once

#include <optional>
#include <string>
#include <utility>

#include "qscore/states.hpp"

namespace qscore {

/// The scalar generator of a scoring rule.
class Generator {
 public:
  /// f(t) = t log t (von Neumann entropy rule). Registry name "log".
  static Generator log();
  /// f(t) = t^2 (quantum Brier analogue). Registry name "quadratic".
  static Generator quadratic();
  /// Look up a built-in generator by registry name.
  static Generator from_name(const std::string& name);
  /// A user generator. Rejected with ValidationError unless f passes a sampled
  /// midpoint-convexity test and its derivatives match finite differences.
  static Generator custom(std::string name, ScalarFunction<double> scalar, bool operator_convex, SeededRng& rng);

  const std::string& name() const { return name_; }
  const ScalarFunction<double>& scalar() const { return scalar_; }
  bool operator_convex() const { return operator_convex_; }
  bool singular_at_zero() const { return scalar_.singular_at_zero; }

 private:
  Generator(std::string name, ScalarFunction<double> scalar, bool operator_convex)
      : name_(std::move(name)), scalar_(std::move(scalar)), operator_convex_(operator_convex) {}

  std::string name_;
  ScalarFunction<double> scalar_;
  bool operator_convex_;
};

/// Midpoint convexity on `triples` random (x, y, weight) samples.
bool is_sampled_convex(const ScalarFunction<double>& sf, SeededRng& rng, int triples = 200);

/// A divergence value or the +infinity sentinel used for support violations.
class Divergence {
 public:
  static Divergence finite(double v) { return Divergence(v, false); }
  static Divergence infinite() { return Divergence(0.0, true); }

  bool is_finite() const { return !infinite_; }
  /// +inf for the sentinel.
  double value() const;

 private:
  Divergence(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// True when rho puts at most `tol` weight on eigenvectors of sigma whose
/// eigenvalue is below `tol`.
bool support_contained(const DensityOperator& rho, const DensityOperator& sigma, double tol = 1e-8);

/// Tr f(rho) = sum_i f(lambda_i).
double value_functional(const DensityOperator& rho, const Generator& g, double eps_floor = kDefaultFloor);

/// Hilbert-Schmidt gradient f'(sigma) of the value functional.
Hermitian value_gradient(const DensityOperator& sigma, const Generator& g, double eps_floor = kDefaultFloor);

/// Proper score operator S(sigma) = f'(sigma) + c(sigma) I.
///
/// The gradient of V on unit-trace states is only fixed up to a multiple of
/// the identity. c(sigma) = V(sigma) - Tr(sigma f'(sigma)) - kappa makes the
/// truthful expected score Tr(sigma S(sigma)) equal V(sigma) - kappa, which is
/// what makes the rule proper for every convex f. kappa is the same quantity
/// at a pure state, so pure reports are scored by plain f'. For t log t,
/// c(sigma) vanishes identically and S(sigma) = log(sigma) + I.
Hermitian score_operator(const DensityOperator& sigma, const Generator& g, double eps_floor = kDefaultFloor);

/// Re Tr(rho S(sigma)).
double expected_score(const DensityOperator& rho, const DensityOperator& sigma, const Generator& g,
                      double eps_floor = kDefaultFloor);

/// V(rho) - V(sigma) - Tr(f'(sigma)(rho - sigma)); infinite when f is singular
/// at zero and rho is not supported inside sigma.
Divergence bregman_divergence(const DensityOperator& rho, const DensityOperator& sigma, const Generator& g,
                              double eps_floor = kDefaultFloor);

/// Tr[sigma^{1/2} f(sigma^{-1/2} rho sigma^{-1/2}) sigma^{1/2}].
///
/// Eigenvalues of sigma below eps_floor are floored before inversion. Returns
/// the infinite sentinel when rho is not supported inside sigma.
Divergence petz_f_divergence(const DensityOperator& rho, const DensityOperator& sigma, const Generator& g,
                             double eps_floor = kDefaultFloor);

struct ConvexityReport {
  bool passed = true;
  int trials_run = 0;
  double worst_min_eigenvalue = 0.0;
  /// First pair (A, B) with f((A+B)/2) not below (f(A)+f(B))/2.
  std::optional<std::pair<Hermitian, Hermitian>> witness;
};

/// Sampled operator Jensen (midpoint) test with tolerance 1e-8 on the minimum
/// eigenvalue of (f(A)+f(B))/2 - f((A+B)/2). Stops at the first violation.
ConvexityReport check_operator_convexity(const Generator& g, Eigen::Index d, int trials, SeededRng& rng);

struct ScoreReport {
  double expected_self = 0.0;
  double expected_report = 0.0;
  double gap = 0.0;
  Divergence divergence_bregman = Divergence::finite(0.0);
  Divergence divergence_petz = Divergence::finite(0.0);
};

ScoreReport score_report(const DensityOperator& rho, const DensityOperator& sigma, const Generator& g,
                         double eps_floor = kDefaultFloor);

}  // namespace qscore
