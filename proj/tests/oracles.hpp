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

// Independent reference computations for the test suites. Nothing here calls
// the library's eigensolver or functional calculus: spectra come from Eigen's
// SelfAdjointEigenSolver and everything else is written out from the
// definitions.

#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "qscore/states.hpp"

namespace qscore::oracle {

using Fn = std::function<double(double)>;

inline Eigen::SelfAdjointEigenSolver<CMatrix> eig(const CMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>((m + m.adjoint()) / 2.0);
}

/// U f(Lambda) U^H through Eigen's solver.
inline CMatrix matrix_function(const CMatrix& m, const Fn& f) {
  const auto es = eig(m);
  Eigen::VectorXd mapped(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < mapped.size(); ++i) mapped(i) = f(es.eigenvalues()(i));
  return es.eigenvectors() * mapped.cast<std::complex<double>>().asDiagonal() * es.eigenvectors().adjoint();
}

inline double trace_function(const CMatrix& m, const Fn& f) {
  const auto es = eig(m);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += f(es.eigenvalues()(i));
  return s;
}

inline double xlogx(double t) { return t <= 0.0 ? 0.0 : t * std::log(t); }

/// Umegaki relative entropy Tr rho (log rho - log sigma) for full-rank sigma.
inline double relative_entropy(const CMatrix& rho, const CMatrix& sigma) {
  const CMatrix log_sigma = matrix_function(sigma, [](double t) { return std::log(t); });
  return trace_function(rho, xlogx) - std::real((rho * log_sigma).trace());
}

/// Squared Hilbert-Schmidt distance.
inline double hs_distance_squared(const CMatrix& a, const CMatrix& b) { return (a - b).squaredNorm(); }

/// Classical f-divergence sum_k q_k f(p_k / q_k).
inline double classical_f_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const Fn& f) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) s += q(k) * f(p(k) / q(k));
  return s;
}

/// Binary KL divergence in nats.
inline double kl_binary(double p, double q) {
  double s = 0.0;
  if (p > 0.0) s += p * std::log(p / q);
  if (p < 1.0) s += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return s;
}

inline double log_binomial(long n, long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

/// Exact expectation over k ~ Binomial(n, p) of g(k).
inline double binomial_expectation(long n, double p, const std::function<double(long)>& g) {
  double s = 0.0;
  for (long k = 0; k <= n; ++k) {
    double logw = log_binomial(n, k);
    if (k > 0) logw += static_cast<double>(k) * std::log(p);
    if (k < n) logw += static_cast<double>(n - k) * std::log1p(-p);
    if ((k > 0 && p == 0.0) || (k < n && p == 1.0)) continue;
    s += std::exp(logw) * g(k);
  }
  return s;
}

/// Add-half estimate of a binary frequency, floored at eps and renormalized,
/// returned as the probability of the first outcome.
inline double smoothed_binary(long k, long n, double alpha, double eps) {
  double q0 = (static_cast<double>(k) + alpha) / (static_cast<double>(n) + 2.0 * alpha);
  double q1 = 1.0 - q0;
  q0 = std::max(q0, eps);
  q1 = std::max(q1, eps);
  return q0 / (q0 + q1);
}

/// Quantum Fisher information of a pure-state curve, from the ket and its
/// derivative: 4 (<dpsi|dpsi> - |<psi|dpsi>|^2).
inline double pure_state_qfi(const CVector& psi, const CVector& dpsi) {
  return 4.0 * (dpsi.squaredNorm() - std::norm(psi.dot(dpsi)));
}

/// Central second difference of s -> Tr f(h + s a + t b) mixed in (s, t).
inline double mixed_second_difference(const CMatrix& h, const CMatrix& a, const CMatrix& b, const Fn& f,
                                      double step) {
  const auto v = [&](double s, double t) { return trace_function(h + s * a + t * b, f); };
  return (v(step, step) - v(step, -step) - v(-step, step) + v(-step, -step)) / (4.0 * step * step);
}

/// Richardson extrapolation of the mixed second difference: (4 D(step/2) - D(step)) / 3
/// cancels the step^2 truncation term, so a step large enough to keep
/// cancellation error small still gives O(step^4) accuracy.
inline double mixed_second_difference_extrapolated(const CMatrix& h, const CMatrix& a, const CMatrix& b, const Fn& f,
                                                   double step) {
  return (4.0 * mixed_second_difference(h, a, b, f, step / 2.0) - mixed_second_difference(h, a, b, f, step)) / 3.0;
}

}  // namespace qscore::oracle
