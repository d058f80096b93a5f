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

#include "qscore/scoring.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace qscore {
namespace {

constexpr double kConvexityTolerance = 1e-8;

// Interval the random tests draw arguments from: the domain cut down to
// [-1, 1] or [0, 1].
std::pair<double, double> sampling_interval(const ScalarFunction<double>& sf) {
  const double lo = std::isfinite(sf.lower) ? sf.lower : -1.0;
  const double hi = std::isfinite(sf.upper) ? sf.upper : std::max(lo + 1.0, 1.0);
  return {lo, hi};
}

// Tr(f(P) - P f'(P)) for a rank-one projector P in dimension d.
double pure_anchor(const Generator& g, Eigen::Index d, double eps_floor) {
  const auto& sf = g.scalar();
  return sf.value(1.0, eps_floor) + static_cast<double>(d - 1) * sf.value(0.0, eps_floor) -
         sf.slope(1.0, eps_floor);
}

}  // namespace

Generator Generator::log() {
  ScalarFunction<double> sf;
  sf.f = [](double t) { return t == 0.0 ? 0.0 : t * std::log(t); };
  sf.fprime = [](double t) { return std::log(t) + 1.0; };
  sf.fsecond = [](double t) { return 1.0 / t; };
  sf.lower = 0.0;
  sf.singular_at_zero = true;
  return Generator("log", std::move(sf), true);
}

Generator Generator::quadratic() {
  ScalarFunction<double> sf;
  sf.f = [](double t) { return t * t; };
  sf.fprime = [](double t) { return 2.0 * t; };
  sf.fsecond = [](double) { return 2.0; };
  return Generator("quadratic", std::move(sf), true);
}

Generator Generator::from_name(const std::string& name) {
  if (name == "log") return log();
  if (name == "quadratic") return quadratic();
  throw ValidationError("unknown generator '" + name + "' (expected 'log' or 'quadratic')");
}

Generator Generator::custom(std::string name, ScalarFunction<double> scalar, bool operator_convex,
                            SeededRng& rng) {
  if (!scalar.f || !scalar.fprime || !scalar.fsecond)
    throw ValidationError("generator '" + name + "' must define f, f' and f''");
  if (!is_sampled_convex(scalar, rng))
    throw ValidationError("generator '" + name + "' failed the sampled convexity check");
  if (!derivatives_consistent(scalar))
    throw ValidationError("generator '" + name + "' derivatives disagree with finite differences");
  return Generator(std::move(name), std::move(scalar), operator_convex);
}

bool is_sampled_convex(const ScalarFunction<double>& sf, SeededRng& rng, int triples) {
  const auto [lo, hi] = sampling_interval(sf);
  for (int k = 0; k < triples; ++k) {
    const double x = lo + (hi - lo) * rng.uniform();
    const double y = lo + (hi - lo) * rng.uniform();
    const double w = rng.uniform();
    const double mixed = sf.value(w * x + (1.0 - w) * y);
    const double chord = w * sf.value(x) + (1.0 - w) * sf.value(y);
    if (mixed > chord + 1e-9) return false;
  }
  return true;
}

double Divergence::value() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

bool support_contained(const DensityOperator& rho, const DensityOperator& sigma, double tol) {
  require_same_dim(rho.matrix(), sigma.matrix());
  const auto& lambda = sigma.eigenvalues();
  const auto& u = sigma.eigenvectors();
  double weight = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (lambda(k) < tol) weight += std::real(u.col(k).dot(rho.matrix() * u.col(k)));
  return weight <= tol;
}

double value_functional(const DensityOperator& rho, const Generator& g, double eps_floor) {
  double v = 0.0;
  for (const double lambda : rho.eigenvalues()) v += g.scalar().value(lambda, eps_floor);
  return v;
}

Hermitian value_gradient(const DensityOperator& sigma, const Generator& g, double eps_floor) {
  return apply_function(sigma.op(), g.scalar().derivative(), eps_floor);
}

Hermitian score_operator(const DensityOperator& sigma, const Generator& g, double eps_floor) {
  const auto& sf = g.scalar();
  const auto& lambda = sigma.eigenvalues();
  Eigen::VectorXd slopes(lambda.size());
  double offset = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    slopes(i) = sf.slope(lambda(i), eps_floor);
    offset += sf.value(lambda(i), eps_floor) - lambda(i) * slopes(i);
  }
  offset -= pure_anchor(g, sigma.dim(), eps_floor);
  return Hermitian::from_spectrum(sigma.eigenvectors(), (slopes.array() + offset).matrix());
}

double expected_score(const DensityOperator& rho, const DensityOperator& sigma, const Generator& g,
                      double eps_floor) {
  require_same_dim(rho.matrix(), sigma.matrix());
  return std::real((rho.matrix() * score_operator(sigma, g, eps_floor).matrix()).trace());
}

Divergence bregman_divergence(const DensityOperator& rho, const DensityOperator& sigma, const Generator& g,
                              double eps_floor) {
  require_same_dim(rho.matrix(), sigma.matrix());
  if (g.singular_at_zero() && !support_contained(rho, sigma)) return Divergence::infinite();
  // Tr(f'(sigma)(rho - sigma)) = sum_j f'(mu_j) (<v_j|rho|v_j> - mu_j), read
  // off the cached eigensystem of sigma.
  const auto& mu = sigma.eigenvalues();
  const auto& v = sigma.eigenvectors();
  double linear = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const double weight = std::real(v.col(j).dot(rho.matrix() * v.col(j)));
    linear += g.scalar().slope(mu(j), eps_floor) * (weight - mu(j));
  }
  return Divergence::finite(value_functional(rho, g, eps_floor) - value_functional(sigma, g, eps_floor) - linear);
}

Divergence petz_f_divergence(const DensityOperator& rho, const DensityOperator& sigma, const Generator& g,
                             double eps_floor) {
  require_same_dim(rho.matrix(), sigma.matrix());
  if (!support_contained(rho, sigma)) return Divergence::infinite();

  const Eigen::VectorXd lambda = sigma.eigenvalues().cwiseMax(eps_floor);
  const CMatrix& u = sigma.eigenvectors();
  const CMatrix root = from_spectrum<double>(u, lambda.cwiseSqrt());
  const CMatrix inv_root = from_spectrum<double>(u, lambda.cwiseSqrt().cwiseInverse());

  CMatrix sandwich = inv_root * rho.matrix() * inv_root;
  sandwich = (sandwich + sandwich.adjoint()) / 2.0;
  const Hermitian m(sandwich);
  // m is congruent to rho, hence PSD; negative eigenvalues are rounding.
  Eigen::VectorXd mapped(m.dim());
  for (Eigen::Index i = 0; i < m.dim(); ++i)
    mapped(i) = g.scalar().value(std::max(0.0, m.eigenvalues()(i)), eps_floor);
  const CMatrix fm = from_spectrum<double>(m.eigenvectors(), mapped);
  return Divergence::finite(std::real((root * fm * root).trace()));
}

ConvexityReport check_operator_convexity(const Generator& g, Eigen::Index d, int trials, SeededRng& rng) {
  if (d < 2) throw DimensionError("operator convexity test needs d >= 2");
  const auto [lo, hi] = sampling_interval(g.scalar());
  ConvexityReport report;
  report.worst_min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Hermitian a = random_hermitian(d, lo, hi, rng);
    const Hermitian b = random_hermitian(d, lo, hi, rng);
    const Hermitian mid((a.matrix() + b.matrix()) / 2.0);
    const CMatrix gap = (apply_function(a, g.scalar()).matrix() + apply_function(b, g.scalar()).matrix()) / 2.0 -
                        apply_function(mid, g.scalar()).matrix();
    const double min_eig = Hermitian(gap).eigenvalues()(0);
    report.trials_run = t + 1;
    report.worst_min_eigenvalue = std::min(report.worst_min_eigenvalue, min_eig);
    if (min_eig < -kConvexityTolerance) {
      report.passed = false;
      report.witness.emplace(a, b);
      break;
    }
  }
  return report;
}

ScoreReport score_report(const DensityOperator& rho, const DensityOperator& sigma, const Generator& g,
                         double eps_floor) {
  ScoreReport r;
  r.expected_self = expected_score(rho, rho, g, eps_floor);
  r.expected_report = expected_score(rho, sigma, g, eps_floor);
  r.gap = r.expected_self - r.expected_report;
  r.divergence_bregman = bregman_divergence(rho, sigma, g, eps_floor);
  r.divergence_petz = petz_f_divergence(rho, sigma, g, eps_floor);
  assert(!r.divergence_bregman.is_finite() ||
         std::abs(r.gap - r.divergence_bregman.value()) <= 1e-6 * (1.0 + std::abs(r.gap)));
  return r;
}

}  // namespace qscore
