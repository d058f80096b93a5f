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

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qscore/scoring.hpp"

using namespace qscore;

namespace {

Generator quartic() {
  ScalarFunction<double> sf;
  sf.f = [](double t) { return t * t * t * t; };
  sf.fprime = [](double t) { return 4.0 * t * t * t; };
  sf.fsecond = [](double t) { return 12.0 * t * t; };
  SeededRng rng(0);
  return Generator::custom("quartic", sf, false, rng);
}

CMatrix diagonal(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v(i++) = x;
  return v.cast<std::complex<double>>().asDiagonal();
}

}  // namespace

TEST_CASE("plus state scored against itself and against I/2") {
  const Generator g = Generator::log();
  const DensityOperator plus = plus_state();
  const DensityOperator mixed = maximally_mixed(2);
  CHECK(std::abs(expected_score(plus, plus, g) - 1.0) < 1e-9);
  CHECK(std::abs(expected_score(plus, mixed, g) - (std::log(0.5) + 1.0)) < 1e-12);
  const ScoreReport r = score_report(plus, mixed, g);
  CHECK(std::abs(r.gap - std::log(2.0)) < 1e-9);
  CHECK(std::abs(r.divergence_bregman.value() - std::log(2.0)) < 1e-9);
}

TEST_CASE("log score operator is log(sigma) + I") {
  SeededRng rng(21);
  const DensityOperator sigma = random_mixed(3, rng);
  const CMatrix expected =
      oracle::matrix_function(sigma.matrix(), [](double t) { return std::log(t); }) + CMatrix::Identity(3, 3);
  CHECK((score_operator(sigma, Generator::log()).matrix() - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("value gradient of t^2 is 2 sigma; the score adds the properness offset") {
  SeededRng rng(22);
  const DensityOperator sigma = random_mixed(3, rng);
  const Generator g = Generator::quadratic();
  CHECK((value_gradient(sigma, g).matrix() - 2.0 * sigma.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  // S(sigma) = 2 sigma + (1 - Tr sigma^2) I; truthful expected score 1 + Tr sigma^2.
  const double purity = sigma.purity();
  const CMatrix expected = 2.0 * sigma.matrix() + (1.0 - purity) * CMatrix::Identity(3, 3);
  CHECK((score_operator(sigma, g).matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(expected_score(sigma, sigma, g) == doctest::Approx(1.0 + purity).epsilon(1e-12));
  // Pure reports are scored by the plain gradient.
  const DensityOperator psi = random_pure(3, rng);
  CHECK((score_operator(psi, g).matrix() - 2.0 * psi.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("properness and gap = Bregman on random pairs (property)") {
  SeededRng rng(23);
  for (const Generator& g : {Generator::log(), Generator::quadratic()}) {
    for (Eigen::Index d = 2; d <= 4; ++d) {
      for (int rep = 0; rep < 100; ++rep) {
        const DensityOperator rho = rep % 4 == 0 ? random_pure(d, rng) : random_mixed(d, rng);
        const DensityOperator sigma = random_mixed(d, rng);
        const ScoreReport r = score_report(rho, sigma, g);
        CHECK(r.expected_self - r.expected_report >= -1e-9);
        CHECK(std::abs(r.gap - r.divergence_bregman.value()) < 1e-10);
      }
    }
  }
}

TEST_CASE("scores and divergences are unitarily invariant (property)") {
  SeededRng rng(30);
  for (const Generator& g : {Generator::log(), Generator::quadratic()}) {
    for (int rep = 0; rep < 50; ++rep) {
      const Eigen::Index d = 2 + rep % 3;
      const DensityOperator rho = random_mixed(d, rng), sigma = random_mixed(d, rng);
      const CMatrix u = random_unitary(d, rng);
      const DensityOperator urho = make_density(u * rho.matrix() * u.adjoint());
      const DensityOperator usigma = make_density(u * sigma.matrix() * u.adjoint());
      CHECK(std::abs(value_functional(urho, g) - value_functional(rho, g)) < 1e-10);
      CHECK(std::abs(expected_score(urho, usigma, g) - expected_score(rho, sigma, g)) < 1e-10);
      CHECK(std::abs(bregman_divergence(urho, usigma, g).value() - bregman_divergence(rho, sigma, g).value()) < 1e-10);
      CHECK(std::abs(petz_f_divergence(urho, usigma, g).value() - petz_f_divergence(rho, sigma, g).value()) < 1e-9);
    }
  }
}

TEST_CASE("properness is strict away from the diagonal") {
  SeededRng rng(24);
  for (const Generator& g : {Generator::log(), Generator::quadratic()}) {
    int checked = 0;
    while (checked < 50) {
      const DensityOperator rho = random_mixed(3, rng), sigma = random_mixed(3, rng);
      if (trace_distance(rho, sigma) <= 0.05) continue;
      CHECK(bregman_divergence(rho, sigma, g).value() >= 1e-6);
      ++checked;
    }
  }
}

TEST_CASE("quadratic Bregman is the squared Hilbert-Schmidt distance") {
  SeededRng rng(25);
  for (int rep = 0; rep < 50; ++rep) {
    const DensityOperator rho = random_mixed(3, rng), sigma = random_pure(3, rng);
    CHECK(std::abs(bregman_divergence(rho, sigma, Generator::quadratic()).value() -
                   oracle::hs_distance_squared(rho.matrix(), sigma.matrix())) < 1e-10);
  }
}

TEST_CASE("log Bregman is the Umegaki relative entropy") {
  SeededRng rng(26);
  for (int rep = 0; rep < 50; ++rep) {
    const DensityOperator rho = random_mixed(4, rng), sigma = random_mixed(4, rng);
    CHECK(bregman_divergence(rho, sigma, Generator::log()).value() ==
          doctest::Approx(oracle::relative_entropy(rho.matrix(), sigma.matrix())).epsilon(1e-9));
  }
}

TEST_CASE("commuting pairs: Petz = Bregman = classical f-divergence for t log t") {
  SeededRng rng(27);
  for (int rep = 0; rep < 50; ++rep) {
    const CMatrix u = random_unitary(3, rng);
    Eigen::VectorXd p(3), q(3);
    for (Eigen::Index i = 0; i < 3; ++i) {
      p(i) = 0.05 + rng.uniform();
      q(i) = 0.05 + rng.uniform();
    }
    p /= p.sum();
    q /= q.sum();
    const DensityOperator rho = make_density(from_spectrum<double>(u, p));
    const DensityOperator sigma = make_density(from_spectrum<double>(u, q));
    const double classical = oracle::classical_f_divergence(p, q, oracle::xlogx);
    CHECK(std::abs(petz_f_divergence(rho, sigma, Generator::log()).value() - classical) < 1e-9);
    CHECK(std::abs(bregman_divergence(rho, sigma, Generator::log()).value() - classical) < 1e-9);
    // For t^2 the Petz divergence is the chi-square-type sum p^2 / q, which is
    // not the Hilbert-Schmidt Bregman divergence.
    const double chi = oracle::classical_f_divergence(p, q, [](double t) { return t * t; });
    CHECK(std::abs(petz_f_divergence(rho, sigma, Generator::quadratic()).value() - chi) < 1e-9);
  }
}

TEST_CASE("support violations give the infinite sentinel") {
  CVector zero = CVector::Zero(2), one = CVector::Zero(2);
  zero(0) = 1.0;
  one(1) = 1.0;
  const DensityOperator r0 = pure_state(zero), r1 = pure_state(one);
  CHECK_FALSE(bregman_divergence(r0, r1, Generator::log()).is_finite());
  CHECK(std::isinf(bregman_divergence(r0, r1, Generator::log()).value()));
  CHECK(bregman_divergence(r0, r1, Generator::quadratic()).value() == doctest::Approx(2.0));
  CHECK_FALSE(petz_f_divergence(r0, r1, Generator::quadratic()).is_finite());
  CHECK(bregman_divergence(r0, r0, Generator::log()).value() == doctest::Approx(0.0));
  CHECK_FALSE(support_contained(r0, r1));
  CHECK(support_contained(r0, maximally_mixed(2)));
}

TEST_CASE("dimension mismatches are rejected") {
  CHECK_THROWS_AS(expected_score(plus_state(), maximally_mixed(3), Generator::log()), DimensionError);
  CHECK_THROWS_AS(bregman_divergence(plus_state(), maximally_mixed(3), Generator::log()), DimensionError);
}

TEST_CASE("generator registry and custom generator validation") {
  CHECK(Generator::from_name("log").name() == "log");
  CHECK(Generator::from_name("quadratic").operator_convex());
  CHECK_THROWS_AS(Generator::from_name("cubic"), ValidationError);
  CHECK_FALSE(quartic().operator_convex());

  SeededRng rng(28);
  ScalarFunction<double> concave;
  concave.f = [](double t) { return -t * t; };
  concave.fprime = [](double t) { return -2.0 * t; };
  concave.fsecond = [](double) { return -2.0; };
  CHECK_THROWS_AS(Generator::custom("concave", concave, false, rng), ValidationError);
  ScalarFunction<double> wrong = Generator::quadratic().scalar();
  wrong.fprime = [](double t) { return t; };
  CHECK_THROWS_AS(Generator::custom("wrong", wrong, false, rng), ValidationError);
}

TEST_CASE("operator convexity tester: t log t and t^2 pass, t^4 yields a witness") {
  SeededRng rng(29);
  CHECK(check_operator_convexity(Generator::log(), 3, 300, rng).passed);
  CHECK(check_operator_convexity(Generator::quadratic(), 3, 300, rng).passed);
  const ConvexityReport r = check_operator_convexity(quartic(), 3, 5000, rng);
  REQUIRE_FALSE(r.passed);
  REQUIRE(r.witness.has_value());
  // Re-verify the witness with the Eigen oracle.
  const auto quart = [](double t) { return t * t * t * t; };
  const CMatrix& a = r.witness->first.matrix();
  const CMatrix& b = r.witness->second.matrix();
  const CMatrix jensen = (oracle::matrix_function(a, quart) + oracle::matrix_function(b, quart)) / 2.0 -
                         oracle::matrix_function((a + b) / 2.0, quart);
  CHECK(oracle::eig(jensen).eigenvalues()(0) < -1e-8);
}

TEST_CASE("Petz and Bregman differ on non-commuting pairs (reported, not asserted)") {
  SeededRng rng(30);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const DensityOperator rho = random_mixed(2, rng), sigma = random_mixed(2, rng);
    worst = std::max(worst, std::abs(petz_f_divergence(rho, sigma, Generator::log()).value() -
                                     bregman_divergence(rho, sigma, Generator::log()).value()));
  }
  MESSAGE("max |Petz - Bregman| over non-commuting qubit pairs: " << worst);
  CHECK(std::isfinite(worst));
  CHECK(bregman_divergence(make_density(diagonal({0.2, 0.8})), make_density(diagonal({0.5, 0.5})),
                           Generator::log())
            .value() == doctest::Approx(oracle::kl_binary(0.2, 0.5)));
}
