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
#include "qscore/simulator.hpp"

using namespace qscore;

namespace {

Eigen::VectorXi counts(std::initializer_list<int> values) {
  Eigen::VectorXi v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const int x : values) v(i++) = x;
  return v;
}

DensityOperator diag_state(double p) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = p;
  m(1, 1) = 1.0 - p;
  return make_density(m);
}

}  // namespace

TEST_CASE("copy allocation splits n with the remainder first") {
  CHECK(allocate_copies(10, 3) == std::vector<long>{4, 3, 3});
  CHECK(allocate_copies(9, 3) == std::vector<long>{3, 3, 3});
  CHECK_THROWS_AS(allocate_copies(0, 3), ValidationError);
}

TEST_CASE("sampling examples") {
  SeededRng rng(1);
  CHECK(sample_outcomes(plus_state(), MeasurementBasis::hadamard(), 100, rng) == counts({100, 0}));
  CHECK(sample_outcomes(maximally_mixed(2), MeasurementBasis::computational(2), 0, rng) == counts({0, 0}));
  const Eigen::VectorXi c = sample_outcomes(plus_state(), MeasurementBasis::computational(2), 100000, rng);
  CHECK(c.sum() == 100000);
  CHECK(std::abs(c(0) - 50000) < 5.0 * std::sqrt(100000 * 0.25));
  SeededRng a(7, 3), b(7, 3);
  CHECK(sample_outcomes(plus_state(), MeasurementBasis::computational(2), 50, a) ==
        sample_outcomes(plus_state(), MeasurementBasis::computational(2), 50, b));
  CHECK_THROWS_AS(sample_outcomes(plus_state(), MeasurementBasis::computational(2), -1, a), ValidationError);
}

TEST_CASE("classical estimate is the add-alpha frequency") {
  const MeasurementBasis z = MeasurementBasis::computational(2);
  CHECK(classical_estimate(counts({50, 50}), z, 0.5).matrix().isApprox(maximally_mixed(2).matrix()));
  const DensityOperator e = classical_estimate(counts({100, 0}), z, 0.5);
  CHECK(std::real(e.matrix()(0, 0)) == doctest::Approx(100.5 / 101.0));
  CHECK(std::real(e.matrix()(1, 1)) == doctest::Approx(0.5 / 101.0));
  CHECK_THROWS_AS(classical_estimate(counts({0, 0}), z, 0.5), ValidationError);
  CHECK_THROWS_AS(classical_estimate(counts({1, 0}), z, 0.0), ValidationError);
}

TEST_CASE("balanced Z data on |+> gives the I/2 report and expected score log(1/2) + 1") {
  const MeasurementBasis z = MeasurementBasis::computational(2);
  const DensityOperator report = classical_estimate(counts({5000, 5000}), z, 0.5);
  CHECK(expected_score(plus_state(), report, Generator::log()) == doctest::Approx(std::log(0.5) + 1.0));
}

TEST_CASE("qubit tomography: inversion, projection and flooring") {
  const double eps = 1e-6;
  // All + in X, balanced Y and Z: r = (N/(N+1), 0, 0) with add-half smoothing.
  const EstimateResult r = pauli_tomography_estimate(counts({1000, 0}), counts({500, 500}), counts({500, 500}), 0.5, eps);
  CHECK_FALSE(r.clamped);
  const BlochVector b = density_to_bloch(r.state);
  CHECK(b.x == doctest::Approx(1000.0 / 1001.0).epsilon(1e-9));
  CHECK(std::abs(b.y) < 1e-12);
  CHECK(std::abs(b.z) < 1e-12);
  CHECK(trace_distance(r.state, plus_state()) < 1e-3);
  const double big = 1e-3;
  // |r| ~ sqrt(2) > 1: rescaled to 1 - eps (eigenvalues eps/2, 1 - eps/2), then
  // the eps floor lifts the small eigenvalue: |r| = (1 - 3 eps/2) / (1 + eps/2).
  const EstimateResult p = pauli_tomography_estimate(counts({1000, 0}), counts({1000, 0}), counts({500, 500}), 0.5, big);
  CHECK(p.clamped);
  CHECK(density_to_bloch(p.state).norm() == doctest::Approx((1.0 - 1.5 * big) / (1.0 + 0.5 * big)).epsilon(1e-12));
  CHECK(p.state.eigenvalues()(0) == doctest::Approx(big / (1.0 + 0.5 * big)).epsilon(1e-12));
  CHECK_THROWS_AS(pauli_tomography_estimate(counts({0, 0}), counts({1, 0}), counts({1, 0}), 0.5, eps), ValidationError);
}

TEST_CASE("tomography bases: mutually unbiased for prime d, complete otherwise") {
  for (const Eigen::Index d : {3, 5}) {
    const auto bases = tomography_bases(d);
    REQUIRE(bases.size() == static_cast<std::size_t>(d + 1));
    for (std::size_t a = 0; a < bases.size(); ++a)
      for (std::size_t b = a + 1; b < bases.size(); ++b) {
        const CMatrix overlap = bases[a].vectors().adjoint() * bases[b].vectors();
        CHECK((overlap.cwiseAbs2().array() - 1.0 / static_cast<double>(d)).abs().maxCoeff() < 1e-12);
      }
  }
  // Exact probabilities at huge counts: linear inversion recovers the state.
  SeededRng rng(2);
  for (const Eigen::Index d : {2, 3, 4, 6}) {
    const DensityOperator rho = random_mixed(d, rng);
    const auto bases = tomography_bases(d);
    std::vector<Eigen::VectorXi> c;
    for (const auto& b : bases) c.push_back((basis_probabilities(rho, b) * 1e9).array().round().cast<int>());
    const EstimateResult e = linear_inversion_estimate(bases, c, 0.5, 1e-12);
    CHECK(trace_distance(e.state, rho) < 1e-6);
  }
}

TEST_CASE("risk examples") {
  const Generator log = Generator::log();
  const MeasurementBasis z = MeasurementBasis::computational(2);
  // Oracle basis on |+> at n = 1: the add-half estimate (3/4, 1/4) is floored
  // at 1/2 to (0.6, 0.4), so the risk is -log 0.6 rather than 0.
  const RiskReport one = estimate_risk(plus_state(), Strategy::oracle(), log, 1, 10, 1);
  CHECK(one.risk_mean == doctest::Approx(-std::log(0.6)).epsilon(1e-12));
  CHECK(one.risk_stderr == 0.0);
  CHECK(one.clamp_events == 10);
  CHECK(estimate_risk(plus_state(), Strategy::oracle(), log, 4096, 20, 1).risk_mean < 1e-3);
  // Classical Z strategy on |+>: bias floor log 2.
  const RiskReport bias = estimate_risk(plus_state(), Strategy::classical(z), log, 256, 500, 2);
  CHECK(std::abs(bias.risk_mean - std::log(2.0)) < 0.05);
  // I/2 with t^2: risk = 2 E(q - 1/2)^2 = 1 / (2 (n + 1)^2 / n) to leading order.
  const RiskReport quad = estimate_risk(maximally_mixed(2), Strategy::classical(z), Generator::quadratic(), 256, 2000, 3);
  const double exact = oracle::binomial_expectation(256, 0.5, [](long k) {
    const double q = oracle::smoothed_binary(k, 256, 0.5, 1.0 / 512.0);
    return 2.0 * (q - 0.5) * (q - 0.5);
  });
  CHECK(std::abs(quad.risk_mean - exact) < 4.0 * quad.risk_stderr);
  CHECK(quad.risk_mean * 256 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("classical risk on |+> matches exact binomial enumeration") {
  const long n = 16;
  const RiskReport r =
      estimate_risk(plus_state(), Strategy::classical(MeasurementBasis::computational(2)), Generator::log(), n, 20000, 4);
  const double exact = oracle::binomial_expectation(n, 0.5, [n](long k) {
    return std::log(2.0) + oracle::kl_binary(0.5, oracle::smoothed_binary(k, n, 0.5, 1.0 / (2.0 * n)));
  });
  CHECK(std::abs(r.risk_mean - exact) < 4.0 * r.risk_stderr);
  for (const double x : r.per_trial) CHECK(x >= -1e-9);
}

TEST_CASE("results do not depend on the thread count") {
  SimulationOptions one, four;
  four.threads = 4;
  const Strategy tomo = Strategy::tomography();
  const DensityOperator rho = bloch_to_density(BlochVector(0.3, 0.2, 0.4));
  const RiskReport a = estimate_risk(rho, tomo, Generator::log(), 60, 101, 99, one);
  const RiskReport b = estimate_risk(rho, tomo, Generator::log(), 60, 101, 99, four);
  CHECK(a.per_trial == b.per_trial);
  CHECK(a.risk_mean == b.risk_mean);
  CHECK(a.risk_stderr == b.risk_stderr);
  CHECK(a.clamp_events == b.clamp_events);
}

TEST_CASE("gap reports are consistent and paired stderr does not exceed unpaired") {
  const Strategy classical = Strategy::classical(MeasurementBasis::computational(2));
  const DensityOperator rho = make_density(0.9 * plus_state().matrix() + 0.1 * maximally_mixed(2).matrix());
  for (const long n : {8L, 32L}) {
    const GapReport g = forecasting_gap(rho, Generator::log(), n, 2000, 5, classical, Strategy::oracle());
    CHECK(std::abs(g.gap_mean - (g.classical.risk_mean - g.quantum.risk_mean)) < 1e-12);
    CHECK(g.gap_stderr <= g.unpaired_stderr);
    CHECK(g.predicted_gap == doctest::Approx(g.coherence / static_cast<double>(n)));
    CHECK(g.gap_mean > 0.0);
  }
  // Incoherent state: both strategies measure the same basis with the same
  // uniforms, so the paired gap vanishes identically.
  const GapReport zero = forecasting_gap(diag_state(0.3), Generator::log(), 64, 500, 6, classical, Strategy::oracle());
  CHECK(zero.gap_mean == 0.0);
  CHECK(zero.coherence == 0.0);
  CHECK_THROWS_AS(forecasting_gap(plus_state(), Generator::log(), 4, 10, 1, Strategy::oracle(), Strategy::oracle()),
                  ValidationError);
}

TEST_CASE("tomography risk is consistent and tracks its asymptotic prediction (property)") {
  const Eigen::Vector3d r(0.3, 0.2, 0.4);
  const DensityOperator rho = bloch_to_density(BlochVector(r(0), r(1), r(2)));
  const Strategy tomo = Strategy::tomography();
  const RiskReport r64 = estimate_risk(rho, tomo, Generator::log(), 64, 2000, 7);
  const RiskReport r256 = estimate_risk(rho, tomo, Generator::log(), 256, 2000, 7);
  CHECK(r256.risk_mean < r64.risk_mean);

  // Asymptotically n R = Tr(H Sigma) / 2 with H the Bloch-coordinate Hessian of
  // Tr rho log rho and Sigma = 3 diag(1 - r_i^2) the covariance of n copies of
  // Pauli tomography; the bound replaces Sigma by the inverse QFI I - r r^T.
  const double a = r.norm();
  const Eigen::Vector3d u = r / a;
  const Eigen::Matrix3d h = std::log((1 + a) / (1 - a)) / (2 * a) * (Eigen::Matrix3d::Identity() - u * u.transpose()) +
                            u * u.transpose() / (1 - a * a);
  const Eigen::Matrix3d sigma = 3.0 * (Eigen::Vector3d::Ones() - r.cwiseAbs2()).asDiagonal().toDenseMatrix();
  const Eigen::Matrix3d qfi_inv = Eigen::Matrix3d::Identity() - r * r.transpose();
  const long n = 512;
  const RiskReport r512 = estimate_risk(rho, tomo, Generator::log(), n, 2000, 8);
  const double bound = crmc_bound(bloch_ball(), Params(r), Generator::log(), n).bound;
  CHECK(bound == doctest::Approx((h * qfi_inv).trace() / (2.0 * n)).epsilon(1e-9));
  const double predicted = (h * sigma).trace() / (2.0 * n);
  CHECK(std::abs(r512.risk_mean - predicted) < 0.1 * predicted);
  MESSAGE("tomography risk / CRMC bound at n = 512: " << r512.risk_mean / bound
                                                       << " (asymptotic " << predicted / bound << ")");
  CHECK(r512.risk_mean / bound >= 0.3);
}

TEST_CASE("scaling study grid") {
  const auto rows = scaling_study({2, 3}, {1, 2, 4}, Generator::log(), 50, 11);
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i].d == rows[i + 1].d) CHECK(rows[i + 1].crmc_bound == rows[i].crmc_bound / 2.0);
  // The d = 2, n = 1 cell is the single-copy |+> forecasting-gap cell.
  const GapReport cell = forecasting_gap(plus_state(), Generator::log(), 1, 50, 11,
                                         Strategy::classical(MeasurementBasis::computational(2)), Strategy::oracle());
  CHECK(rows[0].gap == cell.gap_mean);
  CHECK(rows[0].coherence == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(scaling_study({7}, {1}, Generator::log(), 1, 1), ValidationError);
  CHECK_THROWS_AS(scaling_study({2}, {4, 2}, Generator::log(), 1, 1), ValidationError);
  CHECK(default_trials(2) == 2000);
  CHECK(default_trials(3) == 500);
}
