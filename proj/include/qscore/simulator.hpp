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

/// \file simulator.hpp
/// Monte Carlo n-copy tomography experiments.
///
/// A strategy measures n copies of rho, turns the counts into an estimate
/// rho_hat, and is charged the score gap Tr(rho S(rho)) - Tr(rho S(rho_hat)),
/// i.e. the Bregman divergence D(rho || rho_hat). Trial t always draws from
/// the random stream (seed, t), so results do not depend on how trials are
/// split across threads, and two strategies run with the same seed see the
/// same uniforms (paired design).

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qscore/estimation.hpp"

namespace qscore {

inline constexpr double kDefaultSmoothing = 0.5;

enum class StrategyKind {
  ClassicalFixedBasis,
  QuantumOracleBasis,
  QuantumPauliTomography,
};

struct Strategy {
  StrategyKind kind = StrategyKind::ClassicalFixedBasis;
  /// Measurement basis of the classical strategy.
  std::optional<MeasurementBasis> basis;
  /// Add-alpha smoothing of every frequency estimate.
  double alpha = kDefaultSmoothing;

  /// Measure every copy in a fixed basis; estimate a state diagonal in it.
  static Strategy classical(MeasurementBasis basis, double alpha = kDefaultSmoothing);
  /// Measure every copy in the eigenbasis of the true state.
  static Strategy oracle(double alpha = kDefaultSmoothing);
  /// Split copies over an informationally complete set of bases and invert.
  static Strategy tomography(double alpha = kDefaultSmoothing);

  /// "classical-fixed-basis", "quantum-oracle-basis", "quantum-pauli-tomography".
  std::string name() const;
};

Strategy strategy_from_name(const std::string& name, Eigen::Index d, const std::string& basis_name,
                            double alpha = kDefaultSmoothing);

/// floor(n / k) copies per basis, the remainder going to the first bases.
std::vector<long> allocate_copies(long n, std::size_t n_bases);

/// Bases used by tomography in dimension d: X, Y, Z for a qubit; for an odd
/// prime d the computational basis plus the d Wootters-Fields bases
/// omega^(b k^2 + a k) / sqrt(d); otherwise computational, Fourier and d - 1
/// fixed Haar-random bases, checked to be informationally complete.
std::vector<MeasurementBasis> tomography_bases(Eigen::Index d);

/// Born distribution of rho in a basis, clipped at zero and renormalized.
Eigen::VectorXd basis_probabilities(const DensityOperator& rho, const MeasurementBasis& basis);

/// Multinomial outcome counts, one inverse-CDF draw per copy.
Eigen::VectorXi sample_outcomes(const DensityOperator& rho, const MeasurementBasis& basis, long shots,
                                SeededRng& rng);

/// diag((c_k + alpha) / (N + d alpha)) in the measured basis.
DensityOperator classical_estimate(const Eigen::VectorXi& counts, const MeasurementBasis& basis, double alpha);

struct EstimateResult {
  DensityOperator state;
  /// True when rescaling, projection or the floor changed the raw estimate.
  bool clamped = false;
};

/// Linear-inversion tomography over `bases`.
///
/// Frequencies are add-alpha smoothed, the Gell-Mann coordinates are the least
/// squares solution of the Born equations, and the result is made physical:
/// a qubit Bloch vector longer than 1 is rescaled to length 1 - eps_est,
/// otherwise negative spectra are projected onto the simplex. Eigenvalues are
/// finally floored at eps_est and renormalized.
EstimateResult linear_inversion_estimate(const std::vector<MeasurementBasis>& bases,
                                         const std::vector<Eigen::VectorXi>& counts, double alpha, double eps_est);

/// Qubit special case with counts in the X, Y, Z bases.
EstimateResult pauli_tomography_estimate(const Eigen::VectorXi& x_counts, const Eigen::VectorXi& y_counts,
                                         const Eigen::VectorXi& z_counts, double alpha, double eps_est);

struct SimulationOptions {
  /// Estimate-side eigenvalue floor; a negative value selects 1 / (2n).
  double eps_est = -1.0;
  double eps_floor = kDefaultFloor;
  int threads = 1;
  /// Smoothing used by scaling_study, which builds its own strategies.
  double alpha = kDefaultSmoothing;

  double estimate_floor(long n) const { return eps_est < 0.0 ? 1.0 / (2.0 * static_cast<double>(n)) : eps_est; }
};

struct RiskReport {
  double risk_mean = 0.0;
  double risk_stderr = 0.0;
  long n = 0;
  long trials = 0;
  std::string strategy;
  std::string generator;
  long clamp_events = 0;
  std::vector<double> per_trial;
};

RiskReport estimate_risk(const DensityOperator& rho, const Strategy& strategy, const Generator& g, long n,
                         long trials, std::uint64_t seed, const SimulationOptions& options = {});

struct GapReport {
  RiskReport classical;
  RiskReport quantum;
  double gap_mean = 0.0;
  /// Standard error of the per-trial paired differences.
  double gap_stderr = 0.0;
  /// sqrt(se_classical^2 + se_quantum^2).
  double unpaired_stderr = 0.0;
  /// Relative entropy of coherence in the classical strategy's basis.
  double coherence = 0.0;
  double predicted_gap = 0.0;
  long n = 0;
  long trials = 0;
};

GapReport forecasting_gap(const DensityOperator& rho, const Generator& g, long n, long trials, std::uint64_t seed,
                          const Strategy& classical, const Strategy& quantum, const SimulationOptions& options = {});

/// 2000 trials for qubits, 500 otherwise.
long default_trials(Eigen::Index d);

struct ScalingRow {
  Eigen::Index d = 0;
  long n = 0;
  std::string generator;
  double classical_risk = 0.0;
  double classical_stderr = 0.0;
  double quantum_risk = 0.0;
  double quantum_stderr = 0.0;
  double gap = 0.0;
  double gap_stderr = 0.0;
  double coherence = 0.0;
  double predicted_gap = 0.0;
  double crmc_bound = 0.0;
  long clamp_events = 0;
  std::uint64_t seed = 0;
};

/// Classical Z-basis versus oracle-basis forecasting of the Fourier pure state
/// for every (d, n) cell. `trials` <= 0 selects default_trials(d). The bound
/// column is the Hessian-mode bound of the Gell-Mann chart at the same state.
std::vector<ScalingRow> scaling_study(const std::vector<Eigen::Index>& dims, const std::vector<long>& ns,
                                      const Generator& g, long trials, std::uint64_t seed,
                                      const SimulationOptions& options = {});

}  // namespace qscore
