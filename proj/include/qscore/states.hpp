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

#pragma once

#include <string>
#include <utility>

#include "qscore/hermitian.hpp"
#include "qscore/rng.hpp"

namespace qscore {

using Hermitian = HermitianMatrix<double>;
using CMatrix = ComplexMatrix<double>;
using CVector = Eigen::VectorXcd;

inline constexpr double kStateTolerance = 1e-10;

/// A density operator: Hermitian, positive semidefinite, unit trace.
///
/// Only make_density (and the helpers built on it) can create one.
class DensityOperator {
 public:
  const Hermitian& op() const { return op_; }
  const CMatrix& matrix() const { return op_.matrix(); }
  const Eigen::VectorXd& eigenvalues() const { return op_.eigenvalues(); }
  const CMatrix& eigenvectors() const { return op_.eigenvectors(); }
  Eigen::Index dim() const { return op_.dim(); }
  double purity() const;

 private:
  explicit DensityOperator(Hermitian h) : op_(std::move(h)) {}
  friend DensityOperator make_density(const CMatrix& m);

  Hermitian op_;
};

/// Validate m as a state. Eigenvalues in [-1e-10, 0) are clipped to zero and
/// the result renormalized; anything more negative, a trace off by more than
/// 1e-10, or a non-Hermitian input throws ValidationError.
DensityOperator make_density(const CMatrix& m);

DensityOperator pure_state(const CVector& ket);
DensityOperator maximally_mixed(Eigen::Index d);

/// Lift eigenvalues below eps to eps and renormalize. The flag reports
/// whether anything was lifted.
std::pair<DensityOperator, bool> floor_eigenvalues(const DensityOperator& rho, double eps);

/// Half the trace norm of rho - sigma.
double trace_distance(const DensityOperator& rho, const DensityOperator& sigma);

CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();

/// An orthonormal basis stored as the columns of a unitary matrix.
class MeasurementBasis {
 public:
  MeasurementBasis(CMatrix vectors, std::string label);

  static MeasurementBasis computational(Eigen::Index d);
  static MeasurementBasis fourier(Eigen::Index d);
  static MeasurementBasis hadamard();  // X eigenbasis, |+>, |->
  static MeasurementBasis circular();  // Y eigenbasis
  /// "Z"/"computational", "X"/"hadamard", "Y"/"circular", "F"/"fourier".
  static MeasurementBasis named(const std::string& name, Eigen::Index d);
  /// Eigenbasis of a state, as cached by its decomposition.
  static MeasurementBasis eigenbasis(const DensityOperator& rho);

  const CMatrix& vectors() const { return vectors_; }
  const std::string& label() const { return label_; }
  Eigen::Index dim() const { return vectors_.rows(); }
  CMatrix projector(Eigen::Index k) const;

 private:
  CMatrix vectors_;
  std::string label_;
};

DensityOperator dephase(const DensityOperator& rho, const MeasurementBasis& basis);

/// -sum lambda log lambda in nats, with 0 log 0 = 0.
double von_neumann_entropy(const DensityOperator& rho);

/// Relative entropy of coherence S(dephase(rho)) - S(rho).
double coherence(const DensityOperator& rho, const MeasurementBasis& basis);

struct BlochVector {
  double x = 0, y = 0, z = 0;

  BlochVector() = default;
  /// Throws ValidationError when the norm exceeds 1 + 1e-10.
  BlochVector(double x_, double y_, double z_);
  double norm() const;
};

DensityOperator bloch_to_density(const BlochVector& r);
/// Requires a qubit; throws DimensionError otherwise.
BlochVector density_to_bloch(const DensityOperator& rho);

/// Named states.
DensityOperator plus_state();
/// Uniform superposition of the computational basis, the first Fourier vector.
DensityOperator fourier_state(Eigen::Index d);

/// Haar-random unitary: Gram-Schmidt on a complex Ginibre matrix.
CMatrix random_unitary(Eigen::Index d, SeededRng& rng);
/// Projector onto a normalized complex-Gaussian ket.
DensityOperator random_pure(Eigen::Index d, SeededRng& rng);
/// G G^H / Tr(G G^H), i.e. the Hilbert-Schmidt measure.
DensityOperator random_mixed(Eigen::Index d, SeededRng& rng);
/// Hermitian matrix with eigenvalues uniform on [lo, hi] in a Haar-random basis.
Hermitian random_hermitian(Eigen::Index d, double lo, double hi, SeededRng& rng);

}  // namespace qscore
