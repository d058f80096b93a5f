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

#include "qscore/states.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qscore {

using namespace std::complex_literals;

double DensityOperator::purity() const { return eigenvalues().squaredNorm(); }

DensityOperator make_density(const CMatrix& m) {
  Hermitian h(m);
  const double trace = h.trace();
  if (std::abs(trace - 1.0) > kStateTolerance) {
    std::ostringstream msg;
    msg << "state trace is " << trace << ", expected 1 (tolerance " << kStateTolerance << ")";
    throw ValidationError(msg.str());
  }
  const double min_eig = h.eigenvalues()(0);
  if (min_eig < -kStateTolerance) {
    std::ostringstream msg;
    msg << "state is not positive semidefinite: min eigenvalue " << min_eig << " < -" << kStateTolerance;
    throw ValidationError(msg.str());
  }
  if (min_eig < 0.0) {
    Eigen::VectorXd clipped = h.eigenvalues().cwiseMax(0.0);
    clipped /= clipped.sum();
    return DensityOperator(Hermitian::from_spectrum(h.eigenvectors(), clipped));
  }
  return DensityOperator(std::move(h));
}

DensityOperator pure_state(const CVector& ket) {
  const CVector unit = ket.normalized();
  return make_density(unit * unit.adjoint());
}

DensityOperator maximally_mixed(Eigen::Index d) {
  return make_density(CMatrix::Identity(d, d) / static_cast<double>(d));
}

std::pair<DensityOperator, bool> floor_eigenvalues(const DensityOperator& rho, double eps) {
  const auto& lambda = rho.eigenvalues();
  if (lambda.minCoeff() >= eps) return {rho, false};
  Eigen::VectorXd lifted = lambda.cwiseMax(eps);
  lifted /= lifted.sum();
  return {make_density(from_spectrum<double>(rho.eigenvectors(), lifted)), true};
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  require_same_dim(rho.matrix(), sigma.matrix());
  const Hermitian diff(rho.matrix() - sigma.matrix());
  return 0.5 * diff.eigenvalues().cwiseAbs().sum();
}

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0.0, -1.0i, 1.0i, 0.0;
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

MeasurementBasis::MeasurementBasis(CMatrix vectors, std::string label)
    : vectors_(std::move(vectors)), label_(std::move(label)) {
  if (vectors_.rows() < 1 || vectors_.rows() != vectors_.cols())
    throw DimensionError("measurement basis must be a square matrix of column vectors");
  const double err = (vectors_.adjoint() * vectors_ - CMatrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  if (err > kStateTolerance) {
    std::ostringstream msg;
    msg << "measurement basis '" << label_ << "' is not orthonormal: max |U^H U - I| = " << err;
    throw ValidationError(msg.str());
  }
}

MeasurementBasis MeasurementBasis::computational(Eigen::Index d) {
  return MeasurementBasis(CMatrix::Identity(d, d), "Z");
}

MeasurementBasis MeasurementBasis::fourier(Eigen::Index d) {
  CMatrix f(d, d);
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = 0; k < d; ++k)
      f(j, k) = std::polar(norm, 2.0 * std::numbers::pi * static_cast<double>((j * k) % d) / static_cast<double>(d));
  return MeasurementBasis(f, "F");
}

MeasurementBasis MeasurementBasis::hadamard() {
  CMatrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return MeasurementBasis(h / std::sqrt(2.0), "X");
}

MeasurementBasis MeasurementBasis::circular() {
  CMatrix y(2, 2);
  y << 1.0, 1.0, 1.0i, -1.0i;
  return MeasurementBasis(y / std::sqrt(2.0), "Y");
}

MeasurementBasis MeasurementBasis::named(const std::string& name, Eigen::Index d) {
  if (name == "Z" || name == "computational") return computational(d);
  if (name == "F" || name == "fourier") return fourier(d);
  if (name == "X" || name == "hadamard" || name == "Y" || name == "circular") {
    if (d != 2) throw DimensionError("basis '" + name + "' is only defined for qubits");
    return (name == "X" || name == "hadamard") ? hadamard() : circular();
  }
  throw ValidationError("unknown basis name '" + name + "'");
}

MeasurementBasis MeasurementBasis::eigenbasis(const DensityOperator& rho) {
  return MeasurementBasis(rho.eigenvectors(), "eigen");
}

CMatrix MeasurementBasis::projector(Eigen::Index k) const {
  return vectors_.col(k) * vectors_.col(k).adjoint();
}

DensityOperator dephase(const DensityOperator& rho, const MeasurementBasis& basis) {
  require_same_dim(rho.matrix(), basis.vectors());
  const CMatrix& u = basis.vectors();
  const CMatrix in_basis = u.adjoint() * rho.matrix() * u;
  const CVector diag = in_basis.diagonal().real().cast<std::complex<double>>();
  return make_density(u * diag.asDiagonal() * u.adjoint());
}

double von_neumann_entropy(const DensityOperator& rho) {
  double s = 0.0;
  for (const double lambda : rho.eigenvalues())
    if (lambda > 0.0) s -= lambda * std::log(lambda);
  return s;
}

double coherence(const DensityOperator& rho, const MeasurementBasis& basis) {
  return std::max(0.0, von_neumann_entropy(dephase(rho, basis)) - von_neumann_entropy(rho));
}

BlochVector::BlochVector(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
  if (norm() > 1.0 + kStateTolerance) {
    std::ostringstream msg;
    msg << "Bloch vector norm " << norm() << " exceeds 1";
    throw ValidationError(msg.str());
  }
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

DensityOperator bloch_to_density(const BlochVector& r) {
  const CMatrix m = (CMatrix::Identity(2, 2) + r.x * pauli_x() + r.y * pauli_y() + r.z * pauli_z()) / 2.0;
  return make_density(m);
}

BlochVector density_to_bloch(const DensityOperator& rho) {
  if (rho.dim() != 2) throw DimensionError("Bloch representation requires a qubit state");
  const auto& m = rho.matrix();
  const auto component = [&](const CMatrix& sigma) { return std::real((m * sigma).trace()); };
  return BlochVector(component(pauli_x()), component(pauli_y()), component(pauli_z()));
}

DensityOperator plus_state() { return fourier_state(2); }

DensityOperator fourier_state(Eigen::Index d) {
  return pure_state(CVector::Ones(d));
}

CMatrix random_unitary(Eigen::Index d, SeededRng& rng) {
  CMatrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      g(i, j) = std::complex<double>(rng.normal(), rng.normal()) / std::sqrt(2.0);
  // Modified Gram-Schmidt; the implied R has a positive real diagonal, which is
  // the phase fixing that makes the result Haar distributed.
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      const std::complex<double> proj = g.col(k).dot(g.col(j));
      g.col(j) -= proj * g.col(k);
    }
    g.col(j).normalize();
  }
  return g;
}

DensityOperator random_pure(Eigen::Index d, SeededRng& rng) {
  CVector ket(d);
  for (Eigen::Index i = 0; i < d; ++i) ket(i) = std::complex<double>(rng.normal(), rng.normal());
  return pure_state(ket);
}

DensityOperator random_mixed(Eigen::Index d, SeededRng& rng) {
  CMatrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = std::complex<double>(rng.normal(), rng.normal());
  CMatrix w = g * g.adjoint();
  w /= std::real(w.trace());
  return make_density((w + w.adjoint()) / 2.0);
}

Hermitian random_hermitian(Eigen::Index d, double lo, double hi, SeededRng& rng) {
  const CMatrix u = random_unitary(d, rng);
  Eigen::VectorXd lambda(d);
  for (Eigen::Index i = 0; i < d; ++i) lambda(i) = lo + (hi - lo) * rng.uniform();
  return Hermitian::from_spectrum(u, lambda);
}

}  // namespace qscore
