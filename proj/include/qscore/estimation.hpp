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

/// \file estimation.hpp
/// Parametrized state families, symmetric logarithmic derivatives, quantum and
/// classical Fisher information, and the Cramer-Rao-McCarthy bound
///
///   R_n >= Tr(Hess V(theta) I(theta)^{-1}) / (2n),
///
/// where Hess V is the parameter-space Hessian of V(rho_theta) = Tr f(rho_theta)
/// and I is the SLD quantum Fisher information matrix.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qscore/scoring.hpp"

namespace qscore {

inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kTangentTolerance = 1e-8;
inline constexpr double kMaxQfiCondition = 1e12;

using Params = Eigen::VectorXd;

/// A smooth map theta in R^m -> density operators on C^d.
///
/// Both maps must be reentrant. Without an analytic tangent map the tangents
/// are central finite differences with step 1e-5.
class ParametrizedFamily {
 public:
  using StateMap = std::function<DensityOperator(const Params&)>;
  using TangentMap = std::function<std::vector<Hermitian>(const Params&)>;

  ParametrizedFamily(std::string label, Eigen::Index dim, Eigen::Index n_params, StateMap state,
                     TangentMap tangent = {});

  const std::string& label() const { return label_; }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index n_params() const { return n_params_; }
  bool has_analytic_tangent() const { return static_cast<bool>(tangent_); }

  DensityOperator state_at(const Params& theta) const;
  /// Analytic tangents when available, else finite differences. Each tangent
  /// is checked to be traceless within 1e-8.
  std::vector<Hermitian> tangent_at(const Params& theta) const;
  std::vector<Hermitian> finite_difference_tangent(const Params& theta, double h = kFiniteDifferenceStep) const;

 private:
  void check_params(const Params& theta) const;

  std::string label_;
  Eigen::Index dim_;
  Eigen::Index n_params_;
  StateMap state_;
  TangentMap tangent_;
};

/// Generalized Gell-Mann matrices: d^2 - 1 traceless Hermitian matrices with
/// Tr(l_a l_b) = 2 delta_ab (symmetric, antisymmetric, then diagonal).
std::vector<CMatrix> gell_mann_basis(Eigen::Index d);

/// rho(theta) = exp(-i theta G) rho0 exp(i theta G), one parameter.
ParametrizedFamily unitary_orbit(const DensityOperator& rho0, const Hermitian& generator, std::string label);
/// |+><+| rotated in the equatorial plane, exp(-i theta sigma_z / 2): Bloch
/// vector (cos theta, sin theta, 0), tangent sigma_y / 2 and SLD sigma_y at 0.
ParametrizedFamily bloch_rotation();
/// diag(theta, 1 - theta).
ParametrizedFamily diagonal_qubit();
/// Bloch vector (r cos theta, r sin theta, 0).
ParametrizedFamily bloch_circle(double radius);
/// (I + theta . sigma) / 2 with three parameters.
ParametrizedFamily bloch_ball();
/// rho0 + (1/2) sum_a theta_a l_a over the Gell-Mann basis (d^2 - 1 parameters).
ParametrizedFamily affine_chart(const DensityOperator& rho0);
/// The family followed by complete dephasing in `basis`.
ParametrizedFamily dephased(const ParametrizedFamily& family, const MeasurementBasis& basis);
/// theta' -> rho(A theta'), for an invertible m x m matrix A.
ParametrizedFamily reparametrized(const ParametrizedFamily& family, const Eigen::MatrixXd& a);

/// A positive operator-valued measure.
class Povm {
 public:
  /// Validates sum E_k = I within 1e-10 and E_k >= -1e-10.
  explicit Povm(std::vector<CMatrix> effects, std::vector<std::string> labels = {});
  static Povm from_basis(const MeasurementBasis& basis);

  const std::vector<CMatrix>& effects() const { return effects_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return effects_.size(); }
  Eigen::Index dim() const { return effects_.front().rows(); }

 private:
  std::vector<CMatrix> effects_;
  std::vector<std::string> labels_;
};

/// Born probabilities Tr(E_k rho), clipped at zero and renormalized.
Eigen::VectorXd povm_probabilities(const DensityOperator& rho, const Povm& povm);

struct SldSet {
  std::vector<Hermitian> sld;
  /// The same operators in the eigenbasis of `state`, as solved.
  std::vector<CMatrix> sld_eigenbasis;
  /// The state the SLD equation was solved for (eigenvalue-floored).
  DensityOperator state;
  std::vector<Hermitian> tangents;
  /// True when the floor lifted an eigenvalue (pure-state results are then
  /// regularized limits).
  bool floored = false;
};

/// Solve d_i rho = (rho L_i + L_i rho) / 2 in the eigenbasis of the floored state.
SldSet sld_operators(const ParametrizedFamily& family, const Params& theta, double eps_floor = kDefaultFloor);

/// max_i max|d_i rho - (rho L_i + L_i rho)/2| for a solved SLD set.
double sld_residual(const SldSet& s);

/// I_ij = Re Tr(rho (L_i L_j + L_j L_i) / 2), evaluated in the eigenbasis as
/// sum_jk (lambda_j + lambda_k)/2 Re(conj(L_i)_jk (L_j)_jk). Near-pure states
/// have SLD entries of order 1/eps_floor, and the basis-free trace would lose
/// all precision to cancellation.
Eigen::MatrixXd qfi_from_sld(const SldSet& s);
Eigen::MatrixXd qfi_matrix(const ParametrizedFamily& family, const Params& theta, double eps_floor = kDefaultFloor);

/// sum_k (d p_k)(d p_k)^T / p_k. Outcomes with p_k < 1e-12 are skipped when
/// |d p_k| < 1e-9 and otherwise make the affected diagonal entries +inf.
Eigen::MatrixXd classical_fisher(const ParametrizedFamily& family, const Params& theta, const Povm& povm);

struct FisherReport {
  Eigen::MatrixXd qfi;
  std::optional<Eigen::MatrixXd> cfi;
  std::vector<Hermitian> sld;
  bool floored = false;
};

FisherReport fisher_report(const ParametrizedFamily& family, const Params& theta,
                           const std::optional<Povm>& povm = std::nullopt, double eps_floor = kDefaultFloor);

enum class BoundMode {
  /// Full parameter-space Hessian of V through the Daleckii-Krein kernel.
  Hessian,
  /// Only the eigenbasis-diagonal terms f''(lambda_k) |(d_i rho)_kk|^2.
  F2Diag,
};

BoundMode bound_mode_from_name(const std::string& name);
std::string bound_mode_name(BoundMode mode);

struct CrmcReport {
  double bound = 0.0;
  Eigen::MatrixXd hessian;
  Eigen::MatrixXd qfi;
  bool floored = false;
};

/// Tr(H I^{-1}) / (2n). Throws SingularityError, naming the null directions,
/// when the QFI condition number reaches 1e12.
CrmcReport crmc_bound(const ParametrizedFamily& family, const Params& theta, const Generator& g, long n,
                      BoundMode mode = BoundMode::Hessian, double eps_floor = kDefaultFloor);

/// Inverse of a symmetric positive definite parameter-space matrix, with the
/// conditioning check used by crmc_bound.
Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& m, const std::string& what);

}  // namespace qscore
