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

/// \file hermitian.hpp
/// Dense complex Hermitian matrices and their functional calculus.
///
/// Everything here is templated on the real scalar type and works with plain
/// Eigen dynamic matrices. A HermitianMatrix carries its spectral
/// decomposition, computed once at construction by cyclic Jacobi sweeps, so
/// every functional-calculus operation below is a cheap re-weighting of the
/// cached eigenvectors.
///
/// Functions singular at zero (t log t, log t, ...) are evaluated with a floor:
/// eigenvalues below \c eps_floor are lifted to \c eps_floor, except that an
/// eigenvalue within 1e-14 of zero first tries the exact value at zero (this is
/// how 0 log 0 = 0 comes out exactly).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qscore/errors.hpp"

namespace qscore {

template <typename Real>
using Complex = std::complex<Real>;
template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kDegeneracyThreshold = 1e-8;
inline constexpr double kDefaultFloor = 1e-10;
inline constexpr double kExactZero = 1e-14;
inline constexpr double kPhaseTolerance = 1e-12;
inline constexpr double kDomainSlack = 1e-10;
inline constexpr double kJacobiTolerance = 1e-14;
inline constexpr int kJacobiMaxSweeps = 100;

template <typename Real>
struct EigenSystem {
  RealVector<Real> values;         // ascending
  ComplexMatrix<Real> vectors;     // columns, unitary
};

/// Largest |m(i,j) - conj(m(j,i))| over all entries.
template <typename Real>
Real max_asymmetry(const ComplexMatrix<Real>& m) {
  Real worst = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j)
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

namespace detail {

template <typename Real>
Real off_diagonal_norm(const ComplexMatrix<Real>& a) {
  Real s = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// Rotate rows/columns p and q of `a` by the 2x2 unitary g, i.e. a <- G^H a G,
// and accumulate v <- v G.
template <typename Real>
void apply_rotation(ComplexMatrix<Real>& a, ComplexMatrix<Real>& v, Eigen::Index p, Eigen::Index q,
                    const Complex<Real> (&g)[2][2]) {
  const Eigen::Index d = a.rows();
  for (Eigen::Index k = 0; k < d; ++k) {
    const Complex<Real> akp = a(k, p), akq = a(k, q);
    a(k, p) = akp * g[0][0] + akq * g[1][0];
    a(k, q) = akp * g[0][1] + akq * g[1][1];
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    const Complex<Real> apk = a(p, k), aqk = a(q, k);
    a(p, k) = std::conj(g[0][0]) * apk + std::conj(g[1][0]) * aqk;
    a(q, k) = std::conj(g[0][1]) * apk + std::conj(g[1][1]) * aqk;
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    const Complex<Real> vkp = v(k, p), vkq = v(k, q);
    v(k, p) = vkp * g[0][0] + vkq * g[1][0];
    v(k, q) = vkp * g[0][1] + vkq * g[1][1];
  }
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for a complex Hermitian matrix.
///
/// Each rotation first removes the phase of a(p,q) and then applies the real
/// symmetric Jacobi rotation that annihilates it. Sweeps run in fixed
/// row-major (p < q) order until the off-diagonal Frobenius mass drops below
/// 1e-14 * ||a||_F. Eigenvalues are returned ascending, and each eigenvector
/// has its first non-negligible component real and positive.
template <typename Real>
EigenSystem<Real> jacobi_eigensolver(ComplexMatrix<Real> a) {
  const Eigen::Index d = a.rows();
  ComplexMatrix<Real> v = ComplexMatrix<Real>::Identity(d, d);
  const Real scale = a.norm();
  const Real target = Real(kJacobiTolerance) * scale;

  bool converged = false;
  for (int sweep = 0; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (detail::off_diagonal_norm(a) <= target) {
      converged = true;
      break;
    }
    if (sweep == kJacobiMaxSweeps) break;
    for (Eigen::Index p = 0; p < d - 1; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        const Complex<Real> apq = a(p, q);
        const Real r = std::abs(apq);
        if (r == Real(0)) continue;
        const Complex<Real> phase = apq / r;
        const Real app = std::real(a(p, p));
        const Real aqq = std::real(a(q, q));
        const Real theta = (aqq - app) / (Real(2) * r);
        Real t;
        if (std::abs(theta) > Real(1e150)) {
          t = Real(1) / (Real(2) * theta);
        } else {
          t = (theta >= 0 ? Real(1) : Real(-1)) / (std::abs(theta) + std::sqrt(theta * theta + Real(1)));
        }
        const Real c = Real(1) / std::sqrt(t * t + Real(1));
        const Real s = t * c;
        const Complex<Real> g[2][2] = {{Complex<Real>(c), Complex<Real>(s)},
                                       {-s * std::conj(phase), c * std::conj(phase)}};
        detail::apply_rotation(a, v, p, q, g);
        a(p, q) = a(q, p) = Complex<Real>(0);
        a(p, p) = Complex<Real>(std::real(a(p, p)));
        a(q, q) = Complex<Real>(std::real(a(q, q)));
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Jacobi eigensolver did not converge in " << kJacobiMaxSweeps
        << " sweeps (off-diagonal mass " << detail::off_diagonal_norm(a) << ")";
    throw ConvergenceError(msg.str());
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return std::real(a(i, i)) < std::real(a(j, j));
  });

  EigenSystem<Real> out;
  out.values.resize(d);
  out.vectors.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = std::real(a(src, src));
    auto col = v.col(src);
    for (Eigen::Index i = 0; i < d; ++i) {
      const Real mag = std::abs(col(i));
      if (mag > Real(kPhaseTolerance)) {
        const Complex<Real> fix = std::conj(col(i)) / mag;
        out.vectors.col(k) = col * fix;
        out.vectors(i, k) = Complex<Real>(mag);
        break;
      }
    }
  }
  return out;
}

/// U diag(values) U^H
template <typename Real, typename Derived>
ComplexMatrix<Real> from_spectrum(const ComplexMatrix<Real>& u, const Eigen::MatrixBase<Derived>& values) {
  return u * values.template cast<Complex<Real>>().asDiagonal() * u.adjoint();
}

/// A validated complex Hermitian matrix with its eigendecomposition.
///
/// Construction checks max|m - m^H| <= 1e-10 (1 + max|m_ij|), replaces the
/// input by its exact Hermitian part, and diagonalizes it. The object is
/// immutable afterwards.
template <typename Real>
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const ComplexMatrix<Real>& m) {
    if (m.rows() < 1 || m.rows() != m.cols()) {
      std::ostringstream msg;
      msg << "Hermitian matrix must be square with dim >= 1, got " << m.rows() << "x" << m.cols();
      throw DimensionError(msg.str());
    }
    const Real asym = max_asymmetry(m);
    const Real entry_scale = m.cwiseAbs().maxCoeff();
    if (!(asym <= Real(kHermiticityTolerance) * (Real(1) + entry_scale))) {
      std::ostringstream msg;
      msg << "matrix is not Hermitian: max asymmetry " << asym;
      throw ValidationError(msg.str());
    }
    matrix_ = (m + m.adjoint()) / Real(2);
    eigen_ = jacobi_eigensolver<Real>(matrix_);
  }

  template <typename Derived>
  static HermitianMatrix from_spectrum(const ComplexMatrix<Real>& u, const Eigen::MatrixBase<Derived>& values) {
    return HermitianMatrix(qscore::from_spectrum<Real>(u, values));
  }

  static HermitianMatrix identity(Eigen::Index d) {
    return HermitianMatrix(ComplexMatrix<Real>::Identity(d, d));
  }

  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix<Real>& matrix() const { return matrix_; }
  const RealVector<Real>& eigenvalues() const { return eigen_.values; }
  const ComplexMatrix<Real>& eigenvectors() const { return eigen_.vectors; }
  const EigenSystem<Real>& eigensystem() const { return eigen_; }
  Real trace() const { return std::real(matrix_.trace()); }

 private:
  ComplexMatrix<Real> matrix_;
  EigenSystem<Real> eigen_;
};

template <typename Real>
const EigenSystem<Real>& eigendecompose(const HermitianMatrix<Real>& h) {
  return h.eigensystem();
}

/// A real function with its first two derivatives and a closed domain.
///
/// Infinite domain ends are allowed. When \c singular_at_zero is set the
/// evaluation helpers apply the eigenvalue floor described in the file
/// comment; otherwise arguments within kDomainSlack of the domain are clamped
/// onto it.
template <typename Real>
struct ScalarFunction {
  using Map = std::function<Real(Real)>;

  Map f;
  Map fprime;
  Map fsecond;
  Real lower = -std::numeric_limits<Real>::infinity();
  Real upper = std::numeric_limits<Real>::infinity();
  bool singular_at_zero = false;

  /// Argument actually fed to the maps after the floor / clamp policy.
  Real regularize(Real x, Real eps_floor) const {
    if (!(x >= lower - Real(kDomainSlack) && x <= upper + Real(kDomainSlack))) {
      std::ostringstream msg;
      msg << "argument " << x << " outside function domain [" << lower << ", " << upper << "]";
      throw DomainError(msg.str());
    }
    if (singular_at_zero && x < eps_floor) x = std::max(eps_floor, lower);
    return std::clamp(x, lower, upper);
  }

  Real value(Real x, Real eps_floor = Real(kDefaultFloor)) const { return eval(f, x, eps_floor); }
  Real slope(Real x, Real eps_floor = Real(kDefaultFloor)) const { return eval(fprime, x, eps_floor); }
  Real curvature(Real x, Real eps_floor = Real(kDefaultFloor)) const { return eval(fsecond, x, eps_floor); }

  /// The function x -> f'(x), with f'' as its derivative. Its own second
  /// derivative is left empty.
  ScalarFunction derivative() const {
    ScalarFunction d;
    d.f = fprime;
    d.fprime = fsecond;
    d.lower = lower;
    d.upper = upper;
    d.singular_at_zero = singular_at_zero;
    return d;
  }

 private:
  Real eval(const Map& g, Real x, Real eps_floor) const {
    if (!g) throw DomainError("scalar function component is not defined");
    if (singular_at_zero && std::abs(x) <= Real(kExactZero)) {
      const Real at_zero = g(Real(0));
      if (std::isfinite(at_zero)) return at_zero;
    }
    return g(regularize(x, eps_floor));
  }
};

/// Check f' and f'' against central differences of f and f' at `samples`
/// interior points. Relative error uses max(1, |exact|) as denominator.
template <typename Real>
bool derivatives_consistent(const ScalarFunction<Real>& sf, int samples = 100, Real tolerance = Real(1e-6)) {
  const Real lo = std::isfinite(sf.lower) ? sf.lower : (std::isfinite(sf.upper) ? sf.upper - 1 : Real(-1));
  const Real hi = std::isfinite(sf.upper) ? sf.upper : lo + 1;
  const Real width = hi - lo;
  for (int k = 0; k < samples; ++k) {
    const Real x = lo + width * (Real(0.05) + Real(0.9) * Real(k) / Real(std::max(samples - 1, 1)));
    const Real h = Real(1e-5) * std::max(Real(1e-2), std::abs(x));
    const Real fd1 = (sf.f(x + h) - sf.f(x - h)) / (2 * h);
    const Real fd2 = (sf.fprime(x + h) - sf.fprime(x - h)) / (2 * h);
    const Real e1 = sf.fprime(x), e2 = sf.fsecond(x);
    if (std::abs(fd1 - e1) > tolerance * std::max(Real(1), std::abs(e1))) return false;
    if (std::abs(fd2 - e2) > tolerance * std::max(Real(1), std::abs(e2))) return false;
  }
  return true;
}

/// U diag(f(lambda_i)) U^H
template <typename Real>
HermitianMatrix<Real> apply_function(const HermitianMatrix<Real>& h, const ScalarFunction<Real>& sf,
                                     Real eps_floor = Real(kDefaultFloor)) {
  const auto& lambda = h.eigenvalues();
  RealVector<Real> mapped(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) mapped(i) = sf.value(lambda(i), eps_floor);
  return HermitianMatrix<Real>::from_spectrum(h.eigenvectors(), mapped);
}

/// Matrix of first divided differences f^[1](lambda_i, lambda_j).
///
/// Gaps of at most 1e-8 use f' at the midpoint. Eigenvalues are regularized
/// (floored for functions singular at zero) before differencing.
template <typename Real, typename Derived>
RealMatrix<Real> divided_difference_first(const Eigen::MatrixBase<Derived>& eigenvalues,
                                          const ScalarFunction<Real>& sf,
                                          Real eps_floor = Real(kDefaultFloor)) {
  const Eigen::Index d = eigenvalues.size();
  RealVector<Real> x(d), fx(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    x(i) = sf.regularize(eigenvalues(i), eps_floor);
    fx(i) = sf.f(x(i));
  }
  RealMatrix<Real> dd(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const Real gap = x(i) - x(j);
      const Real v = std::abs(gap) > Real(kDegeneracyThreshold)
                         ? (fx(i) - fx(j)) / gap
                         : sf.fprime((x(i) + x(j)) / Real(2));
      dd(i, j) = dd(j, i) = v;
    }
  }
  return dd;
}

template <typename Real>
void require_same_dim(const ComplexMatrix<Real>& a, const ComplexMatrix<Real>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
    throw DimensionError(msg.str());
  }
}

/// Tr(A^H B)
template <typename Real>
Complex<Real> hs_inner(const ComplexMatrix<Real>& a, const ComplexMatrix<Real>& b) {
  require_same_dim(a, b);
  return (a.adjoint() * b).trace();
}

/// D Tr f(h) [direction] = Tr(U (f^[1] o U^H H U) U^H).
template <typename Real>
Real directional_derivative_trace(const HermitianMatrix<Real>& h, const ScalarFunction<Real>& sf,
                                  const HermitianMatrix<Real>& direction,
                                  Real eps_floor = Real(kDefaultFloor)) {
  require_same_dim(h.matrix(), direction.matrix());
  const auto& u = h.eigenvectors();
  const ComplexMatrix<Real> rotated = u.adjoint() * direction.matrix() * u;
  const RealMatrix<Real> dd = divided_difference_first(h.eigenvalues(), sf, eps_floor);
  const ComplexMatrix<Real> weighted = dd.template cast<Complex<Real>>().cwiseProduct(rotated);
  return std::real((u * weighted * u.adjoint()).trace());
}

/// Second variation of Tr f at h, polarized:
///   sum_ij (f')^[1](lambda_i, lambda_j) Re(conj(A_ij) B_ij)
/// with A, B expressed in the eigenbasis of h.
template <typename Real>
Real hessian_bilinear_form(const HermitianMatrix<Real>& h, const ScalarFunction<Real>& sf,
                           const ComplexMatrix<Real>& a, const ComplexMatrix<Real>& b,
                           Real eps_floor = Real(kDefaultFloor)) {
  require_same_dim(h.matrix(), a);
  require_same_dim(h.matrix(), b);
  const auto& u = h.eigenvectors();
  const ComplexMatrix<Real> ra = u.adjoint() * a * u;
  const ComplexMatrix<Real> rb = u.adjoint() * b * u;
  const RealMatrix<Real> kernel = divided_difference_first(h.eigenvalues(), sf.derivative(), eps_floor);
  Real acc = 0;
  for (Eigen::Index i = 0; i < kernel.rows(); ++i)
    for (Eigen::Index j = 0; j < kernel.cols(); ++j)
      acc += kernel(i, j) * std::real(std::conj(ra(i, j)) * rb(i, j));
  return acc;
}

/// d^2/dt^2 Tr f(h + t H) at t = 0.
template <typename Real>
Real hessian_quadratic_form(const HermitianMatrix<Real>& h, const ScalarFunction<Real>& sf,
                            const HermitianMatrix<Real>& direction, Real eps_floor = Real(kDefaultFloor)) {
  return hessian_bilinear_form(h, sf, direction.matrix(), direction.matrix(), eps_floor);
}

/// exp(-i t h)
template <typename Real>
ComplexMatrix<Real> unitary_exp(const HermitianMatrix<Real>& h, Real t) {
  const auto& lambda = h.eigenvalues();
  Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1> phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) phases(i) = std::polar(Real(1), -t * lambda(i));
  const auto& u = h.eigenvectors();
  return u * phases.asDiagonal() * u.adjoint();
}

}  // namespace qscore
