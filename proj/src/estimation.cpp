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

#include "qscore/estimation.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace qscore {
namespace {

using namespace std::complex_literals;

constexpr double kPovmTolerance = 1e-10;
constexpr double kNegligibleProbability = 1e-12;
constexpr double kNegligibleSlope = 1e-9;

CMatrix dephase_operator(const CMatrix& m, const MeasurementBasis& basis) {
  const CMatrix& u = basis.vectors();
  const CVector diag = (u.adjoint() * m * u).diagonal().real().cast<std::complex<double>>();
  return u * diag.asDiagonal() * u.adjoint();
}

}  // namespace

ParametrizedFamily::ParametrizedFamily(std::string label, Eigen::Index dim, Eigen::Index n_params, StateMap state,
                                       TangentMap tangent)
    : label_(std::move(label)), dim_(dim), n_params_(n_params), state_(std::move(state)), tangent_(std::move(tangent)) {
  if (dim_ < 1 || n_params_ < 1) throw DimensionError("family '" + label_ + "' needs dim >= 1 and >= 1 parameter");
  if (!state_) throw ValidationError("family '" + label_ + "' has no state map");
}

void ParametrizedFamily::check_params(const Params& theta) const {
  if (theta.size() != n_params_) {
    std::ostringstream msg;
    msg << "family '" << label_ << "' takes " << n_params_ << " parameter(s), got " << theta.size();
    throw DimensionError(msg.str());
  }
}

DensityOperator ParametrizedFamily::state_at(const Params& theta) const {
  check_params(theta);
  DensityOperator rho = state_(theta);
  if (rho.dim() != dim_) throw DimensionError("family '" + label_ + "' produced a state of the wrong dimension");
  return rho;
}

std::vector<Hermitian> ParametrizedFamily::finite_difference_tangent(const Params& theta, double h) const {
  check_params(theta);
  std::vector<Hermitian> out;
  out.reserve(static_cast<std::size_t>(n_params_));
  for (Eigen::Index i = 0; i < n_params_; ++i) {
    Params up = theta, down = theta;
    up(i) += h;
    down(i) -= h;
    out.emplace_back(CMatrix((state_at(up).matrix() - state_at(down).matrix()) / (2.0 * h)));
  }
  return out;
}

std::vector<Hermitian> ParametrizedFamily::tangent_at(const Params& theta) const {
  check_params(theta);
  std::vector<Hermitian> out = tangent_ ? tangent_(theta) : finite_difference_tangent(theta);
  if (static_cast<Eigen::Index>(out.size()) != n_params_)
    throw DimensionError("family '" + label_ + "' returned the wrong number of tangents");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].dim() != dim_) throw DimensionError("family '" + label_ + "' tangent has the wrong dimension");
    if (std::abs(out[i].trace()) > kTangentTolerance) {
      std::ostringstream msg;
      msg << "family '" << label_ << "' tangent " << i << " has trace " << out[i].trace() << ", expected 0";
      throw ValidationError(msg.str());
    }
  }
  return out;
}

std::vector<CMatrix> gell_mann_basis(Eigen::Index d) {
  if (d < 2) throw DimensionError("Gell-Mann basis needs d >= 2");
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(d * d - 1));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      CMatrix s = CMatrix::Zero(d, d);
      s(j, k) = s(k, j) = 1.0;
      out.push_back(s);
    }
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      CMatrix a = CMatrix::Zero(d, d);
      a(j, k) = -1.0i;
      a(k, j) = 1.0i;
      out.push_back(a);
    }
  }
  for (Eigen::Index l = 1; l < d; ++l) {
    CMatrix z = CMatrix::Zero(d, d);
    const double scale = std::sqrt(2.0 / static_cast<double>(l * (l + 1)));
    for (Eigen::Index j = 0; j < l; ++j) z(j, j) = scale;
    z(l, l) = -scale * static_cast<double>(l);
    out.push_back(z);
  }
  return out;
}

ParametrizedFamily unitary_orbit(const DensityOperator& rho0, const Hermitian& generator, std::string label) {
  require_same_dim(rho0.matrix(), generator.matrix());
  const auto state = [rho0, generator](const Params& theta) {
    const CMatrix u = unitary_exp(generator, theta(0));
    return make_density(u * rho0.matrix() * u.adjoint());
  };
  const auto tangent = [state, generator](const Params& theta) {
    const CMatrix rho = state(theta).matrix();
    const CMatrix& g = generator.matrix();
    return std::vector<Hermitian>{Hermitian(CMatrix(-1.0i * (g * rho - rho * g)))};
  };
  return ParametrizedFamily(std::move(label), rho0.dim(), 1, state, tangent);
}

ParametrizedFamily bloch_rotation() {
  return unitary_orbit(plus_state(), Hermitian(CMatrix(pauli_z() / 2.0)), "bloch-rotation");
}

ParametrizedFamily diagonal_qubit() {
  const auto state = [](const Params& theta) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = theta(0);
    m(1, 1) = 1.0 - theta(0);
    return make_density(m);
  };
  const auto tangent = [](const Params&) { return std::vector<Hermitian>{Hermitian(CMatrix(pauli_z()))}; };
  return ParametrizedFamily("diagonal", 2, 1, state, tangent);
}

ParametrizedFamily bloch_circle(double radius) {
  if (!(radius >= 0.0 && radius <= 1.0)) throw ValidationError("Bloch circle radius must lie in [0, 1]");
  const auto state = [radius](const Params& theta) {
    return bloch_to_density(BlochVector(radius * std::cos(theta(0)), radius * std::sin(theta(0)), 0.0));
  };
  const auto tangent = [radius](const Params& theta) {
    const CMatrix t = radius * (-std::sin(theta(0)) * pauli_x() + std::cos(theta(0)) * pauli_y()) / 2.0;
    return std::vector<Hermitian>{Hermitian(t)};
  };
  return ParametrizedFamily("bloch-circle", 2, 1, state, tangent);
}

ParametrizedFamily bloch_ball() {
  const auto state = [](const Params& theta) { return bloch_to_density(BlochVector(theta(0), theta(1), theta(2))); };
  const auto tangent = [](const Params&) {
    return std::vector<Hermitian>{Hermitian(CMatrix(pauli_x() / 2.0)), Hermitian(CMatrix(pauli_y() / 2.0)),
                                  Hermitian(CMatrix(pauli_z() / 2.0))};
  };
  return ParametrizedFamily("bloch-ball", 2, 3, state, tangent);
}

ParametrizedFamily affine_chart(const DensityOperator& rho0) {
  const Eigen::Index d = rho0.dim();
  const std::vector<CMatrix> basis = gell_mann_basis(d);
  const auto state = [rho0, basis](const Params& theta) {
    CMatrix m = rho0.matrix();
    for (std::size_t a = 0; a < basis.size(); ++a) m += 0.5 * theta(static_cast<Eigen::Index>(a)) * basis[a];
    return make_density(m);
  };
  const auto tangent = [basis](const Params&) {
    std::vector<Hermitian> out;
    out.reserve(basis.size());
    for (const auto& b : basis) out.emplace_back(CMatrix(b / 2.0));
    return out;
  };
  return ParametrizedFamily("chart", d, d * d - 1, state, tangent);
}

ParametrizedFamily dephased(const ParametrizedFamily& family, const MeasurementBasis& basis) {
  if (basis.dim() != family.dim()) throw DimensionError("dephasing basis dimension does not match the family");
  const auto state = [family, basis](const Params& theta) { return dephase(family.state_at(theta), basis); };
  ParametrizedFamily::TangentMap tangent;
  if (family.has_analytic_tangent()) {
    tangent = [family, basis](const Params& theta) {
      std::vector<Hermitian> out;
      for (const auto& t : family.tangent_at(theta)) out.emplace_back(dephase_operator(t.matrix(), basis));
      return out;
    };
  }
  return ParametrizedFamily(family.label() + "/dephased-" + basis.label(), family.dim(), family.n_params(), state,
                            tangent);
}

ParametrizedFamily reparametrized(const ParametrizedFamily& family, const Eigen::MatrixXd& a) {
  if (a.rows() != family.n_params() || a.cols() != family.n_params())
    throw DimensionError("reparametrization matrix must be m x m");
  if (std::abs(a.determinant()) < 1e-12) throw SingularityError("reparametrization matrix is singular");
  const auto state = [family, a](const Params& theta) { return family.state_at(a * theta); };
  ParametrizedFamily::TangentMap tangent;
  if (family.has_analytic_tangent()) {
    tangent = [family, a](const Params& theta) {
      const std::vector<Hermitian> base = family.tangent_at(a * theta);
      std::vector<Hermitian> out;
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        CMatrix t = CMatrix::Zero(family.dim(), family.dim());
        for (Eigen::Index i = 0; i < a.rows(); ++i) t += a(i, j) * base[static_cast<std::size_t>(i)].matrix();
        out.emplace_back(t);
      }
      return out;
    };
  }
  return ParametrizedFamily(family.label() + "/reparametrized", family.dim(), family.n_params(), state, tangent);
}

Povm::Povm(std::vector<CMatrix> effects, std::vector<std::string> labels)
    : effects_(std::move(effects)), labels_(std::move(labels)) {
  if (effects_.empty()) throw ValidationError("POVM needs at least one effect");
  const Eigen::Index d = effects_.front().rows();
  if (labels_.empty())
    for (std::size_t k = 0; k < effects_.size(); ++k) labels_.push_back(std::to_string(k));
  if (labels_.size() != effects_.size()) throw ValidationError("POVM label count does not match effect count");
  CMatrix total = CMatrix::Zero(d, d);
  for (std::size_t k = 0; k < effects_.size(); ++k) {
    if (effects_[k].rows() != d || effects_[k].cols() != d) throw DimensionError("POVM effects differ in dimension");
    const Hermitian e(effects_[k]);
    if (e.eigenvalues()(0) < -kPovmTolerance) {
      std::ostringstream msg;
      msg << "POVM effect " << labels_[k] << " is not positive: min eigenvalue " << e.eigenvalues()(0);
      throw ValidationError(msg.str());
    }
    effects_[k] = e.matrix();
    total += effects_[k];
  }
  const double err = (total - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (err > kPovmTolerance) {
    std::ostringstream msg;
    msg << "POVM effects do not sum to the identity: max deviation " << err;
    throw ValidationError(msg.str());
  }
}

Povm Povm::from_basis(const MeasurementBasis& basis) {
  std::vector<CMatrix> effects;
  std::vector<std::string> labels;
  for (Eigen::Index k = 0; k < basis.dim(); ++k) {
    effects.push_back(basis.projector(k));
    labels.push_back(basis.label() + std::to_string(k));
  }
  return Povm(std::move(effects), std::move(labels));
}

Eigen::VectorXd povm_probabilities(const DensityOperator& rho, const Povm& povm) {
  if (rho.dim() != povm.dim()) throw DimensionError("POVM and state dimensions differ");
  Eigen::VectorXd p(static_cast<Eigen::Index>(povm.size()));
  for (std::size_t k = 0; k < povm.size(); ++k)
    p(static_cast<Eigen::Index>(k)) = std::max(0.0, std::real((povm.effects()[k] * rho.matrix()).trace()));
  return p / p.sum();
}

SldSet sld_operators(const ParametrizedFamily& family, const Params& theta, double eps_floor) {
  auto [state, floored] = floor_eigenvalues(family.state_at(theta), eps_floor);
  std::vector<Hermitian> tangents = family.tangent_at(theta);
  const auto& lambda = state.eigenvalues();
  const CMatrix& u = state.eigenvectors();
  const Eigen::Index d = state.dim();

  std::vector<Hermitian> sld;
  std::vector<CMatrix> rotated;
  sld.reserve(tangents.size());
  for (const auto& t : tangents) {
    CMatrix l = u.adjoint() * t.matrix() * u;
    l = (l + l.adjoint()) / 2.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) {
        const double denom = lambda(j) + lambda(k);
        if (denom < eps_floor) {
          std::ostringstream msg;
          msg << "SLD denominator lambda_" << j << " + lambda_" << k << " = " << denom << " is below the floor";
          throw SingularityError(msg.str());
        }
        l(j, k) *= 2.0 / denom;
      }
    }
    CMatrix back = u * l * u.adjoint();
    sld.emplace_back(CMatrix((back + back.adjoint()) / 2.0));
    rotated.push_back(std::move(l));
  }
  return SldSet{std::move(sld), std::move(rotated), std::move(state), std::move(tangents), floored};
}

double sld_residual(const SldSet& s) {
  double worst = 0.0;
  const CMatrix& rho = s.state.matrix();
  for (std::size_t i = 0; i < s.sld.size(); ++i) {
    const CMatrix& l = s.sld[i].matrix();
    const CMatrix r = s.tangents[i].matrix() - 0.5 * (rho * l + l * rho);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

Eigen::MatrixXd qfi_from_sld(const SldSet& s) {
  const auto m = static_cast<Eigen::Index>(s.sld_eigenbasis.size());
  const auto& lambda = s.state.eigenvalues();
  const Eigen::Index d = lambda.size();
  Eigen::MatrixXd qfi(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const CMatrix& li = s.sld_eigenbasis[static_cast<std::size_t>(i)];
      const CMatrix& lj = s.sld_eigenbasis[static_cast<std::size_t>(j)];
      double acc = 0.0;
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
          acc += 0.5 * (lambda(a) + lambda(b)) * std::real(std::conj(li(a, b)) * lj(a, b));
      qfi(i, j) = qfi(j, i) = acc;
    }
  }
  return qfi;
}

Eigen::MatrixXd qfi_matrix(const ParametrizedFamily& family, const Params& theta, double eps_floor) {
  return qfi_from_sld(sld_operators(family, theta, eps_floor));
}

Eigen::MatrixXd classical_fisher(const ParametrizedFamily& family, const Params& theta, const Povm& povm) {
  const Eigen::VectorXd p = povm_probabilities(family.state_at(theta), povm);
  const std::vector<Hermitian> tangents = family.tangent_at(theta);
  const Eigen::Index m = family.n_params();
  Eigen::MatrixXd cfi = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd dp(m);
  for (std::size_t k = 0; k < povm.size(); ++k) {
    for (Eigen::Index i = 0; i < m; ++i)
      dp(i) = std::real((povm.effects()[k] * tangents[static_cast<std::size_t>(i)].matrix()).trace());
    const double pk = p(static_cast<Eigen::Index>(k));
    if (pk < kNegligibleProbability) {
      for (Eigen::Index i = 0; i < m; ++i)
        if (std::abs(dp(i)) >= kNegligibleSlope) cfi(i, i) = std::numeric_limits<double>::infinity();
      continue;
    }
    cfi += dp * dp.transpose() / pk;
  }
  return cfi;
}

FisherReport fisher_report(const ParametrizedFamily& family, const Params& theta, const std::optional<Povm>& povm,
                           double eps_floor) {
  SldSet s = sld_operators(family, theta, eps_floor);
  FisherReport r;
  r.qfi = qfi_from_sld(s);
  if (povm) r.cfi = classical_fisher(family, theta, *povm);
  r.sld = std::move(s.sld);
  r.floored = s.floored;
  return r;
}

BoundMode bound_mode_from_name(const std::string& name) {
  if (name == "hessian") return BoundMode::Hessian;
  if (name == "f2diag") return BoundMode::F2Diag;
  throw ValidationError("unknown bound mode '" + name + "' (expected 'hessian' or 'f2diag')");
}

std::string bound_mode_name(BoundMode mode) { return mode == BoundMode::Hessian ? "hessian" : "f2diag"; }

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& m, const std::string& what) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double largest = ev(ev.size() - 1);
  const double threshold = largest / kMaxQfiCondition;
  if (largest <= 0.0 || ev(0) <= threshold) {
    std::ostringstream msg;
    msg << what << " is singular (condition number >= " << kMaxQfiCondition << "); null directions:";
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      if (ev(k) > threshold && largest > 0.0) continue;
      msg << " [";
      for (Eigen::Index i = 0; i < ev.size(); ++i) msg << (i ? ", " : "") << es.eigenvectors()(i, k);
      msg << "]";
    }
    throw SingularityError(msg.str());
  }
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

CrmcReport crmc_bound(const ParametrizedFamily& family, const Params& theta, const Generator& g, long n,
                      BoundMode mode, double eps_floor) {
  if (n < 1) throw ValidationError("copy count n must be >= 1");
  const SldSet s = sld_operators(family, theta, eps_floor);
  CrmcReport r;
  r.qfi = qfi_from_sld(s);
  r.floored = s.floored;

  const auto m = static_cast<Eigen::Index>(s.tangents.size());
  r.hessian.resize(m, m);
  const CMatrix& u = s.state.eigenvectors();
  const auto& lambda = s.state.eigenvalues();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const CMatrix& a = s.tangents[static_cast<std::size_t>(i)].matrix();
      const CMatrix& b = s.tangents[static_cast<std::size_t>(j)].matrix();
      double h = 0.0;
      if (mode == BoundMode::Hessian) {
        h = hessian_bilinear_form(s.state.op(), g.scalar(), a, b, eps_floor);
      } else {
        const CMatrix ra = u.adjoint() * a * u;
        const CMatrix rb = u.adjoint() * b * u;
        for (Eigen::Index k = 0; k < lambda.size(); ++k)
          h += g.scalar().curvature(lambda(k), eps_floor) * std::real(std::conj(ra(k, k)) * rb(k, k));
      }
      r.hessian(i, j) = r.hessian(j, i) = h;
    }
  }
  const Eigen::MatrixXd inv = checked_inverse(r.qfi, "quantum Fisher information");
  r.bound = (r.hessian * inv).trace() / (2.0 * static_cast<double>(n));
  return r;
}

}  // namespace qscore
