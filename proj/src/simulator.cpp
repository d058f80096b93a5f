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

#include "qscore/simulator.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>
#include <tuple>

namespace qscore {
namespace {

constexpr std::uint64_t kHaarBasisSeed = 0x5eedba5e5ULL;
constexpr double kRiskTolerance = 1e-9;

bool is_odd_prime(Eigen::Index d) {
  if (d < 3 || d % 2 == 0) return false;
  for (Eigen::Index k = 3; k * k <= d; k += 2)
    if (d % k == 0) return false;
  return true;
}

// Rows (basis b, outcome k), columns a: (1/2) Tr(P_bk l_a), so that the Born
// equations read p_bk - 1/d = A x for rho = I/d + (1/2) sum_a x_a l_a.
Eigen::MatrixXd design_matrix(const std::vector<MeasurementBasis>& bases, const std::vector<CMatrix>& gell_mann) {
  const Eigen::Index d = bases.front().dim();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(bases.size()) * d, static_cast<Eigen::Index>(gell_mann.size()));
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const CVector v = bases[b].vectors().col(k);
      for (std::size_t g = 0; g < gell_mann.size(); ++g)
        a(static_cast<Eigen::Index>(b) * d + k, static_cast<Eigen::Index>(g)) =
            0.5 * std::real(v.dot(gell_mann[g] * v));
    }
  }
  return a;
}

struct TomographyModel {
  std::vector<MeasurementBasis> bases;
  std::vector<CMatrix> gell_mann;
  Eigen::MatrixXd pinv;

  explicit TomographyModel(std::vector<MeasurementBasis> b) : bases(std::move(b)) {
    if (bases.empty()) throw ValidationError("tomography needs at least one basis");
    const Eigen::Index d = bases.front().dim();
    for (const auto& basis : bases)
      if (basis.dim() != d) throw DimensionError("tomography bases differ in dimension");
    gell_mann = gell_mann_basis(d);
    const Eigen::MatrixXd a = design_matrix(bases, gell_mann);
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    if (cod.rank() != a.cols()) {
      std::ostringstream msg;
      msg << "tomography bases are not informationally complete: rank " << cod.rank() << " < " << a.cols();
      throw ValidationError(msg.str());
    }
    pinv = cod.pseudoInverse();
  }

  EstimateResult estimate(const std::vector<Eigen::VectorXi>& counts, double alpha, double eps_est) const;
};

// Euclidean projection of a vector onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

EstimateResult TomographyModel::estimate(const std::vector<Eigen::VectorXi>& counts, double alpha,
                                         double eps_est) const {
  if (counts.size() != bases.size()) throw DimensionError("need one count vector per tomography basis");
  const Eigen::Index d = bases.front().dim();
  Eigen::VectorXd target(static_cast<Eigen::Index>(bases.size()) * d);
  for (std::size_t b = 0; b < bases.size(); ++b) {
    const Eigen::VectorXi& c = counts[b];
    if (c.size() != d) throw DimensionError("count vector length must equal the dimension");
    const long shots = c.sum();
    if (shots < 1) throw ValidationError("every tomography basis needs at least one copy");
    for (Eigen::Index k = 0; k < d; ++k)
      target(static_cast<Eigen::Index>(b) * d + k) =
          (c(k) + alpha) / (static_cast<double>(shots) + static_cast<double>(d) * alpha) - 1.0 / static_cast<double>(d);
  }
  Eigen::VectorXd x = pinv * target;

  bool clamped = false;
  if (d == 2 && x.norm() > 1.0) {
    x *= (1.0 - eps_est) / x.norm();
    clamped = true;
  }
  CMatrix m = CMatrix::Identity(d, d) / static_cast<double>(d);
  for (std::size_t a = 0; a < gell_mann.size(); ++a) m += 0.5 * x(static_cast<Eigen::Index>(a)) * gell_mann[a];
  const Hermitian raw(m);
  Eigen::VectorXd lambda = raw.eigenvalues();
  if (lambda(0) < 0.0) {
    lambda = project_to_simplex(lambda);
    clamped = true;
  }
  if (lambda.minCoeff() < eps_est) {
    lambda = lambda.cwiseMax(eps_est);
    clamped = true;
  }
  lambda /= lambda.sum();
  return EstimateResult{make_density(from_spectrum<double>(raw.eigenvectors(), lambda)), clamped};
}

std::vector<double> cumulative(const Eigen::VectorXd& p) {
  std::vector<double> cdf(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  Eigen::Index last = 0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    acc += p(k);
    cdf[static_cast<std::size_t>(k)] = acc;
    if (p(k) > 0.0) last = k;
  }
  // Close the distribution at the last outcome with positive mass so that
  // rounding in the partial sums can never select an impossible outcome.
  for (Eigen::Index k = last; k < p.size(); ++k) cdf[static_cast<std::size_t>(k)] = 1.0;
  return cdf;
}

Eigen::VectorXi draw_counts(const std::vector<double>& cdf, long shots, SeededRng& rng) {
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(cdf.size()));
  for (long s = 0; s < shots; ++s) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ++counts(static_cast<Eigen::Index>(it - cdf.begin()));
  }
  return counts;
}

// A strategy bound to a true state and copy count: bases, sampling
// distributions and the inversion model are computed once, outside the
// trial loop.
struct PreparedStrategy {
  StrategyKind kind;
  double alpha;
  std::vector<MeasurementBasis> bases;
  std::vector<std::vector<double>> cdfs;
  std::vector<long> shots;
  std::optional<TomographyModel> model;
};

PreparedStrategy prepare(const DensityOperator& rho, const Strategy& strategy, long n) {
  if (!(strategy.alpha > 0.0)) throw ValidationError("smoothing constant alpha must be > 0");
  PreparedStrategy p{strategy.kind, strategy.alpha, {}, {}, {}, std::nullopt};
  switch (strategy.kind) {
    case StrategyKind::ClassicalFixedBasis:
      if (!strategy.basis) throw ValidationError("classical strategy needs a measurement basis");
      if (strategy.basis->dim() != rho.dim()) throw DimensionError("strategy basis dimension does not match the state");
      p.bases.push_back(*strategy.basis);
      break;
    case StrategyKind::QuantumOracleBasis:
      p.bases.push_back(MeasurementBasis::eigenbasis(rho));
      break;
    case StrategyKind::QuantumPauliTomography:
      p.bases = tomography_bases(rho.dim());
      p.model.emplace(p.bases);
      break;
  }
  p.shots = allocate_copies(n, p.bases.size());
  for (const long s : p.shots)
    if (s < 1) throw ValidationError("copy count n is smaller than the number of measurement bases");
  for (const auto& b : p.bases) p.cdfs.push_back(cumulative(basis_probabilities(rho, b)));
  return p;
}

struct TrialOutcome {
  double risk = 0.0;
  bool clamped = false;
};

TrialOutcome run_trial(const DensityOperator& rho, const PreparedStrategy& p, const Generator& g, double eps_est,
                       double eps_floor, SeededRng& rng) {
  std::vector<Eigen::VectorXi> counts;
  counts.reserve(p.bases.size());
  for (std::size_t b = 0; b < p.bases.size(); ++b) counts.push_back(draw_counts(p.cdfs[b], p.shots[b], rng));

  TrialOutcome out;
  std::optional<DensityOperator> estimate;
  if (p.model) {
    EstimateResult r = p.model->estimate(counts, p.alpha, eps_est);
    estimate.emplace(std::move(r.state));
    out.clamped = r.clamped;
  } else {
    auto [floored, lifted] = floor_eigenvalues(classical_estimate(counts.front(), p.bases.front(), p.alpha), eps_est);
    estimate.emplace(std::move(floored));
    out.clamped = lifted;
  }
  const Divergence d = bregman_divergence(rho, *estimate, g, eps_floor);
  if (!d.is_finite()) throw DomainError("estimate does not support the true state; risk is infinite");
  out.risk = d.value();
  if (out.risk < -kRiskTolerance) {
    std::ostringstream msg;
    msg << "negative per-trial score gap " << out.risk << " violates properness";
    throw DomainError(msg.str());
  }
  return out;
}

// Run `body(t)` for t in [0, trials) on `threads` workers, each taking one
// contiguous block of trial indices.
void parallel_trials(long trials, int threads, const std::function<void(long)>& body) {
  const long workers = std::clamp<long>(threads, 1, std::max<long>(1, trials));
  if (workers == 1) {
    for (long t = 0; t < trials; ++t) body(t);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w) {
    const long begin = trials * w / workers, end = trials * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        for (long t = begin; t < end; ++t) body(t);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& xs) {
  const auto count = static_cast<double>(xs.size());
  double sum = 0.0;
  for (const double x : xs) sum += x;
  const double mean = sum / count;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (count - 1.0)) / std::sqrt(count)};
}

}  // namespace

Strategy Strategy::classical(MeasurementBasis basis, double alpha) {
  return Strategy{StrategyKind::ClassicalFixedBasis, std::move(basis), alpha};
}

Strategy Strategy::oracle(double alpha) { return Strategy{StrategyKind::QuantumOracleBasis, std::nullopt, alpha}; }

Strategy Strategy::tomography(double alpha) {
  return Strategy{StrategyKind::QuantumPauliTomography, std::nullopt, alpha};
}

std::string Strategy::name() const {
  switch (kind) {
    case StrategyKind::ClassicalFixedBasis:
      return "classical-fixed-basis";
    case StrategyKind::QuantumOracleBasis:
      return "quantum-oracle-basis";
    case StrategyKind::QuantumPauliTomography:
      return "quantum-pauli-tomography";
  }
  return "unknown";
}

Strategy strategy_from_name(const std::string& name, Eigen::Index d, const std::string& basis_name, double alpha) {
  if (name == "classical-fixed-basis" || name == "classical")
    return Strategy::classical(MeasurementBasis::named(basis_name, d), alpha);
  if (name == "quantum-oracle-basis" || name == "oracle") return Strategy::oracle(alpha);
  if (name == "quantum-pauli-tomography" || name == "tomography") return Strategy::tomography(alpha);
  throw ValidationError("unknown strategy '" + name + "'");
}

std::vector<long> allocate_copies(long n, std::size_t n_bases) {
  if (n < 1) throw ValidationError("copy count n must be >= 1");
  if (n_bases == 0) throw ValidationError("need at least one measurement basis");
  const long k = static_cast<long>(n_bases);
  std::vector<long> out(n_bases, n / k);
  for (long r = 0; r < n % k; ++r) ++out[static_cast<std::size_t>(r)];
  return out;
}

std::vector<MeasurementBasis> tomography_bases(Eigen::Index d) {
  if (d < 2) throw DimensionError("tomography needs d >= 2");
  if (d == 2) return {MeasurementBasis::hadamard(), MeasurementBasis::circular(), MeasurementBasis::computational(2)};

  std::vector<MeasurementBasis> bases{MeasurementBasis::computational(d)};
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  if (is_odd_prime(d)) {
    for (Eigen::Index b = 0; b < d; ++b) {
      CMatrix v(d, d);
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index k = 0; k < d; ++k)
          v(k, a) = std::polar(norm, 2.0 * std::numbers::pi * static_cast<double>((b * k * k + a * k) % d) /
                                         static_cast<double>(d));
      bases.emplace_back(v, "M" + std::to_string(b));
    }
  } else {
    bases.push_back(MeasurementBasis::fourier(d));
    SeededRng rng(kHaarBasisSeed, static_cast<std::uint64_t>(d));
    for (Eigen::Index b = 0; b + 1 < d; ++b) bases.emplace_back(random_unitary(d, rng), "H" + std::to_string(b));
  }
  return bases;
}

Eigen::VectorXd basis_probabilities(const DensityOperator& rho, const MeasurementBasis& basis) {
  require_same_dim(rho.matrix(), basis.vectors());
  const CMatrix& u = basis.vectors();
  Eigen::VectorXd p(u.cols());
  for (Eigen::Index k = 0; k < u.cols(); ++k) p(k) = std::max(0.0, std::real(u.col(k).dot(rho.matrix() * u.col(k))));
  return p / p.sum();
}

Eigen::VectorXi sample_outcomes(const DensityOperator& rho, const MeasurementBasis& basis, long shots,
                                SeededRng& rng) {
  if (shots < 0) throw ValidationError("shot count must be >= 0");
  return draw_counts(cumulative(basis_probabilities(rho, basis)), shots, rng);
}

DensityOperator classical_estimate(const Eigen::VectorXi& counts, const MeasurementBasis& basis, double alpha) {
  if (counts.size() != basis.dim()) throw DimensionError("count vector length must equal the basis dimension");
  if (!(alpha > 0.0)) throw ValidationError("smoothing constant alpha must be > 0");
  const long shots = counts.sum();
  if (shots < 1) throw ValidationError("classical estimate needs at least one shot");
  const double denom = static_cast<double>(shots) + static_cast<double>(basis.dim()) * alpha;
  const Eigen::VectorXd q = (counts.cast<double>().array() + alpha) / denom;
  return make_density(from_spectrum<double>(basis.vectors(), q));
}

EstimateResult linear_inversion_estimate(const std::vector<MeasurementBasis>& bases,
                                         const std::vector<Eigen::VectorXi>& counts, double alpha, double eps_est) {
  return TomographyModel(bases).estimate(counts, alpha, eps_est);
}

EstimateResult pauli_tomography_estimate(const Eigen::VectorXi& x_counts, const Eigen::VectorXi& y_counts,
                                         const Eigen::VectorXi& z_counts, double alpha, double eps_est) {
  return linear_inversion_estimate(tomography_bases(2), {x_counts, y_counts, z_counts}, alpha, eps_est);
}

RiskReport estimate_risk(const DensityOperator& rho, const Strategy& strategy, const Generator& g, long n,
                         long trials, std::uint64_t seed, const SimulationOptions& options) {
  if (n < 1) throw ValidationError("copy count n must be >= 1");
  if (trials < 1) throw ValidationError("trial count must be >= 1");
  const PreparedStrategy prepared = prepare(rho, strategy, n);
  const double eps_est = options.estimate_floor(n);

  std::vector<double> risks(static_cast<std::size_t>(trials));
  std::vector<char> clamped(static_cast<std::size_t>(trials), 0);
  parallel_trials(trials, options.threads, [&](long t) {
    SeededRng rng(seed, static_cast<std::uint64_t>(t));
    const TrialOutcome o = run_trial(rho, prepared, g, eps_est, options.eps_floor, rng);
    risks[static_cast<std::size_t>(t)] = o.risk;
    clamped[static_cast<std::size_t>(t)] = o.clamped ? 1 : 0;
  });

  RiskReport r;
  std::tie(r.risk_mean, r.risk_stderr) = mean_and_stderr(risks);
  r.n = n;
  r.trials = trials;
  r.strategy = strategy.name();
  r.generator = g.name();
  r.clamp_events = std::count(clamped.begin(), clamped.end(), 1);
  r.per_trial = std::move(risks);
  return r;
}

GapReport forecasting_gap(const DensityOperator& rho, const Generator& g, long n, long trials, std::uint64_t seed,
                          const Strategy& classical, const Strategy& quantum, const SimulationOptions& options) {
  if (classical.kind != StrategyKind::ClassicalFixedBasis || !classical.basis)
    throw ValidationError("the classical side of a forecasting gap must be a fixed-basis strategy");
  GapReport r;
  r.classical = estimate_risk(rho, classical, g, n, trials, seed, options);
  r.quantum = estimate_risk(rho, quantum, g, n, trials, seed, options);
  r.gap_mean = r.classical.risk_mean - r.quantum.risk_mean;

  std::vector<double> diffs(static_cast<std::size_t>(trials));
  for (std::size_t t = 0; t < diffs.size(); ++t) diffs[t] = r.classical.per_trial[t] - r.quantum.per_trial[t];
  r.gap_stderr = mean_and_stderr(diffs).second;
  r.unpaired_stderr = std::hypot(r.classical.risk_stderr, r.quantum.risk_stderr);
  r.coherence = coherence(rho, *classical.basis);
  r.predicted_gap = r.coherence / static_cast<double>(n);
  r.n = n;
  r.trials = trials;
  return r;
}

long default_trials(Eigen::Index d) { return d == 2 ? 2000 : 500; }

std::vector<ScalingRow> scaling_study(const std::vector<Eigen::Index>& dims, const std::vector<long>& ns,
                                      const Generator& g, long trials, std::uint64_t seed,
                                      const SimulationOptions& options) {
  if (dims.empty() || ns.empty()) throw ValidationError("scaling study needs at least one dimension and one n");
  for (const auto d : dims)
    if (d < 2 || d > 6) throw ValidationError("scaling study dimensions must lie in {2, ..., 6}");
  if (!std::is_sorted(ns.begin(), ns.end())) throw ValidationError("scaling study n values must be ascending");

  std::vector<ScalingRow> rows;
  for (const auto d : dims) {
    const DensityOperator rho = fourier_state(d);
    const Strategy classical = Strategy::classical(MeasurementBasis::computational(d), options.alpha);
    const Strategy quantum = Strategy::oracle(options.alpha);
    const ParametrizedFamily chart = affine_chart(rho);
    const long t = trials > 0 ? trials : default_trials(d);
    for (const long n : ns) {
      const GapReport gap = forecasting_gap(rho, g, n, t, seed, classical, quantum, options);
      ScalingRow row;
      row.d = d;
      row.n = n;
      row.generator = g.name();
      row.classical_risk = gap.classical.risk_mean;
      row.classical_stderr = gap.classical.risk_stderr;
      row.quantum_risk = gap.quantum.risk_mean;
      row.quantum_stderr = gap.quantum.risk_stderr;
      row.gap = gap.gap_mean;
      row.gap_stderr = gap.gap_stderr;
      row.coherence = gap.coherence;
      row.predicted_gap = gap.predicted_gap;
      row.crmc_bound =
          crmc_bound(chart, Params::Zero(chart.n_params()), g, n, BoundMode::Hessian, options.eps_floor).bound;
      row.clamp_events = gap.classical.clamp_events + gap.quantum.clamp_events;
      row.seed = seed;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace qscore
