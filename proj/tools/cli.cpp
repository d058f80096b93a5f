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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "qscore/simulator.hpp"

namespace qscore::cli {
namespace {

using json = nlohmann::ordered_json;

/// Exit status 2: the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exit status 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration keys

enum class Kind { String, Real, Integer, Unsigned, IntList, RealList, State };

struct KeySpec {
  const char* key;
  Kind kind;
  json fallback;
  const char* help;
};

// Key order here is the order of the configuration echo.
const std::vector<std::pair<std::string, std::vector<KeySpec>>>& command_table() {
  static const auto* table = [] {
    const KeySpec state{"state", Kind::State, "plus",
                        "state: plus, minus, zero, one, mixed, mixed(p), diag(p), fourier(d), x,y,z or a matrix"};
    const KeySpec report{"report", Kind::State, "mixed", "reported state, same syntax as --state"};
    const KeySpec generator{"generator", Kind::String, "log", "scoring-rule generator: log or quadratic"};
    const KeySpec basis_z{"basis", Kind::String, "Z", "measurement basis: Z, X, Y or F"};
    const KeySpec basis_opt{"basis", Kind::String, "", "basis of the POVM for classical Fisher information"};
    const KeySpec family{"family", Kind::String, "bloch-rotation", "family: bloch-rotation, diagonal, bloch-ball, chart"};
    const KeySpec theta{"theta", Kind::RealList, json::array(), "parameter point, comma separated"};
    const KeySpec n{"n", Kind::Integer, 100, "number of copies"};
    const KeySpec n_sim{"n", Kind::Integer, 256, "number of copies (used when --ns is empty)"};
    const KeySpec ns{"ns", Kind::IntList, json::array(), "ascending copy counts, comma separated"};
    const KeySpec ns_adv{"ns", Kind::IntList, json::array({16, 64, 256}), "ascending copy counts, comma separated"};
    const KeySpec dims{"dims", Kind::IntList, json::array({2, 3, 4}), "dimensions in 2..6, comma separated"};
    const KeySpec trials{"trials", Kind::Integer, 0, "Monte Carlo trials; 0 selects 2000 for qubits, 500 otherwise"};
    const KeySpec seed{"seed", Kind::Unsigned, 1u, "random seed"};
    const KeySpec threads{"threads", Kind::Integer, 1, "worker threads (results do not depend on it)"};
    const KeySpec strategy{"strategy", Kind::String, "classical", "strategy: classical, oracle or tomography"};
    const KeySpec out{"out", Kind::String, "", "output file (default: standard output)"};
    const KeySpec eps_floor{"eps_floor", Kind::Real, kDefaultFloor, "eigenvalue floor for singular generators"};
    const KeySpec eps_est{"eps_est", Kind::Real, -1.0, "estimate eigenvalue floor; negative selects 1/(2n)"};
    const KeySpec alpha{"alpha", Kind::Real, kDefaultSmoothing, "add-alpha smoothing of frequencies"};
    const KeySpec bound_mode{"bound_mode", Kind::String, "hessian", "bound mode: hessian or f2diag"};

    return new std::vector<std::pair<std::string, std::vector<KeySpec>>>{
        {"score", {state, report, generator, eps_floor, out}},
        {"divergence", {state, report, generator, eps_floor, out}},
        {"coherence", {state, basis_z, out}},
        {"qfi", {family, state, theta, basis_opt, eps_floor, out}},
        {"bound", {family, state, theta, generator, n, bound_mode, eps_floor, out}},
        {"simulate",
         {state, strategy, basis_z, generator, n_sim, ns, trials, seed, alpha, eps_est, eps_floor, threads, out}},
        {"advantage", {dims, ns_adv, generator, trials, seed, alpha, eps_est, eps_floor, threads, out}},
    };
  }();
  return *table;
}

const std::vector<KeySpec>& keys_for(const std::string& command) {
  for (const auto& [name, keys] : command_table())
    if (name == command) return keys;
  throw ConfigError("command: unknown command '" + command + "'");
}

// Keys that do not affect results and are left out of the echo.
bool echoed(const std::string& key) { return key != "threads" && key != "out"; }

std::string flag_name(const std::string& key) {
  std::string f = "--" + key;
  for (char& c : f)
    if (c == '_') c = '-';
  return f;
}

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::String: return "a string";
    case Kind::Real: return "a finite number";
    case Kind::Integer: return "an integer";
    case Kind::Unsigned: return "a non-negative integer";
    case Kind::IntList: return "a list of integers";
    case Kind::RealList: return "a list of numbers";
    case Kind::State: return "a state name, Bloch triple or matrix";
  }
  return "";
}

bool has_kind(const json& v, Kind kind) {
  const auto finite = [](const json& x) { return x.is_number() && std::isfinite(x.get<double>()); };
  switch (kind) {
    case Kind::String: return v.is_string();
    case Kind::Real: return finite(v);
    case Kind::Integer: return v.is_number_integer();
    case Kind::Unsigned: return v.is_number_unsigned();
    case Kind::IntList:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); });
    case Kind::RealList: return v.is_array() && std::all_of(v.begin(), v.end(), finite);
    case Kind::State: return v.is_string() || v.is_array();
  }
  return false;
}

template <typename T, typename Parse>
T parse_whole(const std::string& key, const std::string& text, Parse parse) {
  std::size_t used = 0;
  T value{};
  try {
    value = parse(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) throw ConfigError(key + ": cannot parse '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_real(const std::string& key, const std::string& text) {
  const double v = parse_whole<double>(key, text, [](const std::string& s, std::size_t* u) { return std::stod(s, u); });
  if (!std::isfinite(v)) throw ConfigError(key + ": value must be finite");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  return parse_whole<long long>(key, text, [](const std::string& s, std::size_t* u) { return std::stoll(s, u); });
}

// A command-line string converted to the JSON value the file would hold.
json from_flag(const std::string& key, Kind kind, const std::string& text) {
  switch (kind) {
    case Kind::String: return text;
    case Kind::Real: return parse_real(key, text);
    case Kind::Integer: return parse_integer(key, text);
    case Kind::Unsigned:
      if (!text.empty() && text.front() == '-') throw ConfigError(key + ": must be non-negative");
      return parse_whole<std::uint64_t>(key, text,
                                        [](const std::string& s, std::size_t* u) { return std::stoull(s, u); });
    case Kind::IntList: {
      json list = json::array();
      if (!text.empty())
        for (const auto& part : split(text, ',')) list.push_back(parse_integer(key, part));
      return list;
    }
    case Kind::RealList: {
      json list = json::array();
      if (!text.empty())
        for (const auto& part : split(text, ',')) list.push_back(parse_real(key, part));
      return list;
    }
    case Kind::State:
      if (!text.empty() && text.front() == '[') {
        try {
          return json::parse(text);
        } catch (const json::exception& e) {
          throw ConfigError(key + ": malformed matrix literal (" + e.what() + ")");
        }
      }
      return text;
  }
  return text;
}

/// Merge defaults, the --config file and explicit flags, strictly checked.
json resolve(const std::string& command, const json& file, const json& flags) {
  const auto& keys = keys_for(command);
  for (const auto& [key, value] : file.items()) {
    if (key == "command") {
      if (value != command) throw ConfigError("command: file is for '" + value.dump() + "', not '" + command + "'");
      continue;
    }
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const KeySpec& k) { return key == k.key; });
    if (!known) throw ConfigError(key + ": unknown configuration key for command '" + command + "'");
  }
  json config = json::object();
  config["command"] = command;
  for (const auto& spec : keys) {
    const json& value =
        flags.contains(spec.key) ? flags[spec.key] : (file.contains(spec.key) ? file[spec.key] : spec.fallback);
    if (!has_kind(value, spec.kind))
      throw ConfigError(std::string(spec.key) + ": expected " + kind_name(spec.kind) + ", got " + value.dump());
    config[spec.key] = value;
  }
  return config;
}

json echo_of(const json& config) {
  json e = json::object();
  for (const auto& [key, value] : config.items())
    if (echoed(key)) e[key] = value;
  return e;
}

/// Run `body`, reporting any library error as a problem with `key`.
template <typename F>
auto field(const std::string& key, F body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Typed accessors

double real_at(const json& c, const char* key) { return c.at(key).get<double>(); }
long long integer_at(const json& c, const char* key) { return c.at(key).get<long long>(); }

long positive(const json& c, const char* key) {
  const long long v = integer_at(c, key);
  if (v < 1) throw ConfigError(std::string(key) + ": must be >= 1");
  return static_cast<long>(v);
}

std::vector<long> positive_list(const json& c, const char* key) {
  std::vector<long> out;
  for (const auto& v : c.at(key)) {
    if (v.get<long long>() < 1) throw ConfigError(std::string(key) + ": entries must be >= 1");
    out.push_back(static_cast<long>(v.get<long long>()));
  }
  return out;
}

Generator generator_at(const json& c) {
  return field("generator", [&] { return Generator::from_name(c.at("generator").get<std::string>()); });
}

double eps_floor_at(const json& c) {
  const double eps = real_at(c, "eps_floor");
  if (!(eps > 0.0 && eps <= 1e-2)) throw ConfigError("eps_floor: must lie in (0, 1e-2]");
  return eps;
}

SimulationOptions simulation_options(const json& c) {
  SimulationOptions o;
  o.eps_floor = eps_floor_at(c);
  o.eps_est = real_at(c, "eps_est");
  if (o.eps_est >= 0.5) throw ConfigError("eps_est: must be below 1/2 (or negative for 1/(2n))");
  if (o.eps_est == 0.0) throw ConfigError("eps_est: must be positive (or negative for 1/(2n))");
  o.alpha = real_at(c, "alpha");
  if (!(o.alpha > 0.0)) throw ConfigError("alpha: must be positive");
  const long long threads = integer_at(c, "threads");
  if (threads < 1 || threads > 256) throw ConfigError("threads: must lie in [1, 256]");
  o.threads = static_cast<int>(threads);
  return o;
}

// ---------------------------------------------------------------------------
// States and families

DensityOperator state_from_string(const std::string& key, const std::string& spec) {
  static const std::regex call(R"(^\s*([a-z]+)\s*\(\s*([^)]*?)\s*\)\s*$)");
  std::smatch m;
  if (spec == "plus") return plus_state();
  if (spec == "minus") return bloch_to_density(BlochVector(-1.0, 0.0, 0.0));
  if (spec == "zero") return bloch_to_density(BlochVector(0.0, 0.0, 1.0));
  if (spec == "one") return bloch_to_density(BlochVector(0.0, 0.0, -1.0));
  if (spec == "mixed") return maximally_mixed(2);
  if (std::regex_match(spec, m, call)) {
    const std::string name = m[1];
    const std::string arg = m[2];
    if (name == "mixed" || name == "diag") {
      const double p = parse_real(key, arg);
      if (p < 0.0 || p > 1.0) throw ConfigError(key + ": " + name + "(p) needs p in [0, 1]");
      CMatrix rho = CMatrix::Zero(2, 2);
      if (name == "mixed") {
        rho = p * plus_state().matrix() + (1.0 - p) * maximally_mixed(2).matrix();
      } else {
        rho(0, 0) = p;
        rho(1, 1) = 1.0 - p;
      }
      return make_density(rho);
    }
    if (name == "fourier") {
      const long long d = parse_integer(key, arg);
      if (d < 2 || d > 8) throw ConfigError(key + ": fourier(d) needs d in [2, 8]");
      return fourier_state(static_cast<Eigen::Index>(d));
    }
  }
  if (spec.find(',') != std::string::npos) {
    const auto parts = split(spec, ',');
    if (parts.size() != 3) throw ConfigError(key + ": a Bloch vector needs three components");
    return bloch_to_density(BlochVector(parse_real(key, parts[0]), parse_real(key, parts[1]), parse_real(key, parts[2])));
  }
  throw ConfigError(key + ": unknown state '" + spec + "'");
}

std::complex<double> entry_of(const std::string& key, const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(key + ": matrix entries must be numbers or [re, im] pairs");
}

DensityOperator state_from_json(const std::string& key, const json& spec) {
  if (spec.is_string()) return state_from_string(key, spec.get<std::string>());
  if (spec.size() == 3 && std::all_of(spec.begin(), spec.end(), [](const json& x) { return x.is_number(); }))
    return bloch_to_density(BlochVector(spec[0].get<double>(), spec[1].get<double>(), spec[2].get<double>()));
  const auto d = static_cast<Eigen::Index>(spec.size());
  if (d < 1) throw ConfigError(key + ": empty matrix");
  CMatrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const json& row = spec[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
      throw ConfigError(key + ": matrix must be square");
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = entry_of(key, row[static_cast<std::size_t>(j)]);
  }
  return make_density(m);
}

DensityOperator state_at(const json& c, const char* key) {
  return field(key, [&] { return state_from_json(key, c.at(key)); });
}

ParametrizedFamily family_at(const json& c) {
  const std::string name = c.at("family").get<std::string>();
  if (name == "bloch-rotation") return bloch_rotation();
  if (name == "diagonal") return diagonal_qubit();
  if (name == "bloch-ball") return bloch_ball();
  if (name == "chart") return field("family", [&] { return affine_chart(state_at(c, "state")); });
  throw ConfigError("family: unknown family '" + name + "'");
}

Params theta_at(const json& c, const ParametrizedFamily& family) {
  const json& list = c.at("theta");
  if (list.empty()) {
    if (family.label() == "diagonal") return Params::Constant(1, 0.3);
    return Params::Zero(family.n_params());
  }
  if (static_cast<Eigen::Index>(list.size()) != family.n_params())
    throw ConfigError("theta: family '" + family.label() + "' has " + std::to_string(family.n_params()) +
                      " parameters, got " + std::to_string(list.size()));
  Params theta(family.n_params());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = list[static_cast<std::size_t>(i)].get<double>();
  return theta;
}

// ---------------------------------------------------------------------------
// Results

/// Finite numbers as numbers, infinities as the tokens "inf" / "-inf".
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

void put_matrix(json& results, const std::string& name, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      results[name + "." + std::to_string(i) + "." + std::to_string(j)] = number(m(i, j));
}

json run_score(const json& c) {
  const ScoreReport r = field("state", [&] {
    return score_report(state_at(c, "state"), state_at(c, "report"), generator_at(c), eps_floor_at(c));
  });
  json out = json::object();
  out["expected_self"] = number(r.expected_self);
  out["expected_report"] = number(r.expected_report);
  out["gap"] = number(r.gap);
  out["divergence_bregman"] = number(r.divergence_bregman.value());
  out["divergence_petz"] = number(r.divergence_petz.value());
  return out;
}

json run_divergence(const json& c) {
  const DensityOperator rho = state_at(c, "state");
  const DensityOperator sigma = state_at(c, "report");
  const Generator g = generator_at(c);
  const double eps = eps_floor_at(c);
  json out = json::object();
  field("report", [&] {
    out["bregman"] = number(bregman_divergence(rho, sigma, g, eps).value());
    out["petz"] = number(petz_f_divergence(rho, sigma, g, eps).value());
    out["support_contained"] = support_contained(rho, sigma);
    return 0;
  });
  return out;
}

json run_coherence(const json& c) {
  const DensityOperator rho = state_at(c, "state");
  const MeasurementBasis basis =
      field("basis", [&] { return MeasurementBasis::named(c.at("basis").get<std::string>(), rho.dim()); });
  json out = json::object();
  out["coherence"] = number(coherence(rho, basis));
  out["entropy"] = number(von_neumann_entropy(rho));
  out["dephased_entropy"] = number(von_neumann_entropy(dephase(rho, basis)));
  return out;
}

json run_qfi(const json& c) {
  const ParametrizedFamily family = family_at(c);
  const Params theta = theta_at(c, family);
  const double eps = eps_floor_at(c);
  const std::string basis = c.at("basis").get<std::string>();
  std::optional<Povm> povm;
  if (!basis.empty())
    povm = field("basis", [&] { return Povm::from_basis(MeasurementBasis::named(basis, family.dim())); });
  const FisherReport r = field("theta", [&] { return fisher_report(family, theta, povm, eps); });
  json out = json::object();
  put_matrix(out, "qfi", r.qfi);
  if (r.cfi) put_matrix(out, "cfi", *r.cfi);
  out["floored"] = r.floored;
  return out;
}

json run_bound(const json& c) {
  const ParametrizedFamily family = family_at(c);
  const Params theta = theta_at(c, family);
  const long n = positive(c, "n");
  const BoundMode mode = field("bound_mode", [&] { return bound_mode_from_name(c.at("bound_mode").get<std::string>()); });
  const CrmcReport r = field("theta", [&] { return crmc_bound(family, theta, generator_at(c), n, mode, eps_floor_at(c)); });
  json out = json::object();
  out["bound"] = number(r.bound);
  out["n_times_bound"] = number(static_cast<double>(n) * r.bound);
  put_matrix(out, "hessian", r.hessian);
  put_matrix(out, "qfi", r.qfi);
  out["floored"] = r.floored;
  return out;
}

// A CSV grid: named columns, each row a list of pre-formatted cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string cell(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string cell(long long v) { return std::to_string(v); }
std::string cell(std::uint64_t v) { return std::to_string(v); }
std::string cell(const std::string& v) { return v; }

Table run_simulate(const json& c) {
  const DensityOperator rho = state_at(c, "state");
  const Generator g = generator_at(c);
  const SimulationOptions options = simulation_options(c);
  const Strategy strategy = field("strategy", [&] {
    return strategy_from_name(c.at("strategy").get<std::string>(), rho.dim(), c.at("basis").get<std::string>(),
                              options.alpha);
  });
  std::vector<long> ns = positive_list(c, "ns");
  if (ns.empty()) ns.push_back(positive(c, "n"));
  const long long trials_requested = integer_at(c, "trials");
  if (trials_requested < 0) throw ConfigError("trials: must be >= 0");
  const long trials = trials_requested > 0 ? static_cast<long>(trials_requested) : default_trials(rho.dim());
  const auto seed = c.at("seed").get<std::uint64_t>();

  Table t{{"n", "strategy", "generator", "risk_mean", "risk_stderr", "trials", "clamp_events", "seed"}, {}};
  for (const long n : ns) {
    const RiskReport r = field("state", [&] { return estimate_risk(rho, strategy, g, n, trials, seed, options); });
    t.rows.push_back({cell(static_cast<long long>(n)), cell(r.strategy), cell(r.generator), cell(r.risk_mean),
                      cell(r.risk_stderr), cell(static_cast<long long>(r.trials)),
                      cell(static_cast<long long>(r.clamp_events)), cell(seed)});
  }
  return t;
}

Table run_advantage(const json& c) {
  const Generator g = generator_at(c);
  const SimulationOptions options = simulation_options(c);
  std::vector<Eigen::Index> dims;
  for (const long d : positive_list(c, "dims")) dims.push_back(d);
  const std::vector<long> ns = positive_list(c, "ns");
  const long long trials = integer_at(c, "trials");
  if (trials < 0) throw ConfigError("trials: must be >= 0");
  const auto seed = c.at("seed").get<std::uint64_t>();
  const auto rows = field("dims", [&] { return scaling_study(dims, ns, g, static_cast<long>(trials), seed, options); });

  Table t{{"d", "n", "generator", "classical_risk", "classical_stderr", "quantum_risk", "quantum_stderr", "gap",
           "gap_stderr", "coherence", "predicted_gap", "crmc_bound", "clamp_events", "seed"},
          {}};
  for (const auto& r : rows)
    t.rows.push_back({cell(static_cast<long long>(r.d)), cell(static_cast<long long>(r.n)), cell(r.generator),
                      cell(r.classical_risk), cell(r.classical_stderr), cell(r.quantum_risk), cell(r.quantum_stderr),
                      cell(r.gap), cell(r.gap_stderr), cell(r.coherence), cell(r.predicted_gap), cell(r.crmc_bound),
                      cell(static_cast<long long>(r.clamp_events)), cell(r.seed)});
  return t;
}

// ---------------------------------------------------------------------------
// Documents

constexpr const char* kCsvMagic = "# qscore ";

bool is_grid(const std::string& command) { return command == "simulate" || command == "advantage"; }

/// The full text written for a resolved configuration.
std::string produce(const json& config) {
  const std::string command = config.at("command").get<std::string>();
  if (is_grid(command)) {
    const Table t = command == "simulate" ? run_simulate(config) : run_advantage(config);
    std::ostringstream os;
    os << kCsvMagic << kVersion << " config=" << echo_of(config).dump() << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << '\n';
    }
    return os.str();
  }
  json results;
  if (command == "score") results = run_score(config);
  else if (command == "divergence") results = run_divergence(config);
  else if (command == "coherence") results = run_coherence(config);
  else if (command == "qfi") results = run_qfi(config);
  else results = run_bound(config);
  json doc = json::object();
  doc["version"] = kVersion;
  doc["config"] = echo_of(config);
  doc["results"] = results;
  return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + what + " '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + what + " '" + path + "'");
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open output file '" + path + "'");
  f << text;
  f.flush();
  if (!f) throw IoError("error while writing output file '" + path + "'");
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what + ": malformed JSON (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------
// Replay

struct Loaded {
  std::string version;
  json config;
  // Flat (key, value) pairs to compare, in file order.
  std::vector<std::pair<std::string, json>> values;
};

Loaded load_json_results(const std::string& text) {
  const json doc = parse_json(text, "results file");
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_string() || !doc.contains("config") ||
      !doc["config"].is_object() || !doc.contains("results") || !doc["results"].is_object())
    throw ConfigError("results file: expected an object with version, config and results");
  Loaded l{doc["version"].get<std::string>(), doc["config"], {}};
  for (const auto& [key, value] : doc["results"].items()) l.values.emplace_back(key, value);
  return l;
}

Loaded load_csv_results(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  if (lines.size() < 2) throw ConfigError("results file: CSV needs a config line and a header");
  const std::string& first = lines[0];
  const std::size_t at = first.find(" config=");
  if (at == std::string::npos) throw ConfigError("results file: first line lacks the config echo");
  Loaded l{first.substr(std::string(kCsvMagic).size(), at - std::string(kCsvMagic).size()),
           parse_json(first.substr(at + 8), "results file config"),
           {}};
  const auto columns = split(lines[1], ',');
  for (std::size_t r = 2; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto cells = split(lines[r], ',');
    if (cells.size() != columns.size())
      throw ConfigError("results file: row " + std::to_string(r - 1) + " has " + std::to_string(cells.size()) +
                        " cells for " + std::to_string(columns.size()) + " columns");
    for (std::size_t k = 0; k < cells.size(); ++k)
      l.values.emplace_back("row " + std::to_string(r - 1) + " " + columns[k], cells[k]);
  }
  l.values.emplace_back("header", lines[1]);
  return l;
}

Loaded load_results(const std::string& text) {
  if (text.rfind(kCsvMagic, 0) == 0) return load_csv_results(text);
  const auto start = text.find_first_not_of(" \t\r\n");
  if (start != std::string::npos && text[start] == '{') return load_json_results(text);
  throw ConfigError("results file: neither a qscore JSON document nor a qscore CSV file");
}

int replay(const std::string& path, std::ostream& out, std::ostream& err) {
  const Loaded recorded = load_results(read_file(path, "results file"));
  if (recorded.version != kVersion)
    err << "warning: results were written by qscore " << recorded.version << ", this is qscore " << kVersion
        << "; comparing anyway\n";
  if (!recorded.config.is_object() || !recorded.config.contains("command") || !recorded.config["command"].is_string())
    throw ConfigError("results file: config echo lacks the command");
  const std::string command = recorded.config["command"].get<std::string>();
  if (command == "replay") throw ConfigError("results file: cannot replay a replay");
  const json config = resolve(command, recorded.config, json::object());
  const Loaded fresh = load_results(produce(config));

  std::map<std::string, const json*> index;
  for (const auto& [key, value] : fresh.values) index[key] = &value;
  for (const auto& [key, value] : recorded.values) {
    const auto it = index.find(key);
    if (it == index.end()) {
      out << "replay: mismatch at '" << key << "': not produced by the re-run\n";
      return kMismatch;
    }
    if (*it->second != value) {
      out << "replay: mismatch at '" << key << "': file has " << value.dump() << ", re-run gives "
          << it->second->dump() << '\n';
      return kMismatch;
    }
    index.erase(it);
  }
  if (!index.empty()) {
    out << "replay: mismatch at '" << index.begin()->first << "': missing from the file\n";
    return kMismatch;
  }
  out << "replay: identical (" << recorded.values.size() << " values)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// Human-readable summary printed when results go to a file.

void summarize(const std::string& text, const std::string& path, std::ostream& out) {
  if (text.rfind(kCsvMagic, 0) == 0) {
    const auto lines = split(text, '\n');
    out << "wrote " << (lines.size() - 2) << " rows to " << path << '\n';
    return;
  }
  const json doc = json::parse(text);
  for (const auto& [key, value] : doc["results"].items()) out << key << " = " << value.dump() << '\n';
  out << "wrote " << path << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum proper scoring rules, Fisher information bounds and tomography experiments.", "qscore"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // Raw flag text per command and key; only flags actually given are used.
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [command, keys] : command_table()) {
    CLI::App* sub = app.add_subcommand(command);
    sub->add_option("--config", config_paths[command], "JSON configuration file; flags override it");
    for (const auto& k : keys) {
      std::string names = flag_name(k.key);
      if (std::string(k.key) == "bound_mode") names += ",--mode";
      sub->add_option(names, raw[command][k.key], k.help);
    }
    subs[command] = sub;
  }
  std::string replay_path;
  CLI::App* replay_cmd = app.add_subcommand("replay", "re-run the configuration echoed in a results file and compare");
  replay_cmd->add_option("file", replay_path, "JSON or CSV results file")->required();

  subs["score"]->description("expected scores and gap for a true and a reported state");
  subs["divergence"]->description("Bregman and Petz divergences");
  subs["coherence"]->description("relative entropy of coherence in a basis");
  subs["qfi"]->description("quantum (and optionally classical) Fisher information of a family");
  subs["bound"]->description("Cramer-Rao-McCarthy lower bound on the n-copy forecasting risk");
  subs["simulate"]->description("Monte Carlo risk of one strategy (CSV)");
  subs["advantage"]->description("classical versus oracle forecasting over dimensions and n (CSV)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (replay_cmd->parsed()) return replay(replay_path, out, err);

    std::string command;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) command = name;

    json file = json::object();
    if (!config_paths[command].empty()) {
      file = parse_json(read_file(config_paths[command], "config file"), "config");
      if (!file.is_object()) throw ConfigError("config: the file must hold a JSON object");
    }
    json flags = json::object();
    for (const auto& k : keys_for(command))
      if (subs[command]->count(flag_name(k.key)) > 0) flags[k.key] = from_flag(k.key, k.kind, raw[command][k.key]);

    const json config = resolve(command, file, flags);
    const std::string text = produce(config);
    const std::string path = config.contains("out") ? config["out"].get<std::string>() : std::string();
    if (path.empty()) {
      out << text;
    } else {
      write_file(path, text);
      summarize(text, path, out);
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
}

}  // namespace qscore::cli
