// Copyright 2026 The vnm-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario configuration, validation and execution for the vnm-lab tool.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vnm/core_hilbert.hpp"
#include "vnm/errors.hpp"
#include "vnm/io.hpp"
#include "vnm/probe.hpp"
#include "vnm/sampler.hpp"
#include "vnm/single_meas.hpp"
#include "vnm/successive_meas.hpp"
#include "vnm/tomography.hpp"

namespace vnm::cli {

using json = io::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Schema

enum class Kind {
  number,
  positive,
  nonneg,
  count,       // integer >= 1
  pow2,        // power-of-two integer >= 2
  seed,        // non-negative integer
  number_list,
  positive_list,
  state,       // "random" | "maximally_mixed" | "witness" | "file:<path>" | matrix | {"pure": vector}
  observable,  // "random" | "sigma_x" | "sigma_y" | "sigma_z" | "file:<path>" | Hermitian matrix
  basis_pair,  // "computational-fourier" | "canonical" | "random" | {"basis_k", "basis_mu"}
  vector,      // {"re": [...], "im": [...]}
  spinors,     // list of "+x" | "-x" | "+y" | "-y" | "+z" | "-z" | vector
};

struct Field {
  std::string key;
  Kind kind;
  json def;
};

struct ScenarioSpec {
  std::string name;
  std::string description;
  std::vector<Field> fields;
};

inline const std::vector<ScenarioSpec>& scenarios() {
  static const std::vector<ScenarioSpec> specs = {
      {"stern-gerlach",
       "spin-1/2 packet: free spreading, momentum boost +-eps at t1, branch separation",
       {{"mass", Kind::positive, 1.0},
        {"t1", Kind::positive, 1.0},
        {"epsilon", Kind::positive, 4.0},
        {"sigma", Kind::positive, 0.5},
        {"q_min", Kind::number, -32.0},
        {"q_max", Kind::number, 32.0},
        {"n_points", Kind::pow2, 1024},
        {"spinors", Kind::spinors, json::array({"+x", "+z", json{{"re", {0.6, 0.0}}, {"im", {0.0, 0.8}}}})}}},
      {"pointer-density",
       "single-probe pointer density for a seven-outcome observable, strong and weak coupling",
       {{"eigenvalues", Kind::number_list, json::array({-3, -2, -1, 0, 1, 2, 3})},
        {"weights", Kind::number_list, json::array({0.1, 0.2, 0.2, 0.15, 0.2, 0.05, 0.1})},
        {"epsilon", Kind::positive, 1.0},
        {"sigma_q", Kind::positive_list, json::array({0.05, 1.0})},
        {"n_points", Kind::count, 4096}}},
      {"reduced-state",
       "post-measurement reduced state versus coupling and the Lueders limit",
       {{"dim", Kind::count, 2},
        {"state", Kind::state, json{{"pure", {{"re", {1.0, 1.0}}, {"im", {0.0, 0.0}}}}}},
        {"observable", Kind::observable, "sigma_z"},
        {"sigma_q", Kind::positive, 1.0},
        {"epsilon", Kind::number_list, json::array({0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 1000.0})},
        {"seed", Kind::seed, 1}}},
      {"successive",
       "two successive measurements: correlations, joint densities, correlation coefficient, weak value",
       {{"dim", Kind::count, 2},
        {"state", Kind::state, "random"},
        {"observable_a", Kind::observable, "sigma_z"},
        {"observable_b", Kind::observable, "sigma_x"},
        {"sigma_q1", Kind::positive, 1.0},
        {"sigma_q2", Kind::positive, 1.0},
        {"epsilon1", Kind::positive_list, json::array({0.001, 0.1, 1.0, 10.0, 1000.0})},
        {"epsilon2", Kind::positive, 1.0},
        {"grid_points", Kind::count, 512},
        {"sigma_over_epsilon", Kind::positive_list, json::array({2.0, 1.0, 0.5, 0.25, 0.1})},
        {"postselection", Kind::vector, json{{"re", {1.0, -1.0}}, {"im", {0.0, 0.0}}}},
        {"weak_epsilons", Kind::positive_list, json::array({0.01, 0.005, 0.0025})},
        {"seed", Kind::seed, 7}}},
      {"quasi-distributions",
       "Kirkwood, Wigner and Margenau-Hill tables and the W interpolation between them",
       {{"basis_pair", Kind::basis_pair, "canonical"},
        {"a_eigenvalues", Kind::number_list, json::array({1.0, 0.0})},
        {"b_eigenvalues", Kind::number_list, json::array({1.0, 0.0})},
        {"state", Kind::state, "witness"},
        {"witness_m", Kind::count, 1},
        {"witness_n", Kind::count, 1},
        {"sigma_q", Kind::positive, 1.0},
        {"epsilon1", Kind::positive_list, json::array({0.001, 1.0, 1000.0})},
        {"seed", Kind::seed, 3}}},
      {"tomography",
       "exact correlation tables over a basis pair and the reconstruction round trip",
       {{"dim", Kind::count, 2},
        {"state", Kind::state, "random"},
        {"basis_pair", Kind::basis_pair, "computational-fourier"},
        {"sigma_q", Kind::positive, 1.0},
        {"epsilon1", Kind::positive, 1.0},
        {"seed", Kind::seed, 11}}},
      {"ensemble-tomography",
       "finite-ensemble tomography from sampled pointer readings",
       {{"dim", Kind::count, 2},
        {"state", Kind::state, "random"},
        {"basis_pair", Kind::basis_pair, "computational-fourier"},
        {"sigma_q1", Kind::positive, 1.0},
        {"sigma_q2", Kind::positive, 1.0},
        {"epsilon1", Kind::positive, 1.0},
        {"epsilon2", Kind::positive, 1.0},
        {"n_per_setting", Kind::count, 1000000},
        {"grid_points", Kind::count, 1024},
        {"seed", Kind::seed, 5}}},
      {"conditioning-sweep",
       "reconstruction error under additive noise versus coupling strength",
       {{"dim", Kind::count, 2},
        {"state", Kind::state, "random"},
        {"basis_pair", Kind::basis_pair, "computational-fourier"},
        {"sigma_q", Kind::positive, 1.0},
        {"epsilon1", Kind::positive_list, json::array({0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0})},
        {"noise_level", Kind::nonneg, 1e-4},
        {"trials", Kind::count, 200},
        {"seed", Kind::seed, 3}}},
      {"transform-check",
       "expectation values through the quasi-probability transform versus direct traces",
       {{"dim", Kind::count, 3},
        {"instances", Kind::count, 100},
        {"basis_pair", Kind::basis_pair, "computational-fourier"},
        {"sigma_q", Kind::positive, 1.0},
        {"epsilon1_over_sigma", Kind::positive_list, json::array({0.1, 1.0, 10.0})},
        {"seed", Kind::seed, 13}}},
  };
  return specs;
}

inline const ScenarioSpec* find_scenario(const std::string& name) {
  for (const auto& s : scenarios())
    if (s.name == name) return &s;
  return nullptr;
}

inline json default_params(const std::string& scenario) {
  const auto* spec = find_scenario(scenario);
  if (!spec) throw InvalidArgument("unknown scenario '" + scenario + "'");
  json p = json::object();
  for (const auto& f : spec->fields) p[f.key] = f.def;
  return p;
}

struct ConfigError {
  std::string path;
  std::string message;
  std::string str() const { return path + ": " + message; }
};

struct ScenarioConfig {
  std::string scenario;
  json params;
  fs::path base_dir = ".";

  json to_json() const { return json{{"scenario", scenario}, {"params", params}}; }
};

struct ValidationResult {
  std::optional<ScenarioConfig> config;
  std::vector<ConfigError> errors;
  bool ok() const { return config.has_value(); }
};

namespace detail {

inline bool is_int(const json& v) { return v.is_number_integer() || v.is_number_unsigned(); }

inline bool is_file_ref(const json& v) { return v.is_string() && v.get<std::string>().rfind("file:", 0) == 0; }

inline bool is_vector_json(const json& v) {
  if (!v.is_object() || !v.contains("re") || !v.at("re").is_array() || v.at("re").empty()) return false;
  for (const auto& x : v.at("re"))
    if (!x.is_number()) return false;
  if (v.contains("im")) {
    if (!v.at("im").is_array() || v.at("im").size() != v.at("re").size()) return false;
    for (const auto& x : v.at("im"))
      if (!x.is_number()) return false;
  }
  for (const auto& [k, _] : v.items())
    if (k != "re" && k != "im") return false;
  return true;
}

inline bool is_matrix_json(const json& v) {
  if (!v.is_object() || !v.contains("re") || !v.at("re").is_array() || v.at("re").empty()) return false;
  const auto n = v.at("re").size();
  auto square = [n](const json& m) {
    if (!m.is_array() || m.size() != n) return false;
    for (const auto& row : m) {
      if (!row.is_array() || row.size() != n) return false;
      for (const auto& x : row)
        if (!x.is_number()) return false;
    }
    return true;
  };
  if (!square(v.at("re"))) return false;
  if (v.contains("im") && !square(v.at("im"))) return false;
  for (const auto& [k, val] : v.items()) {
    if (k == "dim") {
      if (!is_int(val) || val.get<std::size_t>() != n) return false;
    } else if (k != "re" && k != "im") {
      return false;
    }
  }
  return true;
}

inline std::optional<std::string> check_field(const Field& f, const json& v) {
  const std::string& k = f.key;
  switch (f.kind) {
    case Kind::number:
      if (!v.is_number()) return k + " must be a number";
      break;
    case Kind::positive:
      if (!v.is_number()) return k + " must be a number";
      if (!(v.get<double>() > 0)) return k + " must be > 0";
      break;
    case Kind::nonneg:
      if (!v.is_number()) return k + " must be a number";
      if (!(v.get<double>() >= 0)) return k + " must be >= 0";
      break;
    case Kind::count:
      if (!is_int(v) || v.get<long long>() < 1) return k + " must be an integer >= 1";
      break;
    case Kind::pow2: {
      if (!is_int(v) || v.get<long long>() < 2) return k + " must be a power of two >= 2";
      const auto n = v.get<unsigned long long>();
      if ((n & (n - 1)) != 0) return k + " must be a power of two >= 2";
      break;
    }
    case Kind::seed:
      if (!is_int(v) || (v.is_number_integer() && v.get<long long>() < 0)) return k + " must be a non-negative integer";
      break;
    case Kind::number_list:
    case Kind::positive_list:
      if (!v.is_array() || v.empty()) return k + " must be a non-empty list of numbers";
      for (const auto& x : v) {
        if (!x.is_number()) return k + " must be a non-empty list of numbers";
        if (f.kind == Kind::positive_list && !(x.get<double>() > 0)) return k + " entries must be > 0";
      }
      break;
    case Kind::state:
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s != "random" && s != "maximally_mixed" && s != "witness" && !is_file_ref(v))
          return k + " must be \"random\", \"maximally_mixed\", \"witness\", \"file:<path>\", a matrix or {\"pure\": vector}";
      } else if (v.is_object() && v.contains("pure")) {
        if (v.size() != 1 || !is_vector_json(v.at("pure"))) return k + ".pure must be {\"re\": [...], \"im\": [...]}";
      } else if (!is_matrix_json(v)) {
        return k + " must be a state name, a file reference, a matrix or {\"pure\": vector}";
      }
      break;
    case Kind::observable:
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s != "random" && s != "sigma_x" && s != "sigma_y" && s != "sigma_z" && !is_file_ref(v))
          return k + " must be \"random\", \"sigma_x\", \"sigma_y\", \"sigma_z\", \"file:<path>\" or a matrix";
      } else if (!is_matrix_json(v)) {
        return k + " must be an observable name, a file reference or a matrix";
      }
      break;
    case Kind::basis_pair:
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s != "computational-fourier" && s != "canonical" && s != "random" && !is_file_ref(v))
          return k + " must be \"computational-fourier\", \"canonical\", \"random\", \"file:<path>\" or {basis_k, basis_mu}";
      } else if (!(v.is_object() && v.size() == 2 && v.contains("basis_k") && v.contains("basis_mu") &&
                   is_matrix_json(v.at("basis_k")) && is_matrix_json(v.at("basis_mu")))) {
        return k + " must be a basis-pair name, a file reference or {\"basis_k\": matrix, \"basis_mu\": matrix}";
      }
      break;
    case Kind::vector:
      if (!is_vector_json(v)) return k + " must be {\"re\": [...], \"im\": [...]}";
      break;
    case Kind::spinors:
      if (!v.is_array() || v.empty()) return k + " must be a non-empty list of spinors";
      for (const auto& s : v) {
        if (s.is_string()) {
          const auto n = s.get<std::string>();
          if (n != "+x" && n != "-x" && n != "+y" && n != "-y" && n != "+z" && n != "-z")
            return k + " entries must be +x, -x, +y, -y, +z, -z or {\"re\": [a, b], \"im\": [c, d]}";
        } else if (!is_vector_json(s) || s.at("re").size() != 2) {
          return k + " entries must be +x, -x, +y, -y, +z, -z or {\"re\": [a, b], \"im\": [c, d]}";
        }
      }
      break;
  }
  return std::nullopt;
}

inline void cross_checks(const std::string& scenario, const json& p, std::vector<ConfigError>& errors) {
  auto err = [&](const std::string& key, const std::string& msg) { errors.push_back({"params." + key, msg}); };
  if (p.contains("dim") && p.at("dim").get<long long>() > 64) err("dim", "dim must be <= 64");
  if (p.contains("basis_pair") && p.at("basis_pair") == "canonical" && p.contains("dim") && p.at("dim") != 2) {
    err("basis_pair", "\"canonical\" requires dim = 2");
  }
  if (scenario == "stern-gerlach" && !(p.at("q_max").get<double>() > p.at("q_min").get<double>())) {
    err("q_max", "q_max must exceed q_min");
  }
  if (scenario == "pointer-density") {
    if (p.at("weights").size() != p.at("eigenvalues").size()) err("weights", "weights and eigenvalues differ in length");
    double s = 0.0;
    for (const auto& w : p.at("weights")) {
      if (w.get<double>() < 0) err("weights", "weights must be >= 0");
      s += w.get<double>();
    }
    if (std::abs(s - 1.0) > 1e-9) err("weights", "weights must sum to 1");
    auto e = p.at("eigenvalues").get<std::vector<double>>();
    std::sort(e.begin(), e.end());
    if (std::adjacent_find(e.begin(), e.end()) != e.end()) err("eigenvalues", "eigenvalues must be distinct");
    if (p.at("n_points").get<long long>() < 16) err("n_points", "n_points must be >= 16");
  }
  if (scenario == "ensemble-tomography" && p.at("n_per_setting").get<long long>() < 100) {
    err("n_per_setting", "n_per_setting must be >= 100");
  }
  if (scenario == "successive" && p.at("grid_points").get<long long>() < 16) err("grid_points", "grid_points must be >= 16");
  if (scenario == "successive" || scenario == "reduced-state" || scenario == "tomography" ||
      scenario == "ensemble-tomography" || scenario == "conditioning-sweep") {
    if (p.at("state") == "witness") err("state", "\"witness\" is only available in quasi-distributions");
  }
}

}  // namespace detail

/// Full validation; on success the returned config has every default filled in.
inline ValidationResult validate_config(const json& raw, fs::path base_dir = ".") {
  ValidationResult r;
  if (!raw.is_object()) {
    r.errors.push_back({"$", "config must be a JSON object"});
    return r;
  }
  for (const auto& [k, _] : raw.items())
    if (k != "scenario" && k != "params") r.errors.push_back({k, "unknown key"});
  if (!raw.contains("scenario")) {
    r.errors.push_back({"scenario", "required"});
    return r;
  }
  if (!raw.at("scenario").is_string()) {
    r.errors.push_back({"scenario", "must be a string"});
    return r;
  }
  const auto name = raw.at("scenario").get<std::string>();
  const auto* spec = find_scenario(name);
  if (!spec) {
    std::string known;
    for (const auto& s : scenarios()) known += (known.empty() ? "" : ", ") + s.name;
    r.errors.push_back({"scenario", "unknown scenario '" + name + "' (expected one of: " + known + ")"});
    return r;
  }
  json params = default_params(name);
  if (raw.contains("params")) {
    const auto& given = raw.at("params");
    if (!given.is_object()) {
      r.errors.push_back({"params", "must be an object"});
    } else {
      for (const auto& [k, v] : given.items()) {
        const auto it = std::find_if(spec->fields.begin(), spec->fields.end(), [&](const Field& f) { return f.key == k; });
        if (it == spec->fields.end()) {
          r.errors.push_back({"params." + k, "unknown key"});
          continue;
        }
        if (auto e = detail::check_field(*it, v)) {
          r.errors.push_back({"params." + k, *e});
          continue;
        }
        params[k] = v;
      }
    }
  }
  if (r.errors.empty()) detail::cross_checks(name, params, r.errors);
  if (!r.errors.empty()) return r;
  r.config = ScenarioConfig{name, params, std::move(base_dir)};
  return r;
}

inline ValidationResult validate_config(const std::string& raw_text, fs::path base_dir = ".") {
  json raw;
  try {
    raw = json::parse(raw_text);
  } catch (const json::parse_error& e) {
    ValidationResult r;
    r.errors.push_back({"$", std::string("invalid JSON: ") + e.what()});
    return r;
  }
  return validate_config(raw, std::move(base_dir));
}

/// Replaces params.seed (when the scenario has one).
inline void apply_seed_override(ScenarioConfig& cfg, std::uint64_t seed) {
  if (cfg.params.contains("seed")) cfg.params["seed"] = seed;
}

// ---------------------------------------------------------------------------
// Builders from params

namespace detail {

inline json load_ref(const json& v, const fs::path& base) {
  const auto rel = v.get<std::string>().substr(5);
  const fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
  return json::parse(io::read_text(p.string()));
}

inline Matrix pauli(const std::string& name) {
  Matrix m(2, 2);
  if (name == "sigma_x") m << 0, 1, 1, 0;
  else if (name == "sigma_y") m << 0, cplx(0, -1), cplx(0, 1), 0;
  else m << 1, 0, 0, -1;
  return m;
}

inline DensityOperator make_state(const json& v, int dim, std::uint64_t seed, const fs::path& base) {
  if (is_file_ref(v)) return make_state(load_ref(v, base), dim, seed, base);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "random") return random_density(dim, seed);
    if (s == "maximally_mixed") return DensityOperator::maximally_mixed(dim);
    throw InvalidArgument("state \"" + s + "\" is not available here");
  }
  if (v.contains("pure")) {
    const Vector psi = io::vector_from_json(v.at("pure"));
    if (psi.size() != dim) throw DimensionMismatch("state vector length differs from dim");
    return DensityOperator::pure(psi);
  }
  const Matrix m = io::matrix_from_json(v);
  if (m.rows() != dim) throw DimensionMismatch("state matrix dimension differs from dim");
  return DensityOperator(m);
}

inline Observable make_observable(const json& v, int dim, std::uint64_t seed, const fs::path& base) {
  if (is_file_ref(v)) return make_observable(load_ref(v, base), dim, seed, base);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "random") return random_observable(dim, seed);
    if (dim != 2) throw DimensionMismatch("Pauli observables need dim = 2");
    return spectral_decompose(pauli(s));
  }
  const Matrix m = io::matrix_from_json(v);
  if (m.rows() != dim) throw DimensionMismatch("observable dimension differs from dim");
  return spectral_decompose(m);
}

inline BasisPair make_basis_pair(const json& v, int dim, std::uint64_t seed, const fs::path& base) {
  if (is_file_ref(v)) return make_basis_pair(load_ref(v, base), dim, seed, base);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "canonical") return canonical_qubit_pair();
    if (s == "random") return BasisPair(random_unitary(dim, seed ^ 0x1111ULL), random_unitary(dim, seed ^ 0x2222ULL));
    return BasisPair(computational_basis(dim), fourier_basis(dim));
  }
  auto bp = io::basis_pair_from_json(v);
  if (bp.dim() != dim) throw DimensionMismatch("basis pair dimension differs from dim");
  return bp;
}

inline Vector make_spinor(const json& v) {
  const double s = 1.0 / std::sqrt(2.0);
  Vector psi(2);
  if (v.is_string()) {
    const auto n = v.get<std::string>();
    if (n == "+x") psi << s, s;
    else if (n == "-x") psi << s, -s;
    else if (n == "+y") psi << s, cplx(0, s);
    else if (n == "-y") psi << s, cplx(0, -s);
    else if (n == "+z") psi << 1, 0;
    else psi << 0, 1;
    return psi;
  }
  psi = io::vector_from_json(v);
  if (psi.norm() < 1e-300) throw InvalidArgument("spinor has zero norm");
  return psi / psi.norm();
}

inline std::vector<double> doubles(const json& v) { return v.get<std::vector<double>>(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Execution

struct Check {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "abs_diff<=", "<", ">=", "true"
  bool pass = false;
};

class Report {
 public:
  explicit Report(fs::path out) : out_(std::move(out)) { fs::create_directories(out_); }

  void write(const std::string& name, const std::string& text) {
    io::write_text((out_ / name).string(), text);
    files_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void close_to(const std::string& name, double value, double target, double tol) {
    checks_.push_back({name, value, target, tol, "abs_diff<=", std::abs(value - target) <= tol});
  }
  void below(const std::string& name, double value, double bound) {
    checks_.push_back({name, value, bound, 0.0, "<", value < bound});
  }
  void at_least(const std::string& name, double value, double bound) {
    checks_.push_back({name, value, bound, 0.0, ">=", value >= bound});
  }
  void holds(const std::string& name, bool ok) { checks_.push_back({name, ok ? 1.0 : 0.0, 1.0, 0.0, "true", ok}); }
  void info(const std::string& key, json v) { info_[key] = std::move(v); }

  bool all_passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
  }
  const std::vector<Check>& checks() const { return checks_; }
  const std::vector<std::string>& files() const { return files_; }

  json summary(const ScenarioConfig& cfg) const {
    json checks = json::array();
    for (const auto& c : checks_) {
      json j{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"target", c.target}};
      if (c.relation == "abs_diff<=") j["tolerance"] = c.tolerance;
      j["pass"] = c.pass;
      checks.push_back(j);
    }
    return json{{"scenario", cfg.scenario}, {"params", cfg.params}, {"checks", checks},
                {"all_passed", all_passed()}, {"info", info_}};
  }

 private:
  fs::path out_;
  std::vector<std::string> files_;
  std::vector<Check> checks_;
  json info_ = json::object();
};

struct Manifest {
  std::vector<std::string> files;
  json summary;
  bool all_passed = false;
};

namespace scenario {

using detail::doubles;

inline void stern_gerlach(const json& p, Report& rep) {
  const double m = p.at("mass"), t1 = p.at("t1"), eps = p.at("epsilon"), sigma = p.at("sigma");
  const auto chi0 = GridProbe::gaussian(sigma, p.at("q_min"), p.at("q_max"), p.at("n_points").get<std::size_t>());
  const auto before = free_evolve(chi0, m, t1);
  const auto& chi1 = before.probe;
  const double expected_width = sigma * std::sqrt(1.0 + std::pow(t1 / (2 * m * sigma * sigma), 2));
  rep.close_to("width at t1- follows sigma sqrt(1 + (t/2m sigma^2)^2)", std::sqrt(chi1.variance_q()), expected_width, 1e-6);
  rep.holds("no boundary leak before t1", !before.boundary_leak);

  const auto up = boost(chi1, +eps);
  const auto down = boost(chi1, -eps);
  const auto up_f = free_evolve(up, m, t1);
  const auto down_f = free_evolve(down, m, t1);
  rep.holds("no boundary leak at 2 t1", !up_f.boundary_leak && !down_f.boundary_leak);
  rep.close_to("spin-up packet center at 2 t1", up_f.probe.mean_q(), eps * t1 / m, 1e-6);
  rep.close_to("spin-down packet center at 2 t1", down_f.probe.mean_q(), -eps * t1 / m, 1e-6);

  // momentum axis sorted ascending
  const std::size_t n = chi0.n_points();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = (k + n / 2) % n;

  json plots = json::array();
  const auto& spinors = p.at("spinors");
  for (std::size_t s = 0; s < spinors.size(); ++s) {
    const Vector psi = detail::make_spinor(spinors[s]);
    const double w_up = std::norm(psi(0));
    const double w_down = std::norm(psi(1));
    const std::string tag = "spinor" + std::to_string(s);

    std::vector<std::vector<double>> pos;
    for (std::size_t j = 0; j < n; ++j) {
      const double at_t1 = std::norm(chi1.amplitudes()[j]);
      const double after = w_up * std::norm(up.amplitudes()[j]) + w_down * std::norm(down.amplitudes()[j]);
      const double late = w_up * std::norm(up_f.probe.amplitudes()[j]) + w_down * std::norm(down_f.probe.amplitudes()[j]);
      pos.push_back({chi0.q(j), std::norm(chi0.amplitudes()[j]), at_t1, after, late});
    }
    rep.write("sg_" + tag + "_position.csv", io::table_csv({"z", "p_t0", "p_t1_minus", "p_t1_plus", "p_2t1"}, pos));

    const auto& ru = up.momentum_density();
    const auto& rd = down.momentum_density();
    std::vector<std::vector<double>> mom;
    double mass_up = 0.0, mass_down = 0.0, half_pos = 0.0;
    for (std::size_t idx : order) {
      const double pk = up.p(idx);
      mom.push_back({pk, w_up * ru[idx], w_down * rd[idx], w_up * ru[idx] + w_down * rd[idx]});
      mass_up += w_up * ru[idx];
      mass_down += w_down * rd[idx];
      if (pk > 0) half_pos += w_up * ru[idx] + w_down * rd[idx];
    }
    mass_up *= up.dp();
    mass_down *= up.dp();
    half_pos *= up.dp();
    rep.write("sg_" + tag + "_momentum.csv", io::table_csv({"p", "rho_up", "rho_down", "rho_total"}, mom));
    rep.close_to(tag + ": momentum branch mass (spin up) equals W+", mass_up, w_up, 1e-6);
    rep.close_to(tag + ": momentum branch mass (spin down) equals W-", mass_down, w_down, 1e-6);
    rep.info(tag + "_half_line_mass_p_gt_0", half_pos);
    rep.info(tag + "_born", json{{"W_plus", w_up}, {"W_minus", w_down}});
    plots.push_back(json{{"file", "sg_" + tag + "_position.csv"}, {"x", "z"}, {"y", {"p_t0", "p_t1_minus", "p_t1_plus", "p_2t1"}}});
    plots.push_back(json{{"file", "sg_" + tag + "_momentum.csv"}, {"x", "p"}, {"y", {"rho_up", "rho_down", "rho_total"}}});
  }
  rep.write_json("plots.json", plots);
}

inline void pointer_density(const json& p, Report& rep) {
  const auto eigs = doubles(p.at("eigenvalues"));
  const auto weights = doubles(p.at("weights"));
  const double eps = p.at("epsilon");
  const int n = static_cast<int>(eigs.size());
  const Matrix a_mat = Eigen::VectorXd::Map(eigs.data(), n).cast<cplx>().asDiagonal();
  const Observable a = spectral_decompose(a_mat);
  const Matrix rho_mat = Eigen::VectorXd::Map(weights.data(), n).cast<cplx>().asDiagonal();
  const DensityOperator rho(rho_mat);
  const double lo = *std::min_element(eigs.begin(), eigs.end());
  const double hi = *std::max_element(eigs.begin(), eigs.end());
  std::vector<double> sorted = eigs;
  std::sort(sorted.begin(), sorted.end());
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);

  json plots = json::array();
  const auto sigmas = doubles(p.at("sigma_q"));
  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    const double sq = sigmas[s];
    const ProbeState probe(GaussianProbe{sq});
    const auto grid = linspace(eps * lo - 8 * sq, eps * hi + 8 * sq, p.at("n_points").get<std::size_t>());
    const auto d = vnm::pointer_density(rho, a, probe, eps, grid, "A");
    const std::string tag = "sigma" + std::to_string(s);
    rep.write("pointer_density_" + tag + ".csv", io::pointer_density_csv(d));
    plots.push_back(json{{"file", "pointer_density_" + tag + ".csv"}, {"x", "q"}, {"y", "p"}, {"sigma_q", sq}});
    rep.close_to(tag + ": density integrates to 1", d.integral(), 1.0, 1e-6);
    const auto mom = pointer_moments(rho, a, probe, eps);
    std::vector<double> qy(d.values.size()), q2y(d.values.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      qy[i] = grid[i] * d.values[i];
      q2y[i] = grid[i] * grid[i] * d.values[i];
    }
    rep.close_to(tag + ": grid <Q> matches eps Tr(rho A)", trapezoid(qy, grid), mom.mean_q, 1e-5);
    rep.close_to(tag + ": grid <Q^2> matches eps^2 Tr(rho A^2) + sigma^2", trapezoid(q2y, grid), mom.second_moment_q, 1e-5);
    if (6 * sq < 0.5 * eps * gap) {
      // resolved peaks: integrate each window [eps a - eps gap/2, eps a + eps gap/2]
      for (int k = 0; k < n; ++k) {
        const double c = eps * a.eigenvalue(static_cast<std::size_t>(k));
        double mass = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
          const double mid = 0.5 * (grid[i] + grid[i - 1]);
          if (std::abs(mid - c) <= 0.5 * eps * gap) mass += 0.5 * (d.values[i] + d.values[i - 1]) * (grid[i] - grid[i - 1]);
        }
        const double w = born_probability(rho, a.projector(static_cast<std::size_t>(k)));
        rep.close_to(tag + ": peak at a = " + io::fmt17(a.eigenvalue(static_cast<std::size_t>(k))) + " carries its Born weight",
                     mass, w, 1e-6);
      }
    } else {
      const double center = mom.mean_q;
      double mx = 0.0, mn = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - center) <= sq) {
          mx = std::max(mx, d.values[i]);
          mn = std::min(mn, d.values[i]);
        }
      rep.below(tag + ": single broad hump (max/min over |Q - <Q>| <= sigma)", mx / mn, 2.0);
    }
  }
  rep.write_json("plots.json", plots);
}

inline void reduced_state(const json& p, Report& rep, const fs::path& base) {
  const int dim = p.at("dim");
  const std::uint64_t seed = p.at("seed");
  const auto rho = detail::make_state(p.at("state"), dim, seed, base);
  const auto a = detail::make_observable(p.at("observable"), dim, seed, base);
  const double sq = p.at("sigma_q");
  const ProbeState probe(GaussianProbe{sq});
  const auto lud = luders(rho, a);
  std::vector<std::vector<double>> rows;
  double prev_off = std::numeric_limits<double>::infinity();
  bool monotone = true;
  double worst_block = 0.0;
  json states = json::array();
  auto offdiag = [&](const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j)
        if (i != j) s += (a.projector(i) * m * a.projector(j)).norm();
    return s;
  };
  auto eps_list = doubles(p.at("epsilon"));
  std::vector<double> sorted_eps = eps_list;
  std::sort(sorted_eps.begin(), sorted_eps.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  for (double eps : sorted_eps) {
    const auto rf = reduced_state_after(rho, a, probe, eps);
    const double off = offdiag(rf.matrix());
    if (off > prev_off + 1e-15) monotone = false;
    prev_off = off;
    for (std::size_t k = 0; k < a.size(); ++k)
      worst_block = std::max(worst_block, max_abs(a.projector(k) * (rf.matrix() - rho.matrix()) * a.projector(k)));
    const double purity = (rf.matrix() * rf.matrix()).trace().real();
    const double dist = max_abs(rf.matrix() - lud.matrix());
    rows.push_back({eps, off, purity, dist});
    states.push_back(json{{"epsilon", eps}, {"rho_f", io::matrix_to_json(rf.matrix())}});
    if (eps == 0.0) rep.below("eps = 0 leaves the state unchanged", max_abs(rf.matrix() - rho.matrix()), 1e-15);
    if (std::abs(eps) / sq >= 1e3) rep.below("eps/sigma = " + io::fmt17(eps / sq) + ": equals the Lueders state", dist, 1e-12);
  }
  rep.holds("off-diagonal blocks damp monotonically with |eps|", monotone);
  rep.below("diagonal blocks unchanged", worst_block, 1e-12);
  rep.below("Lueders update is idempotent", max_abs(luders(lud, a).matrix() - lud.matrix()), 1e-12);
  rep.write("reduced_state.csv", io::table_csv({"epsilon", "offdiag_block_norm", "purity", "max_abs_to_luders"}, rows));
  rep.write_json("reduced_states.json", json{{"initial", io::matrix_to_json(rho.matrix())},
                                             {"luders", io::matrix_to_json(lud.matrix())}, {"after", states}});
}

inline void successive(const json& p, Report& rep, const fs::path& base) {
  const int dim = p.at("dim");
  const std::uint64_t seed = p.at("seed");
  const auto rho = detail::make_state(p.at("state"), dim, seed, base);
  const auto a = detail::make_observable(p.at("observable_a"), dim, seed ^ 0xA, base);
  const auto b = detail::make_observable(p.at("observable_b"), dim, seed ^ 0xB, base);
  const double s1 = p.at("sigma_q1"), s2 = p.at("sigma_q2"), e2 = p.at("epsilon2");
  const ProbeState p1(GaussianProbe{s1});
  const ProbeState p2(GaussianProbe{s2});
  const auto kw = kirkwood(rho, a, b);
  const auto wg = wigner_joint(rho, a, b);
  const auto mh = margenau_hill(rho, a, b);
  const double mh_route = mh.weighted_sum().real();
  const double sym_route = 0.5 * (rho.matrix() * (b.matrix() * a.matrix() + a.matrix() * b.matrix())).trace().real();

  std::vector<std::vector<double>> rows;
  for (double e1 : doubles(p.at("epsilon1"))) {
    const auto w = w_fn(rho, a, b, p1, e1);
    const double cqq = corr_qq(rho, a, b, p1, e1);
    rows.push_back({e1, cqq, corr_pq(rho, a, b, p1, e1), w.total().real(), w.total().imag()});
    rep.close_to("eps1 = " + io::fmt17(e1) + ": sum of W equals 1", std::abs(w.total() - 1.0), 0.0, 1e-10);
    if (e1 / s1 <= 1e-3) {
      rep.below("eps1/sigma = " + io::fmt17(e1 / s1) + ": W matches Kirkwood", max_abs(w.values - kw.values), 1e-6);
      rep.close_to("weak-limit corr_qq matches the Margenau-Hill route", cqq, mh_route, 1e-6);
    }
    if (e1 / s1 >= 1e3) rep.below("eps1/sigma = " + io::fmt17(e1 / s1) + ": W matches Wigner", max_abs(w.values - wg.values), 1e-5);
  }
  rep.close_to("Margenau-Hill route equals symmetrized-product route", mh_route, sym_route, 1e-10);
  rep.write("correlations.csv", io::table_csv({"epsilon1", "corr_qq", "corr_pq", "sum_w_re", "sum_w_im"}, rows));
  rep.write("kirkwood.csv", io::quasi_csv(kw));
  rep.write("wigner.csv", io::quasi_csv(wg));

  // joint densities at eps1 = sigma1
  const std::size_t gp = p.at("grid_points").get<std::size_t>();
  const double e1 = s1;
  auto span = [](const Observable& o, double e, double s) {
    return std::pair{e * o.eigenvalues().front() - 8 * s, e * o.eigenvalues().back() + 8 * s};
  };
  const auto [a_lo, a_hi] = span(a, e1, s1);
  const auto [b_lo, b_hi] = span(b, e2, s2);
  const auto g1 = linspace(std::min(a_lo, a_hi), std::max(a_lo, a_hi), gp);
  const auto g2 = linspace(std::min(b_lo, b_hi), std::max(b_lo, b_hi), gp);
  const auto jd = joint_pointer_density(rho, a, b, p1, p2, e1, e2, g1, g2);
  rep.close_to("joint density integrates to 1", jd.integral(), 1.0, 1e-5);
  rep.close_to("joint density <Q1 Q2>/(eps1 eps2) matches corr_qq",
               jd.moment([](double x, double y) { return x * y; }) / (e1 * e2), corr_qq(rho, a, b, p1, e1), 1e-4);
  const std::size_t stride = std::max<std::size_t>(1, gp / 128);
  rep.write("joint_density_ab.csv", io::density2d_csv(jd, stride));

  // repeated measurement in the strong-coupling regime
  const double s_strong = 0.01;
  const ProbeState ps(GaussianProbe{s_strong});
  const auto gs1 = linspace(a.eigenvalues().front() - 8 * s_strong, a.eigenvalues().back() + 8 * s_strong, 1024);
  const auto js = joint_pointer_density(rho, a, ps, ps, 1.0, 1.0, gs1, gs1);
  const double stripe = js.moment([](double x, double y) { return std::abs(x - y) < 0.1 ? 1.0 : 0.0; }) / js.integral();
  rep.at_least("B = A strong coupling: mass on the diagonal stripe", stripe, 0.99);
  rep.write("joint_density_aa_strong.csv", io::density2d_csv(js, 8));

  // correlation coefficient sweep (equal sigma/eps for both probes)
  std::vector<std::vector<double>> crow;
  double prev = -1.0;
  bool increasing = true;
  auto ratios = doubles(p.at("sigma_over_epsilon"));
  std::sort(ratios.begin(), ratios.end(), std::greater<>());
  for (double r : ratios) {
    const auto c = corr_coefficient(rho, a, ProbeState(GaussianProbe{r}), ProbeState(GaussianProbe{r}), 1.0, 1.0);
    if (c.value < prev) increasing = false;
    prev = c.value;
    crow.push_back({r, c.value});
  }
  rep.holds("correlation coefficient grows as sigma/eps decreases", increasing);
  rep.write("corr_coefficient.csv", io::table_csv({"sigma_over_epsilon", "C"}, crow));

  // weak value
  const Vector phi = io::vector_from_json(p.at("postselection"));
  if (phi.size() == dim) {
    const auto we = doubles(p.at("weak_epsilons"));
    const auto wv = weak_value_from_probes(rho, a, phi, GaussianProbe{s1}, we);
    rep.close_to("weak value real part from probes", wv.estimate.real(), wv.weak_value.real(), 1e-6);
    rep.close_to("weak value imaginary part from probes", wv.estimate.imag(), wv.weak_value.imag(), 1e-6);
    rep.info("weak_value", json{{"direct_re", wv.weak_value.real()}, {"direct_im", wv.weak_value.imag()},
                                {"estimate_re", wv.estimate.real()}, {"estimate_im", wv.estimate.imag()}});
  } else {
    throw DimensionMismatch("postselection vector length differs from dim");
  }
}

inline void quasi_distributions(const json& p, Report& rep, const fs::path& base) {
  const std::uint64_t seed = p.at("seed");
  const auto& bpj = p.at("basis_pair");
  const auto ea = doubles(p.at("a_eigenvalues"));
  const int dim = static_cast<int>(ea.size());
  const auto bp = detail::make_basis_pair(bpj, dim, seed, base);
  const Observable a = basis_observable(bp.basis_k(), ea);
  const Observable b = basis_observable(bp.basis_mu(), doubles(p.at("b_eigenvalues")));
  const std::size_t wm = p.at("witness_m").get<std::size_t>();
  const std::size_t wn = p.at("witness_n").get<std::size_t>();
  const auto wit = negativity_witness(a, b, wm, wn);
  const DensityOperator rho = p.at("state") == "witness" ? DensityOperator::pure(wit.witness_state)
                                                        : detail::make_state(p.at("state"), dim, seed, base);
  const ProbeState probe(GaussianProbe{p.at("sigma_q").get<double>()});
  const double sq = p.at("sigma_q");
  const auto kw = kirkwood(rho, a, b);
  const auto wg = wigner_joint(rho, a, b);
  const auto mh = margenau_hill(rho, a, b);
  rep.write("kirkwood.csv", io::quasi_csv(kw));
  rep.write("wigner.csv", io::quasi_csv(wg));
  rep.write("margenau_hill.csv", io::quasi_csv(mh));
  rep.info("S_mn", json{{"m", wm}, {"n", wn}, {"matrix", io::matrix_to_json(symmetrized_product(a, b, wm, wn))}});
  rep.info("witness_min_eigenvalue", wit.min_eigenvalue);
  rep.close_to("MH entry (m, n) in the witness state equals the min eigenvalue of S_mn",
               mh.values(static_cast<Eigen::Index>(wm), static_cast<Eigen::Index>(wn)).real(),
               (wit.witness_state.adjoint() * symmetrized_product(a, b, wm, wn) * wit.witness_state)(0).real(), 1e-12);
  if (p.at("state") == "witness") {
    rep.close_to("MH entry equals the witness eigenvalue", mh.values(static_cast<Eigen::Index>(wm), static_cast<Eigen::Index>(wn)).real(),
                 wit.min_eigenvalue, 1e-12);
    rep.close_to("weak-limit corr_qq equals sum a b MH", corr_qq(rho, a, b, probe, 0.0), mh.weighted_sum().real(), 1e-12);
  }
  rep.close_to("Kirkwood sums to 1", std::abs(kw.total() - 1.0), 0.0, 1e-10);
  double wmin = 0.0;
  for (Eigen::Index i = 0; i < wg.values.size(); ++i) wmin = std::min(wmin, wg.values(i).real());
  rep.at_least("Wigner table is non-negative", wmin, -1e-12);
  for (double e1 : doubles(p.at("epsilon1"))) {
    const auto w = w_fn(rho, a, b, probe, e1);
    const std::string tag = "w_eps" + io::fmt17(e1);
    rep.write(tag + ".csv", io::quasi_csv(w));
    if (e1 / sq <= 1e-3) rep.below(tag + " matches Kirkwood", max_abs(w.values - kw.values), 1e-6);
    if (e1 / sq >= 1e3) rep.below(tag + " matches Wigner", max_abs(w.values - wg.values), 1e-5);
  }
}

inline void tomography(const json& p, Report& rep, const fs::path& base) {
  const int dim = p.at("dim");
  const std::uint64_t seed = p.at("seed");
  const auto rho = detail::make_state(p.at("state"), dim, seed, base);
  const auto bp = detail::make_basis_pair(p.at("basis_pair"), dim, seed, base);
  const ProbeState probe(GaussianProbe{p.at("sigma_q").get<double>()});
  const double e1 = p.at("epsilon1");
  const auto cs = simulate_correlations(rho, bp, probe, e1);
  const auto lp = lambda_pair(probe, e1);
  const auto rec = reconstruct(cs, lp);
  rep.write_json("correlations.json", io::correlation_set_to_json(cs));
  rep.write_json("reconstruction.json", io::reconstruction_to_json(rec));
  rep.write_json("state.json", io::matrix_to_json(rho.matrix()));
  rep.below("round-trip max-abs error", max_abs(rec.rho - rho.matrix()), 1e-10);
  rep.below("sum of x equals 1", std::abs(cs.x.sum() - 1.0), 1e-10);
  if (dim == 2 && max_abs(bp.basis_k() - computational_basis(2)) < 1e-15 &&
      max_abs(bp.basis_mu() - canonical_qubit_pair().basis_mu()) < 1e-15) {
    const auto mini = reconstruct_n2_minimal(cs.x(0, 0), cs.x(1, 0), recover_y(cs, lp)(1, 0), lp.lambda.real());
    rep.below("three-correlation N = 2 path agrees with the full inversion", max_abs(mini.matrix() - rec.rho), 1e-12);
  }
}

inline void ensemble_tomography(const json& p, Report& rep, const fs::path& base) {
  const int dim = p.at("dim");
  const std::uint64_t seed = p.at("seed");
  const auto rho = detail::make_state(p.at("state"), dim, seed, base);
  const auto bp = detail::make_basis_pair(p.at("basis_pair"), dim, seed, base);
  const GaussianProbe g1{p.at("sigma_q1").get<double>()};
  const GaussianProbe g2{p.at("sigma_q2").get<double>()};
  const double e1 = p.at("epsilon1"), e2 = p.at("epsilon2");
  const auto n = p.at("n_per_setting").get<std::size_t>();
  EnsembleGrid grid;
  grid.points = p.at("grid_points").get<std::size_t>();
  const auto est = vnm::ensemble_tomography(rho, bp, g1, g2, e1, e2, n, seed, grid);
  const ProbeState probe1(g1);
  const auto exact = simulate_correlations(rho, bp, probe1, e1);
  const auto rec = reconstruct(est.correlations, lambda_pair(probe1, e1));
  std::vector<std::vector<double>> rows;
  int inside = 0;
  for (int mu = 0; mu < dim; ++mu)
    for (int k = 0; k < dim; ++k) {
      rows.push_back({static_cast<double>(mu), static_cast<double>(k), exact.x(mu, k), est.correlations.x(mu, k),
                      est.x_std_error(mu, k), exact.y_tilde(mu, k), est.correlations.y_tilde(mu, k),
                      est.y_tilde_std_error(mu, k)});
      if (std::abs(est.correlations.x(mu, k) - exact.x(mu, k)) <= 4 * est.x_std_error(mu, k)) ++inside;
    }
  rep.write("estimates.csv", io::table_csv({"mu", "k", "x_exact", "x_hat", "x_se", "y_tilde_exact", "y_tilde_hat", "y_tilde_se"}, rows));
  json cj = io::correlation_set_to_json(est.correlations);
  cj["x_std_error"] = io::real_table(est.x_std_error);
  cj["y_tilde_std_error"] = io::real_table(est.y_tilde_std_error);
  cj["n_per_setting"] = n;
  cj["seed"] = seed;
  rep.write_json("correlations.json", cj);
  rep.write_json("reconstruction.json", io::reconstruction_to_json(rec));
  rep.write_json("state.json", io::matrix_to_json(rho.matrix()));
  const double frob = (rec.rho - rho.matrix()).norm();
  rep.info("frobenius_error", frob);
  if (n >= 1000000) rep.below("Frobenius reconstruction error", frob, 0.05);
  rep.at_least("fraction of x entries within 4 standard errors", static_cast<double>(inside) / (dim * dim), 0.75);
}

inline void conditioning_sweep(const json& p, Report& rep, const fs::path& base) {
  const int dim = p.at("dim");
  const std::uint64_t seed = p.at("seed");
  const auto rho = detail::make_state(p.at("state"), dim, seed, base);
  const auto bp = detail::make_basis_pair(p.at("basis_pair"), dim, seed, base);
  const double sq = p.at("sigma_q");
  std::vector<double> eps = doubles(p.at("epsilon1"));
  std::sort(eps.begin(), eps.end());
  const auto rows = conditioning_report(rho, bp, GaussianProbe{sq}, eps, p.at("noise_level").get<double>(),
                                        p.at("trials").get<int>(), seed);
  std::vector<std::vector<double>> out;
  bool monotone = true;
  double prev = -1.0;
  for (const auto& r : rows) {
    out.push_back({r.epsilon1, r.epsilon1 / sq, r.lambda, r.mean_error, r.std_error, r.conditioning_warning ? 1.0 : 0.0});
    if (r.epsilon1 / sq >= 1.0) {
      if (r.mean_error < prev) monotone = false;
      prev = r.mean_error;
    }
  }
  rep.write("conditioning.csv", io::table_csv({"epsilon1", "epsilon1_over_sigma", "lambda", "mean_error", "std_error", "warning"}, out));
  rep.holds("error non-decreasing in eps1/sigma beyond 1", monotone);
  auto find = [&](double ratio) -> const ConditioningRow* {
    for (const auto& r : rows)
      if (std::abs(r.epsilon1 / sq - ratio) < 1e-12) return &r;
    return nullptr;
  };
  const auto* weak = find(0.5);
  const auto* strong = find(5.0);
  if (weak && strong) {
    rep.at_least("error ratio eps/sigma = 5 over 0.5 reaches exp((25 - 0.25)/8)/2",
                 strong->mean_error / weak->mean_error, std::exp((25.0 - 0.25) / 8.0) / 2.0);
  }
}

inline void transform_check(const json& p, Report& rep, const fs::path& base) {
  const int dim = p.at("dim");
  const std::uint64_t seed = p.at("seed");
  const auto bp = detail::make_basis_pair(p.at("basis_pair"), dim, seed, base);
  const double sq = p.at("sigma_q");
  const ProbeState probe(GaussianProbe{sq});
  const int count = p.at("instances");
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  double worst_im = 0.0;
  for (int i = 0; i < count; ++i) {
    const auto rho = random_density(dim, derive_seed(seed, {static_cast<std::uint64_t>(i), 1}));
    const Matrix o = random_hermitian(dim, derive_seed(seed, {static_cast<std::uint64_t>(i), 2}));
    const double direct = (rho.matrix() * o).trace().real();
    for (double r : doubles(p.at("epsilon1_over_sigma"))) {
      const auto q = expectation_via_quasi(rho, o, bp, probe, r * sq);
      worst = std::max(worst, std::abs(q.value - direct));
      worst_im = std::max(worst_im, q.imaginary_residual);
      rows.push_back({static_cast<double>(i), r, direct, q.value, std::abs(q.value - direct), q.imaginary_residual});
    }
  }
  rep.write("transform.csv", io::table_csv({"instance", "epsilon1_over_sigma", "direct", "via_quasi", "abs_error", "imag_residual"}, rows));
  rep.below("max |sum W11 O(mu,k) - Tr(rho O)|", worst, 1e-9);
  rep.below("max imaginary residual", worst_im, 1e-9);
}

}  // namespace scenario

/// Executes a validated scenario and writes summary.json and manifest.json.
inline Manifest run(const ScenarioConfig& cfg, const fs::path& out_dir) {
  Report rep(out_dir);
  const auto& p = cfg.params;
  const auto& s = cfg.scenario;
  if (s == "stern-gerlach") scenario::stern_gerlach(p, rep);
  else if (s == "pointer-density") scenario::pointer_density(p, rep);
  else if (s == "reduced-state") scenario::reduced_state(p, rep, cfg.base_dir);
  else if (s == "successive") scenario::successive(p, rep, cfg.base_dir);
  else if (s == "quasi-distributions") scenario::quasi_distributions(p, rep, cfg.base_dir);
  else if (s == "tomography") scenario::tomography(p, rep, cfg.base_dir);
  else if (s == "ensemble-tomography") scenario::ensemble_tomography(p, rep, cfg.base_dir);
  else if (s == "conditioning-sweep") scenario::conditioning_sweep(p, rep, cfg.base_dir);
  else if (s == "transform-check") scenario::transform_check(p, rep, cfg.base_dir);
  else throw InvalidArgument("unknown scenario '" + s + "'");

  Manifest m;
  m.summary = rep.summary(cfg);
  rep.write_json("summary.json", m.summary);
  m.files = rep.files();
  m.files.push_back("manifest.json");
  m.all_passed = rep.all_passed();
  io::write_text((out_dir / "manifest.json").string(), json{{"scenario", s}, {"files", m.files}}.dump(2) + "\n");
  return m;
}

}  // namespace vnm::cli
