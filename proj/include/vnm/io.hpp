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

// JSON and CSV serialization. CSV numbers use 17 significant digits so that
// repeated runs diff byte-for-byte.

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vnm/core_hilbert.hpp"
#include "vnm/errors.hpp"
#include "vnm/probe.hpp"
#include "vnm/sampler.hpp"
#include "vnm/single_meas.hpp"
#include "vnm/successive_meas.hpp"
#include "vnm/tomography.hpp"

namespace vnm::io {

using json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Matrices: {"dim": N, "re": [[...]], "im": [[...]]}

template <typename M>
json matrix_to_json(const M& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json rr = json::array();
    json ri = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const cplx v(m(r, c));
      rr.push_back(v.real());
      ri.push_back(v.imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return json{{"dim", m.rows()}, {"re", re}, {"im", im}};
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("re")) throw InvalidArgument("matrix JSON needs \"re\" (and optionally \"im\")");
  const auto& re = j.at("re");
  const auto n = static_cast<Eigen::Index>(re.size());
  if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != n) throw DimensionMismatch("\"dim\" disagrees with \"re\"");
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(re[r].size()) != n) throw DimensionMismatch("matrix rows must have N entries");
    for (Eigen::Index c = 0; c < n; ++c) {
      const double im = j.contains("im") ? j.at("im")[r][c].get<double>() : 0.0;
      m(r, c) = cplx(re[r][c].get<double>(), im);
    }
  }
  return m;
}

inline json vector_to_json(const Vector& v) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return json{{"re", re}, {"im", im}};
}

inline Vector vector_from_json(const json& j) {
  if (!j.is_object() || !j.contains("re")) throw InvalidArgument("vector JSON needs \"re\" (and optionally \"im\")");
  const auto& re = j.at("re");
  Vector v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) {
    const double im = j.contains("im") ? j.at("im")[i].get<double>() : 0.0;
    v(static_cast<Eigen::Index>(i)) = cplx(re[i].get<double>(), im);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Probes

inline json probe_to_json(const ProbeState& p) {
  if (p.is_gaussian()) return json{{"sigma_q", p.gaussian().sigma_q}};
  const auto& g = p.grid();
  json re = json::array();
  json im = json::array();
  for (const auto& a : g.amplitudes()) {
    re.push_back(a.real());
    im.push_back(a.imag());
  }
  return json{{"q_min", g.q_min()}, {"q_max", g.q_max()}, {"n_points", g.n_points()}, {"re", re}, {"im", im}};
}

inline ProbeState probe_from_json(const json& j) {
  if (j.contains("sigma_q")) return ProbeState(GaussianProbe(j.at("sigma_q").get<double>()));
  const auto n = j.at("n_points").get<std::size_t>();
  const auto& re = j.at("re");
  if (re.size() != n) throw InvalidProbe("amplitude count differs from n_points");
  std::vector<cplx> a(n);
  for (std::size_t i = 0; i < n; ++i)
    a[i] = cplx(re[i].get<double>(), j.contains("im") ? j.at("im")[i].get<double>() : 0.0);
  return ProbeState(GridProbe(j.at("q_min").get<double>(), j.at("q_max").get<double>(), std::move(a)));
}

// ---------------------------------------------------------------------------
// Module results

inline json moments_to_json(const PointerMoments& m) {
  return json{{"mean_q", m.mean_q}, {"second_moment_q", m.second_moment_q}, {"epsilon", m.epsilon}};
}

inline json basis_pair_to_json(const BasisPair& bp) {
  return json{{"basis_k", matrix_to_json(bp.basis_k())}, {"basis_mu", matrix_to_json(bp.basis_mu())}};
}

inline BasisPair basis_pair_from_json(const json& j) {
  return BasisPair(matrix_from_json(j.at("basis_k")), matrix_from_json(j.at("basis_mu")));
}

inline json real_table(const RealMatrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

inline RealMatrix real_table_from_json(const json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  RealMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

inline json correlation_set_to_json(const CorrelationSet& cs) {
  return json{{"epsilon1", cs.epsilon1},
              {"sigma_q1", cs.sigma_q1},
              {"x", real_table(cs.x)},
              {"y_tilde", real_table(cs.y_tilde)},
              {"basis_pair", basis_pair_to_json(cs.basis_pair)}};
}

inline CorrelationSet correlation_set_from_json(const json& j) {
  return CorrelationSet{basis_pair_from_json(j.at("basis_pair")), j.at("epsilon1").get<double>(),
                        j.at("sigma_q1").get<double>(), real_table_from_json(j.at("x")),
                        real_table_from_json(j.at("y_tilde"))};
}

inline json reconstruction_to_json(const Reconstruction& r) {
  json j = matrix_to_json(r.rho);
  j["pre_repair_hermiticity_residual"] = r.pre_repair_hermiticity_residual;
  j["trace_residual"] = r.trace_residual;
  j["conditioning_warning"] = r.conditioning_warning;
  j["min_eigenvalue"] = r.min_eigenvalue;
  return j;
}

inline json ensemble_result_to_json(const EnsembleResult& r) {
  return json{{"n", r.n_samples}, {"mean", r.mean}, {"std_error", r.std_error}, {"seed", r.seed}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string pointer_density_csv(const PointerDensity& d) {
  std::string s = "q,p\n";
  for (std::size_t i = 0; i < d.q_grid.size(); ++i) s += fmt17(d.q_grid[i]) + "," + fmt17(d.values[i]) + "\n";
  return s;
}

inline std::string quasi_csv(const QuasiDistribution& q) {
  std::string s = "m,n,b_m,a_n,re,im\n";
  for (Eigen::Index m = 0; m < q.values.rows(); ++m)
    for (Eigen::Index n = 0; n < q.values.cols(); ++n) {
      s += std::to_string(m) + "," + std::to_string(n) + "," + fmt17(q.eigenvalues_b[static_cast<std::size_t>(m)]) +
           "," + fmt17(q.eigenvalues_a[static_cast<std::size_t>(n)]) + "," + fmt17(q.values(m, n).real()) + "," +
           fmt17(q.values(m, n).imag()) + "\n";
    }
  return s;
}

/// Long-format 2D density; `stride` thins both axes for plotting.
inline std::string density2d_csv(const Density2D& d, std::size_t stride = 1) {
  std::string s = "q1,q2,p\n";
  for (std::size_t i = 0; i < d.q1.size(); i += stride)
    for (std::size_t j = 0; j < d.q2.size(); j += stride)
      s += fmt17(d.q1[i]) + "," + fmt17(d.q2[j]) + "," + fmt17(d.at(i, j)) + "\n";
  return s;
}

inline std::string samples_csv(const Samples& smp) {
  std::string s = "q1,q2\n";
  for (std::size_t i = 0; i < smp.size(); ++i) s += fmt17(smp.q1[i]) + "," + fmt17(smp.q2[i]) + "\n";
  return s;
}

/// Generic table with a header row.
inline std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t c = 0; c < header.size(); ++c) s += (c ? "," : "") + header[c];
  s += "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) s += (c ? "," : "") + fmt17(r[c]);
    s += "\n";
  }
  return s;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + path);
  f << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace vnm::io
