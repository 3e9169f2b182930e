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

// Single von Neumann measurement: a probe coupled through eps * A (x) P.
// Everything except pointer_density is closed form in the Born weights and
// the probe characteristic function g.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vnm/core_hilbert.hpp"
#include "vnm/errors.hpp"
#include "vnm/probe.hpp"

namespace vnm {

/// Born weights W_n = Tr(rho P_n) in the order of A's eigenvalues.
inline std::vector<double> born_weights(const DensityOperator& rho, const Observable& a) {
  if (rho.dim() != a.dim()) throw DimensionMismatch("state and observable dimensions differ");
  std::vector<double> w(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) w[n] = born_probability(rho, a.projector(n));
  return w;
}

/// Trapezoid rule on an arbitrary (sorted) abscissa.
inline double trapezoid(std::span<const double> y, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

struct PointerDensity {
  std::vector<double> q_grid;
  std::vector<double> values;
  double epsilon = 0.0;
  std::string observable_tag;

  double integral() const { return trapezoid(values, q_grid); }
};

/// Throws GridTooNarrow unless [lo, hi] is covered by the grid.
inline void require_span(std::span<const double> grid, double lo, double hi, const char* what) {
  if (grid.size() < 2) throw GridTooNarrow(std::string(what) + ": grid needs at least two points");
  const double slack = 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (grid.front() > lo + slack || grid.back() < hi - slack) {
    throw GridTooNarrow(std::string(what) + ": grid [" + std::to_string(grid.front()) + ", " +
                        std::to_string(grid.back()) + "] does not span [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
  }
}

/// p_f(Q) = sum_n W_n p0(Q - eps a_n).
inline PointerDensity pointer_density(const DensityOperator& rho, const Observable& a, const ProbeState& probe,
                                      double epsilon, std::span<const double> q_grid,
                                      std::string tag = "A") {
  const auto w = born_weights(rho, a);
  const double s = sigma_q(probe);
  const double c0 = epsilon * a.eigenvalues().front();
  const double c1 = epsilon * a.eigenvalues().back();
  require_span(q_grid, std::min(c0, c1) - 6 * s, std::max(c0, c1) + 6 * s, "pointer_density");
  PointerDensity out{std::vector<double>(q_grid.begin(), q_grid.end()), std::vector<double>(q_grid.size(), 0.0),
                     epsilon, std::move(tag)};
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (w[n] == 0.0) continue;
    const double shift = epsilon * a.eigenvalue(n);
    for (std::size_t i = 0; i < q_grid.size(); ++i) out.values[i] += w[n] * position_density_at(probe, q_grid[i] - shift);
  }
  return out;
}

struct PointerMoments {
  double mean_q = 0.0;
  double second_moment_q = 0.0;
  double epsilon = 0.0;
};

/// <Q>_f = eps Tr(rho A), <Q^2>_f = eps^2 Tr(rho A^2) + sigma_Q^2.
inline PointerMoments pointer_moments(const DensityOperator& rho, const Observable& a, const ProbeState& probe,
                                      double epsilon) {
  const auto w = born_weights(rho, a);
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    m1 += w[n] * a.eigenvalue(n);
    m2 += w[n] * a.eigenvalue(n) * a.eigenvalue(n);
  }
  return {epsilon * m1, epsilon * epsilon * m2 + position_variance(probe), epsilon};
}

/// p~_f(k) = sum_n W_n exp(i k eps a_n) * p~_0(k).
inline cplx pointer_charfn(const DensityOperator& rho, const Observable& a, const ProbeState& probe, double epsilon,
                           double k) {
  const auto w = born_weights(rho, a);
  cplx s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += w[n] * std::exp(kI * k * epsilon * a.eigenvalue(n));
  return s * position_charfn(probe, k);
}

/// rho_f = sum_{n n'} g(eps (a_n - a_n')) P_n rho P_n'.
inline DensityOperator reduced_state_after(const DensityOperator& rho, const Observable& a, const ProbeState& probe,
                                           double epsilon) {
  if (rho.dim() != a.dim()) throw DimensionMismatch("state and observable dimensions differ");
  const int d = rho.dim();
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t n = 0; n < a.size(); ++n) {
    const Matrix left = a.projector(n) * rho.matrix();
    for (std::size_t m = 0; m < a.size(); ++m) {
      const cplx g = n == m ? cplx(1.0) : char_g(probe, epsilon * (a.eigenvalue(n) - a.eigenvalue(m)));
      if (g == 0.0) continue;
      out += g * (left * a.projector(m));
    }
  }
  return DensityOperator(out);
}

/// Non-selective projective (Lueders) update sum_n P_n rho P_n.
inline DensityOperator luders(const DensityOperator& rho, const Observable& a) {
  if (rho.dim() != a.dim()) throw DimensionMismatch("state and observable dimensions differ");
  Matrix out = Matrix::Zero(rho.dim(), rho.dim());
  for (const auto& p : a.projectors()) out += p * rho.matrix() * p;
  return DensityOperator(out);
}

/// <Q>_f / eps for the two-outcome observable {0: I - P, 1: P}; equals Tr(rho P).
inline double projector_yes_probability(const DensityOperator& rho, const Matrix& proj, const ProbeState& probe,
                                        double epsilon) {
  if (!is_projector(proj)) throw NotAProjector("matrix is not a Hermitian idempotent");
  if (epsilon == 0.0) throw InvalidArgument("epsilon must be non-zero");
  const auto m = pointer_moments(rho, projector_observable(proj), probe, epsilon);
  return m.mean_q / epsilon;
}

enum class ProbeReadout { position, momentum };

struct QndReport {
  bool info_gain = false;
  bool nondemolition = false;
  std::map<std::string, double> residuals;
  std::string note;
};

/// Static commutator analysis of V = eps A_s (x) P with H_s = 0.
/// [V, Q] = -i eps A_s (x) 1, so its norm is |eps| * ||A_s||; [V, P] = 0.
inline QndReport qnd_check(const Matrix& a_s, ProbeReadout readout, double coupling_sign) {
  if (a_s.rows() != a_s.cols()) throw DimensionMismatch("A_s must be square");
  if (hermiticity_residual(a_s) > 1e-10) throw NonHermitianInput("A_s is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(a_s), Eigen::EigenvaluesOnly);
  const double a_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  const double eps = coupling_sign == 0.0 ? 1.0 : std::abs(coupling_sign);
  const Matrix h_s = Matrix::Zero(a_s.rows(), a_s.cols());

  QndReport r;
  r.residuals["[V,Q]"] = eps * a_norm;
  r.residuals["[V,P]"] = 0.0;
  r.residuals["[V,A_s]"] = eps * max_abs(a_s * a_s - a_s * a_s);
  r.residuals["[H_s,A_s]"] = max_abs(h_s * a_s - a_s * h_s);
  r.nondemolition = r.residuals["[V,A_s]"] < 1e-12 && r.residuals["[H_s,A_s]"] < 1e-12;
  if (readout == ProbeReadout::position) {
    r.info_gain = r.residuals["[V,Q]"] > 1e-12;
    r.note = "position readout: the coupling displaces Q by eps * a_n";
  } else {
    r.info_gain = a_norm > 1e-12;
    r.note =
        "momentum readout: [V,P] = 0, information reaches P through the kinetic-energy term "
        "after free spreading (dynamical pathway, not a static commutator)";
  }
  return r;
}

}  // namespace vnm
