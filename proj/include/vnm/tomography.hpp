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

// State reconstruction from successive projector measurements over a pair of
// mutually non-orthogonal bases: A = |k><k| (probe 1), B = |mu)(mu| (probe 2).
// Tables are indexed (mu, k).

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "vnm/core_hilbert.hpp"
#include "vnm/errors.hpp"
#include "vnm/probe.hpp"
#include "vnm/rng.hpp"

namespace vnm {

struct CorrelationSet {
  BasisPair basis_pair;
  double epsilon1 = 0.0;
  double sigma_q1 = 0.0;
  RealMatrix x;        // x(mu, k) = <Q1 Q2> / (eps1 eps2)
  RealMatrix y_tilde;  // y~(mu, k) = <P1 Q2> / (eps1 eps2 2 <P1^2>)

  /// max_k of the amount by which sum_mu x(mu, k) leaves [0, 1], and |sum x - 1|.
  double diagonal_residual() const {
    double worst = std::abs(x.sum() - 1.0);
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double s = x.col(k).sum();
      worst = std::max({worst, -s, s - 1.0});
    }
    return std::max(0.0, worst);
  }
};

struct LambdaPair {
  cplx lambda{1.0, 0.0};
  cplx lambda_tilde{1.0, 0.0};
};

inline LambdaPair lambda_pair(const ProbeState& probe1, double epsilon1) {
  return {lambda_fn(probe1, epsilon1), lambda_tilde_fn(probe1, epsilon1)};
}

/// G_{kk'} = 1 on the diagonal, lambda off it.
inline cplx g_factor(cplx lambda, int k, int k_prime) { return k == k_prime ? cplx(1.0) : lambda; }

/// W11 = Tr(rho P_k P_mu P_k) + lambda sum_{k' != k} Tr(rho P_k' P_mu P_k)
///     = sum_k' G_{kk'} <k|rho|k'> <k'|mu) (mu|k>.
inline cplx w11_forward(const DensityOperator& rho, const BasisPair& bp, int k, int mu, cplx lambda) {
  if (rho.dim() != bp.dim()) throw DimensionMismatch("state and basis pair dimensions differ");
  const int n = bp.dim();
  if (k < 0 || k >= n || mu < 0 || mu >= n) throw InvalidArgument("index out of range");
  const Matrix rho_k = bp.basis_k().adjoint() * rho.matrix() * bp.basis_k();  // <k|rho|k'>
  cplx s = 0.0;
  for (int kp = 0; kp < n; ++kp) s += g_factor(lambda, k, kp) * rho_k(k, kp) * std::conj(bp.overlap(mu, kp)) * bp.overlap(mu, k);
  return s;
}

/// Full W11 table (mu, k) for a given lambda.
inline Matrix w11_table(const DensityOperator& rho, const BasisPair& bp, cplx lambda) {
  if (rho.dim() != bp.dim()) throw DimensionMismatch("state and basis pair dimensions differ");
  const int n = bp.dim();
  const Matrix rho_k = bp.basis_k().adjoint() * rho.matrix() * bp.basis_k();
  Matrix w = Matrix::Zero(n, n);
  for (int mu = 0; mu < n; ++mu)
    for (int k = 0; k < n; ++k) {
      cplx s = 0.0;
      for (int kp = 0; kp < n; ++kp)
        s += g_factor(lambda, k, kp) * rho_k(k, kp) * std::conj(bp.overlap(mu, kp));
      w(mu, k) = s * bp.overlap(mu, k);
    }
  return w;
}

/// Exact-expectation forward model: x = Re W11(lambda), y~ = Im W11(lambda~).
inline CorrelationSet simulate_correlations(const DensityOperator& rho, const BasisPair& bp,
                                            const ProbeState& probe1, double epsilon1) {
  const auto lp = lambda_pair(probe1, epsilon1);
  return {bp, epsilon1, sigma_q(probe1), w11_table(rho, bp, lp.lambda).real(),
          w11_table(rho, bp, lp.lambda_tilde).imag()};
}

/// Recovers y = Im W11 from x and y~.
inline RealMatrix recover_y(const CorrelationSet& cs, const LambdaPair& lp) {
  const cplx prod = lp.lambda * std::conj(lp.lambda_tilde);
  if (std::abs(prod.real()) <= 1e-12) {
    throw SingularInversion("Re(lambda lambda~*) vanishes: the probe carries no invertible information");
  }
  const int n = cs.basis_pair.dim();
  RealMatrix y(n, n);
  const double c_x = prod.imag() / prod.real();
  const double c_y = std::norm(lp.lambda) / prod.real();
  for (int k = 0; k < n; ++k) {
    const double diag = cs.x.col(k).sum();
    for (int mu = 0; mu < n; ++mu) {
      const double d = std::norm(cs.basis_pair.overlap(mu, k)) * diag;
      y(mu, k) = c_x * (cs.x(mu, k) - d) + c_y * cs.y_tilde(mu, k);
    }
  }
  return y;
}

struct Reconstruction {
  Matrix rho;  // Hermitized and trace-normalized, in the computational basis
  Matrix rho_k;  // same matrix in the |k> basis
  double pre_repair_hermiticity_residual = 0.0;
  double trace_residual = 0.0;
  bool conditioning_warning = false;  // |lambda| < 1e-3: off-diagonals amplified by 1/|lambda|
  double min_eigenvalue = 0.0;

  /// Validated DensityOperator (throws InvalidDensity when noise broke positivity).
  DensityOperator to_density() const { return DensityOperator(rho); }
};

/// <k|rho|k'> = sum_mu W11(mu, k) / G_{kk'} * (mu|k') / (mu|k).
inline Reconstruction reconstruct_from_w11(const Matrix& w11, const BasisPair& bp, cplx lambda) {
  if (std::abs(lambda) <= 1e-12 && bp.dim() > 1) throw SingularInversion("lambda vanishes: G is singular");
  const int n = bp.dim();
  Matrix rk(n, n);
  for (int k = 0; k < n; ++k)
    for (int kp = 0; kp < n; ++kp) {
      cplx s = 0.0;
      for (int mu = 0; mu < n; ++mu) s += w11(mu, k) * bp.overlap(mu, kp) / bp.overlap(mu, k);
      rk(k, kp) = s / g_factor(lambda, k, kp);
    }
  Reconstruction r;
  r.pre_repair_hermiticity_residual = hermiticity_residual(rk);
  r.trace_residual = std::abs(rk.trace() - 1.0);
  r.conditioning_warning = n > 1 && std::abs(lambda) < 1e-3;
  Matrix h = hermitize(rk);
  const double tr = h.trace().real();
  if (std::abs(tr) > 1e-300) h /= tr;
  r.rho_k = h;
  r.rho = hermitize(bp.basis_k() * h * bp.basis_k().adjoint());
  r.min_eigenvalue = min_eigenvalue(r.rho);
  return r;
}

inline Reconstruction reconstruct(const CorrelationSet& cs, const LambdaPair& lp) {
  const RealMatrix y = recover_y(cs, lp);
  Matrix w(cs.x.rows(), cs.x.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = cplx(cs.x(i, j), y(i, j));
  return reconstruct_from_w11(w, cs.basis_pair, lp.lambda);
}

/// Minimal N = 2 inversion for the pair {|0>,|1>} / {|+),|-)} (mu = 0 is |+)):
/// rho00 = x+0 + x-0, rho01 = (x+0 - x-0 - 2i y-0) / g.
inline DensityOperator reconstruct_n2_minimal(double x_plus0, double x_minus0, double y_minus0, double g_eps) {
  if (!(std::abs(g_eps) > 1e-12)) throw SingularInversion("g(eps1) vanishes");
  Matrix m(2, 2);
  const double r00 = x_plus0 + x_minus0;
  const cplx r01 = cplx(x_plus0 - x_minus0, -2.0 * y_minus0) / g_eps;
  m << r00, r01, std::conj(r01), 1.0 - r00;
  return DensityOperator(m);
}

/// O(mu, k) = sum_k' (mu|k') / (mu|k) * <k'|O|k> / G_{k'k}.
inline Matrix transform_observable(const Matrix& o, const BasisPair& bp, cplx lambda) {
  if (o.rows() != bp.dim() || o.cols() != bp.dim()) throw DimensionMismatch("observable and basis pair differ");
  if (std::abs(lambda) <= 1e-12 && bp.dim() > 1) throw SingularInversion("lambda vanishes: G is singular");
  const int n = bp.dim();
  const Matrix ok = bp.basis_k().adjoint() * o * bp.basis_k();
  Matrix t(n, n);
  for (int mu = 0; mu < n; ++mu)
    for (int k = 0; k < n; ++k) {
      cplx s = 0.0;
      for (int kp = 0; kp < n; ++kp) s += bp.overlap(mu, kp) * ok(kp, k) / g_factor(lambda, kp, k);
      t(mu, k) = s / bp.overlap(mu, k);
    }
  return t;
}

struct QuasiExpectation {
  double value = 0.0;
  double imaginary_residual = 0.0;
};

/// sum_{k mu} W11(mu, k) O(mu, k) = Tr(rho O).
inline QuasiExpectation expectation_via_quasi(const DensityOperator& rho, const Matrix& o, const BasisPair& bp,
                                              const ProbeState& probe1, double epsilon1) {
  const cplx lambda = lambda_fn(probe1, epsilon1);
  const Matrix w = w11_table(rho, bp, lambda);
  const Matrix t = transform_observable(o, bp, lambda);
  const cplx s = w.cwiseProduct(t).sum();
  return {s.real(), std::abs(s.imag())};
}

// ---------------------------------------------------------------------------
// Noise amplification

struct ConditioningRow {
  double epsilon1 = 0.0;
  double lambda = 0.0;
  double mean_error = 0.0;   // mean Frobenius error over trials
  double std_error = 0.0;    // standard error of that mean
  bool conditioning_warning = false;
};

/// Adds i.i.d. N(0, noise^2) to every x and y~ entry, reconstructs, and
/// averages ||rho_rec - rho||_F. Trial t draws from the stream (seed, t), so
/// every eps1 sees the same noise realizations.
inline std::vector<ConditioningRow> conditioning_report(const DensityOperator& rho, const BasisPair& bp,
                                                        const GaussianProbe& probe1,
                                                        std::span<const double> epsilon1_grid, double noise_level,
                                                        int trials, std::uint64_t seed) {
  if (!(noise_level >= 0)) throw InvalidArgument("noise_level must be >= 0");
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  const ProbeState p1(probe1);
  const int n = bp.dim();
  std::vector<ConditioningRow> rows;
  for (double eps : epsilon1_grid) {
    const auto exact = simulate_correlations(rho, bp, p1, eps);
    const auto lp = lambda_pair(p1, eps);
    ConditioningRow row{eps, lp.lambda.real(), 0.0, 0.0, false};
    double s1 = 0.0;
    double s2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      auto rng = make_rng(seed, {static_cast<std::uint64_t>(t)});
      std::normal_distribution<double> noise(0.0, 1.0);
      CorrelationSet cs = exact;
      for (int mu = 0; mu < n; ++mu)
        for (int k = 0; k < n; ++k) {
          cs.x(mu, k) += noise_level * noise(rng);
          cs.y_tilde(mu, k) += noise_level * noise(rng);
        }
      const auto rec = reconstruct(cs, lp);
      row.conditioning_warning = rec.conditioning_warning;
      const double err = (rec.rho - rho.matrix()).norm();
      s1 += err;
      s2 += err * err;
    }
    row.mean_error = s1 / trials;
    if (trials > 1) {
      const double var = std::max(0.0, (s2 - s1 * s1 / trials) / (trials - 1));
      row.std_error = std::sqrt(var / trials);
    }
    rows.push_back(row);
  }
  return rows;
}

/// Same, with the state drawn as random_density(N, seed).
inline std::vector<ConditioningRow> conditioning_report(const BasisPair& bp, const GaussianProbe& probe1,
                                                        std::span<const double> epsilon1_grid, double noise_level,
                                                        int trials, std::uint64_t seed) {
  return conditioning_report(random_density(bp.dim(), seed), bp, probe1, epsilon1_grid, noise_level, trials, seed);
}

}  // namespace vnm
