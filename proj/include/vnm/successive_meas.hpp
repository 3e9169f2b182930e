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

// Two successive measurements: A with probe 1 (coupling eps1), then B with
// probe 2 (coupling eps2). Correlations are returned divided by eps1 * eps2.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vnm/core_hilbert.hpp"
#include "vnm/errors.hpp"
#include "vnm/probe.hpp"
#include "vnm/single_meas.hpp"

namespace vnm {

enum class QuasiKind { W, W_tilde, Wigner, Kirkwood, MargenauHill };

inline const char* to_string(QuasiKind k) {
  switch (k) {
    case QuasiKind::W: return "W";
    case QuasiKind::W_tilde: return "W_tilde";
    case QuasiKind::Wigner: return "Wigner";
    case QuasiKind::Kirkwood: return "Kirkwood";
    case QuasiKind::MargenauHill: return "MargenauHill";
  }
  return "?";
}

/// Table indexed (m, n) <-> (b_m, a_n).
struct QuasiDistribution {
  QuasiKind kind = QuasiKind::W;
  Matrix values;
  std::vector<double> eigenvalues_a;
  std::vector<double> eigenvalues_b;
  std::optional<double> epsilon1;

  cplx total() const { return values.sum(); }
  /// sum over m for each n (the A marginal).
  std::vector<cplx> marginal_a() const {
    std::vector<cplx> out(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index n = 0; n < values.cols(); ++n) out[static_cast<std::size_t>(n)] = values.col(n).sum();
    return out;
  }
  /// sum over n for each m (the B marginal).
  std::vector<cplx> marginal_b() const {
    std::vector<cplx> out(static_cast<std::size_t>(values.rows()));
    for (Eigen::Index m = 0; m < values.rows(); ++m) out[static_cast<std::size_t>(m)] = values.row(m).sum();
    return out;
  }
  /// sum_{m n} a_n b_m values(m, n).
  cplx weighted_sum() const {
    cplx s = 0.0;
    for (Eigen::Index m = 0; m < values.rows(); ++m)
      for (Eigen::Index n = 0; n < values.cols(); ++n)
        s += eigenvalues_a[static_cast<std::size_t>(n)] * eigenvalues_b[static_cast<std::size_t>(m)] * values(m, n);
    return s;
  }
};

namespace detail {

inline cplx trace_product(const Matrix& x, const Matrix& y) { return (x.transpose().cwiseProduct(y)).sum(); }

inline void check_dims(const DensityOperator& rho, const Observable& a, const Observable& b) {
  if (rho.dim() != a.dim() || rho.dim() != b.dim()) {
    throw DimensionMismatch("state and observables must share one dimension");
  }
}

/// T[m][n][n'] = Tr[rho P_{a_n'} P_{b_m} P_{a_n}].
class TripleTraces {
 public:
  TripleTraces(const DensityOperator& rho, const Observable& a, const Observable& b)
      : na_(a.size()), nb_(b.size()), t_(na_ * na_ * nb_) {
    check_dims(rho, a, b);
    for (std::size_t n = 0; n < na_; ++n) {
      const Matrix left = a.projector(n) * rho.matrix();
      for (std::size_t np = 0; np < na_; ++np) {
        const Matrix mid = left * a.projector(np);  // P_n rho P_n'
        for (std::size_t m = 0; m < nb_; ++m) t_[index(m, n, np)] = trace_product(mid, b.projector(m));
      }
    }
  }
  cplx operator()(std::size_t m, std::size_t n, std::size_t np) const { return t_[index(m, n, np)]; }
  std::size_t na() const { return na_; }
  std::size_t nb() const { return nb_; }

 private:
  std::size_t index(std::size_t m, std::size_t n, std::size_t np) const { return (m * na_ + n) * na_ + np; }
  std::size_t na_;
  std::size_t nb_;
  std::vector<cplx> t_;
};

inline QuasiDistribution weighted_w(const DensityOperator& rho, const Observable& a, const Observable& b,
                                    const std::function<cplx(double)>& weight, double epsilon1, QuasiKind kind) {
  const TripleTraces t(rho, a, b);
  QuasiDistribution q{kind, Matrix::Zero(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(a.size())),
                      a.eigenvalues(), b.eigenvalues(), epsilon1};
  std::vector<cplx> lam(a.size() * a.size());
  for (std::size_t n = 0; n < a.size(); ++n)
    for (std::size_t np = 0; np < a.size(); ++np)
      lam[n * a.size() + np] = n == np ? cplx(1.0) : weight(epsilon1 * (a.eigenvalue(n) - a.eigenvalue(np)));
  for (std::size_t m = 0; m < b.size(); ++m)
    for (std::size_t n = 0; n < a.size(); ++n) {
      cplx s = 0.0;
      for (std::size_t np = 0; np < a.size(); ++np) s += lam[n * a.size() + np] * t(m, n, np);
      q.values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = s;
    }
  return q;
}

}  // namespace detail

/// W_{b_m a_n}(eps1) = sum_n' lambda(eps1 (a_n - a_n')) Tr[rho P_n' P_m P_n].
inline QuasiDistribution w_fn(const DensityOperator& rho, const Observable& a, const Observable& b,
                              const ProbeState& probe1, double epsilon1) {
  return detail::weighted_w(
      rho, a, b, [&](double beta) { return lambda_fn(probe1, beta); }, epsilon1, QuasiKind::W);
}

/// Same as w_fn with lambda~ in place of lambda.
inline QuasiDistribution w_tilde_fn(const DensityOperator& rho, const Observable& a, const Observable& b,
                                    const ProbeState& probe1, double epsilon1) {
  return detail::weighted_w(
      rho, a, b, [&](double beta) { return lambda_tilde_fn(probe1, beta); }, epsilon1, QuasiKind::W_tilde);
}

/// <Q1 Q2> / (eps1 eps2) = Re sum a_n b_m W_{b_m a_n}(eps1).
inline double corr_qq(const DensityOperator& rho, const Observable& a, const Observable& b, const ProbeState& probe1,
                      double epsilon1) {
  return w_fn(rho, a, b, probe1, epsilon1).weighted_sum().real();
}

/// <P1 Q2> / (eps1 eps2) = 2 <P1^2> Im sum a_n b_m W~_{b_m a_n}(eps1).
/// For a Gaussian probe 2 <P1^2> = 1 / (2 sigma_Q1^2).
inline double corr_pq(const DensityOperator& rho, const Observable& a, const Observable& b, const ProbeState& probe1,
                      double epsilon1) {
  return 2.0 * momentum_second_moment(probe1) * w_tilde_fn(rho, a, b, probe1, epsilon1).weighted_sum().imag();
}

/// Strong-coupling limit Tr[rho P_a P_b P_a].
inline QuasiDistribution wigner_joint(const DensityOperator& rho, const Observable& a, const Observable& b) {
  detail::check_dims(rho, a, b);
  QuasiDistribution q{QuasiKind::Wigner,
                      Matrix::Zero(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(a.size())),
                      a.eigenvalues(), b.eigenvalues(), std::nullopt};
  for (std::size_t n = 0; n < a.size(); ++n) {
    const Matrix sandwich = a.projector(n) * rho.matrix() * a.projector(n);
    for (std::size_t m = 0; m < b.size(); ++m)
      q.values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
          detail::trace_product(sandwich, b.projector(m)).real();
  }
  return q;
}

/// Weak-coupling limit Tr[rho P_b P_a].
inline QuasiDistribution kirkwood(const DensityOperator& rho, const Observable& a, const Observable& b) {
  detail::check_dims(rho, a, b);
  QuasiDistribution q{QuasiKind::Kirkwood,
                      Matrix::Zero(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(a.size())),
                      a.eigenvalues(), b.eigenvalues(), std::nullopt};
  for (std::size_t m = 0; m < b.size(); ++m) {
    const Matrix left = rho.matrix() * b.projector(m);
    for (std::size_t n = 0; n < a.size(); ++n)
      q.values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = detail::trace_product(left, a.projector(n));
  }
  return q;
}

/// (1/2) Tr[rho (P_b P_a + P_a P_b)] = Re Kirkwood.
inline QuasiDistribution margenau_hill(const DensityOperator& rho, const Observable& a, const Observable& b) {
  auto q = kirkwood(rho, a, b);
  q.kind = QuasiKind::MargenauHill;
  q.values = q.values.real().cast<cplx>();
  return q;
}

/// S_mn = (P_b P_a + P_a P_b)/2.
inline Matrix symmetrized_product(const Observable& a, const Observable& b, std::size_t m, std::size_t n) {
  if (a.dim() != b.dim()) throw DimensionMismatch("observables must share one dimension");
  if (m >= b.size() || n >= a.size()) throw InvalidArgument("index out of range");
  const Matrix& pa = a.projector(n);
  const Matrix& pb = b.projector(m);
  return 0.5 * (pb * pa + pa * pb);
}

struct NegativityWitness {
  double min_eigenvalue = 0.0;
  Vector witness_state;
};

inline NegativityWitness negativity_witness(const Observable& a, const Observable& b, std::size_t m, std::size_t n) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(symmetrized_product(a, b, m, n)));
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

// ---------------------------------------------------------------------------
// Joint pointer densities

/// Tabulated density on a rectangular grid, row-major in (q1, q2).
struct Density2D {
  std::vector<double> q1;
  std::vector<double> q2;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * q2.size() + j]; }
  double d1() const { return q1.size() > 1 ? q1[1] - q1[0] : 1.0; }
  double d2() const { return q2.size() > 1 ? q2[1] - q2[0] : 1.0; }
  /// Cell-sum integral (the rule matching the cell-based sampler).
  double integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * d1() * d2();
  }
  double moment(const std::function<double(double, double)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < q1.size(); ++i)
      for (std::size_t j = 0; j < q2.size(); ++j) s += f(q1[i], q2[j]) * at(i, j);
    return s * d1() * d2();
  }
};

namespace detail {

inline void span_for(std::span<const double> grid, const Observable& o, double eps, double width, const char* what) {
  const double c0 = eps * o.eigenvalues().front();
  const double c1 = eps * o.eigenvalues().back();
  require_span(grid, std::min(c0, c1) - 6 * width, std::max(c0, c1) + 6 * width, what);
}

/// p = sum_m |chi2(q2 - eps2 b_m)|^2 * F_m(q1), F_m real.
inline Density2D assemble(std::span<const double> g1, std::span<const double> g2, const Observable& b,
                          const ProbeState& probe2, double epsilon2, const std::vector<std::vector<double>>& f) {
  Density2D d{std::vector<double>(g1.begin(), g1.end()), std::vector<double>(g2.begin(), g2.end()),
              std::vector<double>(g1.size() * g2.size(), 0.0)};
  std::vector<double> c(g2.size());
  for (std::size_t m = 0; m < b.size(); ++m) {
    for (std::size_t j = 0; j < g2.size(); ++j) c[j] = position_density_at(probe2, g2[j] - epsilon2 * b.eigenvalue(m));
    for (std::size_t i = 0; i < g1.size(); ++i) {
      const double fi = f[m][i];
      if (fi == 0.0) continue;
      double* row = d.values.data() + i * g2.size();
      for (std::size_t j = 0; j < g2.size(); ++j) row[j] += fi * c[j];
    }
  }
  return d;
}

}  // namespace detail

/// p(Q1, Q2) = sum_{n n' m} Tr[rho P_n' P_m P_n] chi1(Q1 - eps1 a_n) chi1*(Q1 - eps1 a_n')
///             |chi2(Q2 - eps2 b_m)|^2.
/// Derived from the two-probe final state; its moments reproduce corr_qq.
inline Density2D joint_pointer_density(const DensityOperator& rho, const Observable& a, const Observable& b,
                                       const ProbeState& probe1, const ProbeState& probe2, double epsilon1,
                                       double epsilon2, std::span<const double> q1_grid,
                                       std::span<const double> q2_grid) {
  detail::span_for(q1_grid, a, epsilon1, sigma_q(probe1), "joint_pointer_density q1");
  detail::span_for(q2_grid, b, epsilon2, sigma_q(probe2), "joint_pointer_density q2");
  const detail::TripleTraces t(rho, a, b);
  const std::size_t na = a.size();
  std::vector<std::vector<cplx>> chi(na, std::vector<cplx>(q1_grid.size()));
  for (std::size_t n = 0; n < na; ++n)
    for (std::size_t i = 0; i < q1_grid.size(); ++i)
      chi[n][i] = amplitude_at(probe1, q1_grid[i] - epsilon1 * a.eigenvalue(n));
  std::vector<std::vector<double>> f(b.size(), std::vector<double>(q1_grid.size(), 0.0));
  for (std::size_t m = 0; m < b.size(); ++m)
    for (std::size_t n = 0; n < na; ++n)
      for (std::size_t np = 0; np < na; ++np) {
        const cplx tt = t(m, n, np);
        if (tt == 0.0) continue;
        for (std::size_t i = 0; i < q1_grid.size(); ++i)
          f[m][i] += (tt * chi[n][i] * std::conj(chi[np][i])).real();
      }
  return detail::assemble(q1_grid, q2_grid, b, probe2, epsilon2, f);
}

/// Repeated measurement of the same observable (B = A).
inline Density2D joint_pointer_density(const DensityOperator& rho, const Observable& a, const ProbeState& probe1,
                                       const ProbeState& probe2, double epsilon1, double epsilon2,
                                       std::span<const double> q1_grid, std::span<const double> q2_grid) {
  return joint_pointer_density(rho, a, a, probe1, probe2, epsilon1, epsilon2, q1_grid, q2_grid);
}

/// p(P1, Q2) = |chi1~(P1)|^2 sum_{n n' m} Tr[rho P_n' P_m P_n] exp(-i eps1 (a_n - a_n') P1)
///             |chi2(Q2 - eps2 b_m)|^2.
/// Probe 1 read out in momentum; derived the same way, moments reproduce corr_pq.
inline Density2D joint_momentum_position_density(const DensityOperator& rho, const Observable& a,
                                                 const Observable& b, const ProbeState& probe1,
                                                 const ProbeState& probe2, double epsilon1, double epsilon2,
                                                 std::span<const double> p1_grid, std::span<const double> q2_grid) {
  const double sp = std::sqrt(momentum_second_moment(probe1));
  require_span(p1_grid, -6 * sp, 6 * sp, "joint_momentum_position_density p1");
  detail::span_for(q2_grid, b, epsilon2, sigma_q(probe2), "joint_momentum_position_density q2");
  const detail::TripleTraces t(rho, a, b);
  const std::size_t na = a.size();
  std::vector<double> rho_p(p1_grid.size());
  for (std::size_t i = 0; i < p1_grid.size(); ++i) rho_p[i] = momentum_density_at(probe1, p1_grid[i]);
  std::vector<std::vector<double>> f(b.size(), std::vector<double>(p1_grid.size(), 0.0));
  for (std::size_t m = 0; m < b.size(); ++m)
    for (std::size_t n = 0; n < na; ++n)
      for (std::size_t np = 0; np < na; ++np) {
        const cplx tt = t(m, n, np);
        if (tt == 0.0) continue;
        const double da = epsilon1 * (a.eigenvalue(n) - a.eigenvalue(np));
        for (std::size_t i = 0; i < p1_grid.size(); ++i)
          f[m][i] += rho_p[i] * (tt * std::exp(-kI * da * p1_grid[i])).real();
      }
  return detail::assemble(p1_grid, q2_grid, b, probe2, epsilon2, f);
}

// ---------------------------------------------------------------------------
// Correlation coefficient (B = A)

struct CorrCoefficient {
  double value = 0.0;
  bool zero_variance = false;  // Var(A) = 0 with sharp pointers: 0/0, reported as 0
};

/// C = Var(A) / sqrt[(Var(A) + (s1/e1)^2) (Var(A) + (s2/e2)^2)].
inline CorrCoefficient corr_coefficient(const DensityOperator& rho, const Observable& a, const ProbeState& probe1,
                                        const ProbeState& probe2, double epsilon1, double epsilon2) {
  if (epsilon1 == 0.0 || epsilon2 == 0.0) return {0.0, false};
  const auto w = born_weights(rho, a);
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    m1 += w[n] * a.eigenvalue(n);
    m2 += w[n] * a.eigenvalue(n) * a.eigenvalue(n);
  }
  const double var = std::max(0.0, m2 - m1 * m1);
  const double r1 = sigma_q(probe1) / epsilon1;
  const double r2 = sigma_q(probe2) / epsilon2;
  const double den = std::sqrt((var + r1 * r1) * (var + r2 * r2));
  if (den == 0.0) return {0.0, true};
  return {var / den, false};
}

// ---------------------------------------------------------------------------
// Weak values

inline Matrix postselection_projector(const Vector& phi) {
  const double nrm = phi.norm();
  if (nrm < 1e-300) throw InvalidArgument("postselection vector has zero norm");
  return outer(phi / nrm);
}

/// (A)_W = Tr(rho P_phi A) / Tr(rho P_phi).
inline cplx weak_value(const DensityOperator& rho, const Observable& a, const Vector& phi) {
  if (phi.size() != rho.dim() || a.dim() != rho.dim()) throw DimensionMismatch("dimensions differ");
  const Matrix p = postselection_projector(phi);
  const cplx den = (rho.matrix() * p).trace();
  if (std::abs(den) <= 1e-12) throw OrthogonalPostselection("Tr(rho P_phi) vanishes");
  return (rho.matrix() * p * a.matrix()).trace() / den;
}

/// Polynomial (Neville) extrapolation of y(h) to h = 0.
inline double extrapolate_to_zero(std::span<const double> h, std::span<const double> y) {
  std::vector<double> p(y.begin(), y.end());
  const std::size_t n = p.size();
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t i = 0; i + k < n; ++i) p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
  return p.empty() ? 0.0 : p[0];
}

struct WeakValueEstimate {
  double re_estimate = 0.0;    // -> Re (A)_W
  double im_estimate = 0.0;    // -> 2 sigma_P^2 Im (A)_W
  double sigma_p2 = 0.0;       // <P1^2> of probe 1
  cplx estimate;               // re_estimate + i im_estimate / (2 sigma_P^2)
  cplx weak_value;             // direct evaluation
  std::vector<double> epsilons;
  std::vector<double> ratio_re;  // <Q1 Q2> / (eps1 <Q2>)
  std::vector<double> ratio_im;  // <P1 Q2> / (eps1 <Q2>)
  std::vector<double> residual_re;
  std::vector<double> residual_im;
  double error_re = 0.0;
  double error_im = 0.0;
};

/// Evaluates the two probe ratios on a decreasing eps1 sequence and
/// extrapolates them polynomially in eps1^2 to eps1 = 0.
inline WeakValueEstimate weak_value_from_probes(const DensityOperator& rho, const Observable& a, const Vector& phi,
                                                const GaussianProbe& probe1, std::span<const double> epsilons) {
  if (epsilons.empty()) throw InvalidArgument("epsilon sequence is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0)) throw InvalidArgument("epsilon values must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw InvalidArgument("epsilon sequence must be decreasing");
  }
  if (epsilons.front() * a.max_abs_eigenvalue() / probe1.sigma_q >= 1.0) {
    throw InvalidArgument("largest eps1 * ||A|| / sigma_Q must be < 1 (linear-response regime)");
  }
  WeakValueEstimate r;
  r.weak_value = weak_value(rho, a, phi);
  const ProbeState p1(probe1);
  r.sigma_p2 = momentum_second_moment(p1);
  const Matrix proj = postselection_projector(phi);
  const Observable b = projector_observable(proj);
  std::vector<double> h;
  for (double eps : epsilons) {
    const auto rho_f = reduced_state_after(rho, a, p1, eps);
    const double den = (rho_f.matrix() * proj).trace().real();
    if (std::abs(den) <= 1e-12) throw OrthogonalPostselection("<Q2> vanishes at eps1 = " + std::to_string(eps));
    r.epsilons.push_back(eps);
    h.push_back(eps * eps);
    r.ratio_re.push_back(corr_qq(rho, a, b, p1, eps) / den);
    r.ratio_im.push_back(corr_pq(rho, a, b, p1, eps) / den);
    r.residual_re.push_back(r.ratio_re.back() - r.weak_value.real());
    r.residual_im.push_back(r.ratio_im.back() / (2 * r.sigma_p2) - r.weak_value.imag());
  }
  r.re_estimate = extrapolate_to_zero(h, r.ratio_re);
  r.im_estimate = extrapolate_to_zero(h, r.ratio_im);
  r.estimate = cplx(r.re_estimate, r.im_estimate / (2 * r.sigma_p2));
  r.error_re = std::abs(r.estimate.real() - r.weak_value.real());
  r.error_im = std::abs(r.estimate.imag() - r.weak_value.imag());
  return r;
}

}  // namespace vnm
