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

// One-dimensional pointer states (hbar = 1) and the characteristic functions
// g(beta), lambda(beta) and lambda~(beta) consumed by the measurement
// formulas. Grid probes live on a periodic power-of-two grid so that shifts,
// boosts and free evolution can go through the FFT.

#pragma once

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "vnm/core_hilbert.hpp"
#include "vnm/errors.hpp"

namespace vnm {

/// Centered minimum-uncertainty Gaussian, chi(Q) = exp(-Q^2/4s^2)/(2 pi s^2)^(1/4).
struct GaussianProbe {
  double sigma_q = 1.0;

  GaussianProbe() = default;
  explicit GaussianProbe(double s) : sigma_q(s) {
    if (!(s > 0) || !std::isfinite(s)) throw InvalidProbe("sigma_q must be > 0");
  }
  double sigma_p() const { return 0.5 / sigma_q; }

  cplx amplitude(double q) const {
    return std::exp(-q * q / (4 * sigma_q * sigma_q)) / std::pow(2 * std::numbers::pi * sigma_q * sigma_q, 0.25);
  }
  double density(double q) const {
    return std::exp(-q * q / (2 * sigma_q * sigma_q)) / std::sqrt(2 * std::numbers::pi * sigma_q * sigma_q);
  }
  double momentum_density(double p) const {
    const double sp = sigma_p();
    return std::exp(-p * p / (2 * sp * sp)) / std::sqrt(2 * std::numbers::pi * sp * sp);
  }
};

/// Complex wavefunction sampled at q_j = q_min + j dq, dq = (q_max - q_min)/n,
/// j = 0..n-1 (periodic). n must be a power of two.
class GridProbe {
 public:
  static constexpr double kNormTol = 1e-8;

  GridProbe(double q_min, double q_max, std::vector<cplx> amplitudes)
      : q_min_(q_min), q_max_(q_max), amps_(std::move(amplitudes)) {
    const auto n = amps_.size();
    if (n < 2 || (n & (n - 1)) != 0) throw InvalidProbe("n_points must be a power of two");
    if (!(q_max > q_min)) throw InvalidProbe("q_max must exceed q_min");
    const double nrm = norm();
    if (std::abs(nrm - 1.0) > kNormTol) {
      throw InvalidProbe("grid wavefunction is not normalized (norm " + std::to_string(nrm) + ")");
    }
    build_momentum_density();
  }

  /// Samples `fn` on the grid and normalizes the result.
  static GridProbe from_function(double q_min, double q_max, std::size_t n,
                                 const std::function<cplx(double)>& fn) {
    std::vector<cplx> a(n);
    const double dq = (q_max - q_min) / static_cast<double>(n);
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = fn(q_min + static_cast<double>(j) * dq);
      s += std::norm(a[j]);
    }
    const double scale = 1.0 / std::sqrt(s * dq);
    for (auto& v : a) v *= scale;
    return GridProbe(q_min, q_max, std::move(a));
  }

  static GridProbe gaussian(double sigma_q, double q_min, double q_max, std::size_t n, double center = 0.0) {
    const GaussianProbe g(sigma_q);
    return from_function(q_min, q_max, n, [&](double q) { return g.amplitude(q - center); });
  }

  double q_min() const { return q_min_; }
  double q_max() const { return q_max_; }
  std::size_t n_points() const { return amps_.size(); }
  double dq() const { return (q_max_ - q_min_) / static_cast<double>(amps_.size()); }
  double q(std::size_t j) const { return q_min_ + static_cast<double>(j) * dq(); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  double dp() const { return 2 * std::numbers::pi / (q_max_ - q_min_); }
  /// Momentum of FFT bin k (standard fftfreq ordering).
  double p(std::size_t k) const {
    const auto n = amps_.size();
    const double kk = k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    return kk * dp();
  }
  /// |chi~(p_k)|^2, normalized so that sum * dp = 1.
  const std::vector<double>& momentum_density() const { return mom_density_; }

  double norm() const {
    double s = 0;
    for (const auto& a : amps_) s += std::norm(a);
    return s * dq();
  }
  double mean_q() const {
    double s = 0;
    for (std::size_t j = 0; j < amps_.size(); ++j) s += q(j) * std::norm(amps_[j]);
    return s * dq();
  }
  double variance_q() const {
    double s = 0;
    const double m = mean_q();
    for (std::size_t j = 0; j < amps_.size(); ++j) s += (q(j) - m) * (q(j) - m) * std::norm(amps_[j]);
    return s * dq();
  }
  double mean_p() const {
    double s = 0;
    for (std::size_t k = 0; k < amps_.size(); ++k) s += p(k) * mom_density_[k];
    return s * dp();
  }
  double second_moment_p() const {
    double s = 0;
    for (std::size_t k = 0; k < amps_.size(); ++k) s += p(k) * p(k) * mom_density_[k];
    return s * dp();
  }

  /// Linear interpolation of the amplitude; zero outside [q_min, q_max - dq].
  cplx amplitude_at(double x) const {
    const double t = (x - q_min_) / dq();
    if (t < 0 || t > static_cast<double>(amps_.size() - 1)) return {0.0, 0.0};
    const auto j = static_cast<std::size_t>(std::floor(t));
    if (j + 1 >= amps_.size()) return amps_.back();
    const double f = t - static_cast<double>(j);
    return (1 - f) * amps_[j] + f * amps_[j + 1];
  }

  double density_at(double x) const {
    const double t = (x - q_min_) / dq();
    if (t < 0 || t > static_cast<double>(amps_.size() - 1)) return 0.0;
    const auto j = static_cast<std::size_t>(std::floor(t));
    if (j + 1 >= amps_.size()) return std::norm(amps_.back());
    const double f = t - static_cast<double>(j);
    return (1 - f) * std::norm(amps_[j]) + f * std::norm(amps_[j + 1]);
  }

  /// Momentum density at arbitrary p (linear interpolation between bins).
  double momentum_density_at(double pv) const {
    const auto n = amps_.size();
    const double t = pv / dp();
    const double lo = -static_cast<double>(n / 2);
    const double hi = static_cast<double>(n / 2 - 1);
    if (t < lo || t > hi) return 0.0;
    const auto fl = static_cast<long>(std::floor(t));
    const double f = t - static_cast<double>(fl);
    auto at = [&](long kk) {
      if (kk > static_cast<long>(hi)) return 0.0;
      const auto idx = static_cast<std::size_t>(kk < 0 ? kk + static_cast<long>(n) : kk);
      return mom_density_[idx];
    };
    return (1 - f) * at(fl) + f * at(fl + 1);
  }

  /// Spectrum X_k = sum_j chi_j exp(-2 pi i jk/n).
  std::vector<cplx> spectrum() const {
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.fwd(out, amps_);
    return out;
  }

  /// Same grid, new amplitudes obtained from a modified spectrum.
  GridProbe from_spectrum(const std::vector<cplx>& spec) const {
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.inv(out, spec);
    return GridProbe(q_min_, q_max_, std::move(out));
  }

  /// chi(q - s) via a Fourier phase (exact for band-limited periodic data).
  std::vector<cplx> shifted_amplitudes(double s) const {
    auto spec = spectrum();
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= std::exp(-kI * p(k) * s);
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.inv(out, spec);
    return out;
  }

 private:
  void build_momentum_density() {
    const auto spec = spectrum();
    mom_density_.resize(spec.size());
    const double scale = dq() * dq() / (2 * std::numbers::pi);
    for (std::size_t k = 0; k < spec.size(); ++k) mom_density_[k] = std::norm(spec[k]) * scale;
  }

  double q_min_;
  double q_max_;
  std::vector<cplx> amps_;
  std::vector<double> mom_density_;
};

/// A measurement probe: a Gaussian or a centered grid wavefunction.
class ProbeState {
 public:
  ProbeState(GaussianProbe g) : v_(g) {}  // NOLINT(google-explicit-constructor)
  ProbeState(GridProbe g) : v_(std::move(g)) {  // NOLINT(google-explicit-constructor)
    const auto& gp = std::get<GridProbe>(v_);
    const double s = std::sqrt(gp.variance_q());
    if (std::abs(gp.mean_q()) >= 1e-8 * std::max(s, 1e-300)) {
      throw UncenteredProbe("grid probe must satisfy <Q> = 0 (|<Q>| = " + std::to_string(std::abs(gp.mean_q())) + ")");
    }
  }

  bool is_gaussian() const { return std::holds_alternative<GaussianProbe>(v_); }
  const GaussianProbe& gaussian() const { return std::get<GaussianProbe>(v_); }
  const GridProbe& grid() const { return std::get<GridProbe>(v_); }
  const std::variant<GaussianProbe, GridProbe>& variant() const { return v_; }

 private:
  std::variant<GaussianProbe, GridProbe> v_;
};

// ---------------------------------------------------------------------------
// Moments

inline double position_variance(const ProbeState& probe) {
  if (probe.is_gaussian()) return probe.gaussian().sigma_q * probe.gaussian().sigma_q;
  return probe.grid().variance_q();
}

inline double sigma_q(const ProbeState& probe) { return std::sqrt(position_variance(probe)); }

/// <P^2> of the probe (equals sigma_P^2 for the centered-momentum states used here).
inline double momentum_second_moment(const ProbeState& probe) {
  if (probe.is_gaussian()) return probe.gaussian().sigma_p() * probe.gaussian().sigma_p();
  return probe.grid().second_moment_p();
}

// ---------------------------------------------------------------------------
// Characteristic functions

/// g(beta) = <exp(-i beta P)>.
inline cplx char_g(const ProbeState& probe, double beta) {
  if (probe.is_gaussian()) {
    const double s = probe.gaussian().sigma_q;
    return std::exp(-beta * beta / (8 * s * s));
  }
  const auto& gp = probe.grid();
  const auto& rho = gp.momentum_density();
  cplx acc = 0;
  for (std::size_t k = 0; k < rho.size(); ++k) acc += rho[k] * std::exp(-kI * beta * gp.p(k));
  return acc * gp.dp();
}

/// h(beta) = (1/beta) <exp(-i beta P/2) Q exp(-i beta P/2)>
///         = (1/beta) int chi*(Q + beta/2) Q chi(Q - beta/2) dQ; h(0) = 0.
inline cplx char_h(const ProbeState& probe, double beta) {
  if (probe.is_gaussian() || std::abs(beta) < 1e-10) return 0.0;
  const auto& gp = probe.grid();
  const auto plus = gp.shifted_amplitudes(-beta / 2);   // chi(q + beta/2)
  const auto minus = gp.shifted_amplitudes(beta / 2);   // chi(q - beta/2)
  cplx acc = 0;
  for (std::size_t j = 0; j < plus.size(); ++j) acc += std::conj(plus[j]) * gp.q(j) * minus[j];
  return acc * gp.dq() / beta;
}

/// lambda(beta) = g(beta) + 2 h(beta); lambda(0) = 1 for a centered probe.
inline cplx lambda_fn(const ProbeState& probe, double beta) {
  if (std::abs(beta) < 1e-10) return 1.0;
  if (probe.is_gaussian()) return char_g(probe, beta);
  return char_g(probe, beta) + 2.0 * char_h(probe, beta);
}

/// lambda-bar(beta) = g'(beta)/beta, with the beta -> 0 limit g''(0) = -<P^2>.
/// Grid probes use the exact momentum-space derivative of g.
inline cplx lambda_bar(const ProbeState& probe, double beta) {
  if (probe.is_gaussian()) {
    const double s = probe.gaussian().sigma_q;
    return -std::exp(-beta * beta / (8 * s * s)) / (4 * s * s);
  }
  const auto& gp = probe.grid();
  const auto& rho = gp.momentum_density();
  if (std::abs(beta) < 1e-10) return -gp.second_moment_p();
  // g'(beta)/beta = -i sum p rho(p) (exp(-i beta p) - 1)/beta dp - i <P>/beta
  cplx acc = 0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const double x = beta * gp.p(k);
    const cplx em1(-2.0 * std::sin(x / 2) * std::sin(x / 2), -std::sin(x));
    acc += gp.p(k) * rho[k] * em1;
  }
  return -kI * (acc * gp.dp() / beta + gp.mean_p() / beta);
}

/// lambda~(beta) = lambda-bar(beta) / lambda-bar(0).
inline cplx lambda_tilde_fn(const ProbeState& probe, double beta) {
  const cplx l0 = lambda_bar(probe, 0.0);
  if (std::abs(l0) < 1e-12) throw DegenerateProbe("lambda-bar(0) vanishes: flat characteristic function");
  if (std::abs(beta) < 1e-10) return 1.0;
  if (probe.is_gaussian()) return char_g(probe, beta);
  return lambda_bar(probe, beta) / l0;
}

// ---------------------------------------------------------------------------
// Densities

inline double position_density_at(const ProbeState& probe, double q) {
  if (probe.is_gaussian()) return probe.gaussian().density(q);
  return probe.grid().density_at(q);
}

inline cplx amplitude_at(const ProbeState& probe, double q) {
  if (probe.is_gaussian()) return probe.gaussian().amplitude(q);
  return probe.grid().amplitude_at(q);
}

inline double momentum_density_at(const ProbeState& probe, double p) {
  if (probe.is_gaussian()) return probe.gaussian().momentum_density(p);
  return probe.grid().momentum_density_at(p);
}

/// |chi(q)|^2 sampled on `q_grid`.
inline std::vector<double> position_density(const ProbeState& probe, std::span<const double> q_grid) {
  std::vector<double> out(q_grid.size());
  for (std::size_t i = 0; i < q_grid.size(); ++i) out[i] = position_density_at(probe, q_grid[i]);
  return out;
}

/// Position-density characteristic function int p0(Q) exp(ikQ) dQ.
inline cplx position_charfn(const ProbeState& probe, double k) {
  if (probe.is_gaussian()) {
    const double s = probe.gaussian().sigma_q;
    return std::exp(-0.5 * k * k * s * s);
  }
  const auto& gp = probe.grid();
  cplx acc = 0;
  for (std::size_t j = 0; j < gp.n_points(); ++j) acc += std::norm(gp.amplitudes()[j]) * std::exp(kI * k * gp.q(j));
  return acc * gp.dq();
}

// ---------------------------------------------------------------------------
// Stern-Gerlach dynamics on grid probes

/// Multiplies the wavefunction by exp(i p0 q).
inline GridProbe boost(const GridProbe& probe, double p0) {
  std::vector<cplx> a = probe.amplitudes();
  for (std::size_t j = 0; j < a.size(); ++j) a[j] *= std::exp(kI * p0 * probe.q(j));
  return GridProbe(probe.q_min(), probe.q_max(), std::move(a));
}

struct FreeEvolution {
  GridProbe probe;
  bool boundary_leak = false;  // density within 5 points of an edge exceeds 1e-6
  double edge_density = 0.0;
};

/// Applies exp(-i t p^2 / 2m) in momentum space.
inline FreeEvolution free_evolve(const GridProbe& probe, double mass, double t) {
  if (!(mass > 0)) throw InvalidArgument("mass must be > 0");
  auto spec = probe.spectrum();
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double pk = probe.p(k);
    spec[k] *= std::exp(-kI * t * pk * pk / (2 * mass));
  }
  GridProbe out = probe.from_spectrum(spec);
  double edge = 0.0;
  const auto n = out.n_points();
  for (std::size_t j = 0; j < std::min<std::size_t>(5, n); ++j) {
    edge = std::max(edge, std::norm(out.amplitudes()[j]));
    edge = std::max(edge, std::norm(out.amplitudes()[n - 1 - j]));
  }
  return FreeEvolution{std::move(out), edge > 1e-6, edge};
}

}  // namespace vnm
