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

// Finite-ensemble emulation of the two-probe experiment: pointer readings are
// drawn from tabulated joint densities and turned into sample-mean
// correlations with standard errors.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "vnm/core_hilbert.hpp"
#include "vnm/errors.hpp"
#include "vnm/probe.hpp"
#include "vnm/rng.hpp"
#include "vnm/successive_meas.hpp"
#include "vnm/tomography.hpp"

namespace vnm {

struct Samples {
  std::vector<double> q1;
  std::vector<double> q2;
  std::uint64_t seed = 0;

  std::size_t size() const { return q1.size(); }
};

/// Inverse-CDF sampling on the grid cells (row by marginal weight, then
/// column within the row), followed by uniform jitter inside the cell.
inline Samples sample_joint_density(const Density2D& density, std::size_t n, std::uint64_t seed) {
  const std::size_t n1 = density.q1.size();
  const std::size_t n2 = density.q2.size();
  if (n1 == 0 || n2 == 0 || density.values.size() != n1 * n2) throw InvalidArgument("density table is malformed");
  for (double v : density.values) {
    if (v < -1e-9) throw NegativeDensity("density value " + std::to_string(v) + " is below -1e-9");
  }
  std::vector<double> row_cdf(n1);
  std::vector<double> cell_cdf(n1 * n2);
  double total = 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n2; ++j) {
      acc += std::max(0.0, density.values[i * n2 + j]);
      cell_cdf[i * n2 + j] = acc;
    }
    total += acc;
    row_cdf[i] = total;
  }
  if (!(total > 0)) throw InvalidArgument("density has no mass");

  const double d1 = density.d1();
  const double d2 = density.d2();
  auto rng = make_rng(seed, {0x5a3});
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Samples out;
  out.seed = seed;
  out.q1.resize(n);
  out.q2.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = uni(rng) * total;
    auto i = static_cast<std::size_t>(std::upper_bound(row_cdf.begin(), row_cdf.end(), u) - row_cdf.begin());
    i = std::min(i, n1 - 1);
    const double* row = cell_cdf.data() + i * n2;
    const double v = uni(rng) * row[n2 - 1];
    auto j = static_cast<std::size_t>(std::upper_bound(row, row + n2, v) - row);
    j = std::min(j, n2 - 1);
    out.q1[s] = density.q1[i] + (uni(rng) - 0.5) * d1;
    out.q2[s] = density.q2[j] + (uni(rng) - 0.5) * d2;
  }
  return out;
}

enum class CorrelationMode { q1q2, q1, q2 };

struct EnsembleResult {
  std::size_t n_samples = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
};

/// Sample mean of Q1 Q2 (or of a single coordinate); std_error = sd / sqrt(n).
inline EnsembleResult estimate_correlation(const Samples& samples, CorrelationMode mode) {
  const std::size_t n = samples.size();
  if (n < 2) throw TooFewSamples("need at least two samples");
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    switch (mode) {
      case CorrelationMode::q1q2: v = samples.q1[i] * samples.q2[i]; break;
      case CorrelationMode::q1: v = samples.q1[i]; break;
      case CorrelationMode::q2: v = samples.q2[i]; break;
    }
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double sd = std::sqrt(m2 / static_cast<double>(n - 1));
  return {n, mean, sd / std::sqrt(static_cast<double>(n)), samples.seed};
}

/// Pools two independent estimates of the same quantity.
inline EnsembleResult combine(const EnsembleResult& a, const EnsembleResult& b) {
  const double na = static_cast<double>(a.n_samples);
  const double nb = static_cast<double>(b.n_samples);
  const double n = na + nb;
  const double mean = (na * a.mean + nb * b.mean) / n;
  const double ssa = a.std_error * a.std_error * na * (na - 1);
  const double ssb = b.std_error * b.std_error * nb * (nb - 1);
  const double d = b.mean - a.mean;
  const double ss = ssa + ssb + d * d * na * nb / n;
  return {a.n_samples + b.n_samples, mean, std::sqrt(ss / (n - 1) / n), a.seed};
}

/// Pearson correlation coefficient of the (q1, q2) cloud.
inline double sample_correlation(const Samples& s) {
  const std::size_t n = s.size();
  if (n < 2) throw TooFewSamples("need at least two samples");
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m1 += s.q1[i];
    m2 += s.q2[i];
  }
  m1 /= static_cast<double>(n);
  m2 /= static_cast<double>(n);
  double c = 0.0, v1 = 0.0, v2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = s.q1[i] - m1;
    const double b = s.q2[i] - m2;
    c += a * b;
    v1 += a * a;
    v2 += b * b;
  }
  return c / std::sqrt(v1 * v2);
}

/// Worker count: VNM_THREADS if set (>= 1), else hardware concurrency.
inline unsigned worker_count(std::size_t jobs) {
  unsigned t = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VNM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) t = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(jobs, 1)));
}

/// Runs body(i) for i in [0, jobs) on worker_count threads (static striping).
template <typename F>
void parallel_for(std::size_t jobs, F&& body) {
  const unsigned workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < jobs; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct EnsembleTomography {
  CorrelationSet correlations;
  RealMatrix x_std_error;
  RealMatrix y_tilde_std_error;
  std::size_t n_per_setting = 0;
  std::uint64_t seed = 0;
};

struct EnsembleGrid {
  std::size_t points = 1024;  // per axis
  double half_width = 8.0;    // in units of the relevant spread beyond the shifted peaks
};

/// For every (k, mu): samples (Q1, Q2) from the A = |k><k|, B = |mu)(mu| joint
/// density for x^, and (P1, Q2) from a second independent ensemble for y~^.
/// Stream per setting: (seed, k, mu, which).
inline EnsembleTomography ensemble_tomography(const DensityOperator& rho, const BasisPair& bp,
                                              const GaussianProbe& probe1, const GaussianProbe& probe2,
                                              double epsilon1, double epsilon2, std::size_t n_per_setting,
                                              std::uint64_t seed, EnsembleGrid grid = {}) {
  if (n_per_setting < 100) throw TooFewSamples("n_per_setting must be >= 100");
  if (epsilon1 == 0.0 || epsilon2 == 0.0) throw InvalidArgument("couplings must be non-zero");
  const int n = bp.dim();
  const ProbeState p1(probe1);
  const ProbeState p2(probe2);
  const double s1 = probe1.sigma_q;
  const double s2 = probe2.sigma_q;
  const double sp1 = probe1.sigma_p();
  const double w = grid.half_width;
  const auto q1 = linspace(std::min(0.0, epsilon1) - w * s1, std::max(0.0, epsilon1) + w * s1, grid.points);
  const auto q2 = linspace(std::min(0.0, epsilon2) - w * s2, std::max(0.0, epsilon2) + w * s2, grid.points);
  const auto pp = linspace(-w * sp1, w * sp1, grid.points);
  const double y_scale = 1.0 / (epsilon1 * epsilon2 * 2.0 * sp1 * sp1);

  EnsembleTomography out{CorrelationSet{bp, epsilon1, s1, RealMatrix::Zero(n, n), RealMatrix::Zero(n, n)},
                         RealMatrix::Zero(n, n), RealMatrix::Zero(n, n), n_per_setting, seed};
  const std::size_t jobs = static_cast<std::size_t>(n) * n * 2;
  parallel_for(jobs, [&](std::size_t job) {
    const int which = static_cast<int>(job % 2);
    const int mu = static_cast<int>((job / 2) % n);
    const int k = static_cast<int>(job / 2 / n);
    const Observable a = projector_observable(bp.projector_k(k));
    const Observable b = projector_observable(bp.projector_mu(mu));
    const std::uint64_t stream = derive_seed(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(mu),
                                                    static_cast<std::uint64_t>(which)});
    if (which == 0) {
      const auto d = joint_pointer_density(rho, a, b, p1, p2, epsilon1, epsilon2, q1, q2);
      const auto r = estimate_correlation(sample_joint_density(d, n_per_setting, stream), CorrelationMode::q1q2);
      out.correlations.x(mu, k) = r.mean / (epsilon1 * epsilon2);
      out.x_std_error(mu, k) = r.std_error / std::abs(epsilon1 * epsilon2);
    } else {
      const auto d = joint_momentum_position_density(rho, a, b, p1, p2, epsilon1, epsilon2, pp, q2);
      const auto r = estimate_correlation(sample_joint_density(d, n_per_setting, stream), CorrelationMode::q1q2);
      out.correlations.y_tilde(mu, k) = r.mean * y_scale;
      out.y_tilde_std_error(mu, k) = r.std_error * std::abs(y_scale);
    }
  });
  return out;
}

}  // namespace vnm
