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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "vnm/probe.hpp"
#include "vnm/single_meas.hpp"

namespace vnm {
namespace {

const double kE05 = std::exp(-0.5);

GridProbe grid_gaussian(double sigma = 0.5) { return GridProbe::gaussian(sigma, -8, 8, 1024); }

std::vector<ProbeState> probe_family() {
  return {ProbeState(GaussianProbe{0.5}), ProbeState(grid_gaussian()), ProbeState(grid_gaussian(1.3)),
          ProbeState(oracle::skewed_probe()), ProbeState(oracle::chirped_probe()),
          ProbeState(oracle::chirped_probe(0.7, -0.5))};
}

TEST(CharG, UnityAtZero) {
  for (const auto& p : probe_family()) EXPECT_NEAR(std::abs(char_g(p, 0.0) - 1.0), 0.0, 1e-12);
}

TEST(CharG, GaussianClosedForm) {
  EXPECT_NEAR(char_g(GaussianProbe{0.5}, 1.0).real(), kE05, 1e-15);
  EXPECT_NEAR(kE05, 0.606531, 1e-6);
}

TEST(CharG, GridGaussianMatchesClosedForm) {
  EXPECT_NEAR(std::abs(char_g(grid_gaussian(), 1.0) - kE05), 0.0, 1e-6);
}

TEST(CharG, MatchesOverlapIntegral) {
  for (const auto& gp : {grid_gaussian(), oracle::skewed_probe(), oracle::chirped_probe()}) {
    for (int shift : {1, 7, 20, -13}) {
      const double beta = shift * gp.dq();
      EXPECT_NEAR(std::abs(char_g(gp, beta) - oracle::g_by_overlap(gp, shift)), 0.0, 1e-12) << shift;
    }
  }
}

TEST(CharG, BoundedByOneAndHermitianSymmetric) {
  for (const auto& p : probe_family()) {
    const double s = sigma_q(p);
    for (int i = 0; i < 100; ++i) {
      const double beta = -10 * s + 20 * s * i / 99.0;
      EXPECT_LE(std::abs(char_g(p, beta)), 1.0 + 1e-12);
      EXPECT_NEAR(std::abs(char_g(p, -beta) - std::conj(char_g(p, beta))), 0.0, 1e-12);
    }
  }
}

TEST(LambdaFn, UnityAtZero) {
  for (const auto& p : probe_family()) EXPECT_EQ(lambda_fn(p, 0.0), cplx(1.0));
}

TEST(LambdaFn, GaussianEqualsG) {
  EXPECT_NEAR(lambda_fn(GaussianProbe{0.5}, 1.0).real(), kE05, 1e-15);
  EXPECT_NEAR(std::abs(lambda_fn(grid_gaussian(), 1.0) - kE05), 0.0, 1e-6);
  EXPECT_NEAR(std::abs(char_h(grid_gaussian(), 1.0)), 0.0, 1e-10);
}

TEST(LambdaFn, HMatchesDirectQuadrature) {
  for (const auto& gp : {oracle::skewed_probe(), oracle::chirped_probe(), oracle::chirped_probe(0.7, -0.5)}) {
    for (int half : {1, 4, 11}) {
      const double beta = 2 * half * gp.dq();
      EXPECT_NEAR(std::abs(char_h(gp, beta) - oracle::h_by_quadrature(gp, half)), 0.0, 1e-10) << half;
    }
  }
}

TEST(LambdaFn, NonGaussianProbesDifferFromG) {
  const ProbeState skew(oracle::skewed_probe());
  const ProbeState chirp(oracle::chirped_probe());
  EXPECT_GT(std::abs(char_h(skew, 1.0)), 1e-3);
  EXPECT_GT(std::abs(lambda_fn(chirp, 1.0).imag()), 1e-3);
}

TEST(LambdaTilde, ExamplesAndGaussianIdentity) {
  for (const auto& p : probe_family()) EXPECT_EQ(lambda_tilde_fn(p, 0.0), cplx(1.0));
  EXPECT_NEAR(lambda_tilde_fn(GaussianProbe{0.5}, 1.0).real(), kE05, 1e-15);
  EXPECT_NEAR(std::abs(lambda_tilde_fn(grid_gaussian(), 1.0) - kE05), 0.0, 1e-5);
  const ProbeState g(GaussianProbe{0.8});
  const ProbeState gg(GridProbe::gaussian(0.8, -12, 12, 1024));
  for (double beta = -4; beta <= 4; beta += 0.25) {
    EXPECT_NEAR(std::abs(lambda_fn(g, beta) - char_g(g, beta)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(lambda_tilde_fn(g, beta) - char_g(g, beta)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(lambda_fn(gg, beta) - char_g(g, beta)), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(lambda_tilde_fn(gg, beta) - char_g(g, beta)), 0.0, 1e-6);
  }
}

TEST(LambdaTilde, MatchesFiniteDifferenceOfOverlapG) {
  // lambda-bar(beta) = g'(beta)/beta with g from the overlap integral and a
  // central difference of one grid step; lambda-bar(0) from the second difference.
  for (const auto& gp : {oracle::skewed_probe(-12, 12, 2048), oracle::chirped_probe(1.0, 0.3, -12, 12, 2048)}) {
    const double h = gp.dq();
    const cplx l0 = (oracle::g_by_overlap(gp, 1) - 2.0 * oracle::g_by_overlap(gp, 0) + oracle::g_by_overlap(gp, -1)) / (h * h);
    for (int shift : {40, 85, 170}) {
      const double beta = shift * h;
      const cplx lbar = (oracle::g_by_overlap(gp, shift + 1) - oracle::g_by_overlap(gp, shift - 1)) / (2 * h) / beta;
      EXPECT_NEAR(std::abs(lambda_tilde_fn(gp, beta) - lbar / l0), 0.0, 1e-4) << shift;
    }
  }
}

TEST(LambdaTilde, FlatProbeIsDegenerate) {
  // <P^2> = 1/(4 sigma^2) falls below the guard for a very wide packet
  const double big = 1e8;
  const ProbeState wide(GridProbe::gaussian(big, -16 * big, 16 * big, 1024));
  EXPECT_THROW(lambda_tilde_fn(wide, 1.0), DegenerateProbe);
}

TEST(GridProbe, ValidatesInputs) {
  EXPECT_THROW(GridProbe(-1, 1, std::vector<cplx>(100, 1.0)), InvalidProbe);
  EXPECT_THROW(GridProbe(1, -1, std::vector<cplx>(128, 1.0)), InvalidProbe);
  EXPECT_THROW(GridProbe(-1, 1, std::vector<cplx>(128, 1.0)), InvalidProbe);
  EXPECT_THROW(GaussianProbe(-1.0), InvalidProbe);
  EXPECT_THROW(ProbeState(GridProbe::gaussian(0.5, -8, 8, 1024, 0.3)), UncenteredProbe);
}

TEST(Boost, IdentityAndAdditivity) {
  const auto g = grid_gaussian();
  const auto b0 = boost(g, 0.0);
  for (std::size_t j = 0; j < g.n_points(); ++j) EXPECT_EQ(b0.amplitudes()[j], g.amplitudes()[j]);
  const auto twice = boost(boost(g, 1.0), 1.0);
  const auto once = boost(g, 2.0);
  double err = 0;
  for (std::size_t j = 0; j < g.n_points(); ++j) err = std::max(err, std::abs(twice.amplitudes()[j] - once.amplitudes()[j]));
  EXPECT_LT(err, 1e-12);
  EXPECT_NEAR(once.norm(), 1.0, 1e-12);
}

TEST(Boost, MomentumPeakMovesToP0) {
  const auto b = boost(grid_gaussian(), 2.0);
  const auto& rho = b.momentum_density();
  const auto k = static_cast<std::size_t>(std::max_element(rho.begin(), rho.end()) - rho.begin());
  EXPECT_NEAR(b.p(k), 2.0, b.dp());
  EXPECT_NEAR(b.mean_p(), 2.0, 1e-10);
}

TEST(FreeEvolve, ZeroTimeIsIdentity) {
  const auto g = grid_gaussian();
  const auto e = free_evolve(g, 1.0, 0.0);
  for (std::size_t j = 0; j < g.n_points(); ++j) EXPECT_NEAR(std::abs(e.probe.amplitudes()[j] - g.amplitudes()[j]), 0.0, 1e-14);
}

TEST(FreeEvolve, GaussianSpreadingLaw) {
  const double s = 0.5, m = 1.3, t = 0.8;
  const auto g = GridProbe::gaussian(s, -32, 32, 2048);
  const auto e = free_evolve(g, m, t);
  EXPECT_FALSE(e.boundary_leak);
  EXPECT_NEAR(e.probe.norm(), 1.0, 1e-10);
  EXPECT_NEAR(std::sqrt(e.probe.variance_q()), s * std::sqrt(1 + std::pow(t / (2 * m * s * s), 2)), 1e-8);
}

TEST(FreeEvolve, BoostedCenterMoves) {
  const auto g = GridProbe::gaussian(0.5, -32, 32, 2048);
  const auto e = free_evolve(boost(g, 2.0), 1.0, 1.0);
  EXPECT_NEAR(e.probe.mean_q(), 2.0, 1e-10);
}

TEST(FreeEvolve, BackwardEvolutionRestoresState) {
  const auto g = oracle::chirped_probe(0.6, 0.2, -20, 20, 1024);
  const auto back = free_evolve(free_evolve(g, 0.7, 1.5).probe, 0.7, -1.5).probe;
  double err = 0;
  for (std::size_t j = 0; j < g.n_points(); ++j) err = std::max(err, std::abs(back.amplitudes()[j] - g.amplitudes()[j]));
  EXPECT_LT(err, 1e-10);
}

TEST(FreeEvolve, FlagsBoundaryLeak) {
  const auto g = GridProbe::gaussian(0.5, -4, 4, 256);
  EXPECT_TRUE(free_evolve(g, 1.0, 10.0).boundary_leak);
  EXPECT_THROW(free_evolve(g, 0.0, 1.0), InvalidArgument);
}

TEST(PositionDensity, GaussianValueAndSymmetry) {
  const ProbeState p(GaussianProbe{1.0});
  const std::vector<double> q = {0.0, 0.7, -0.7};
  const auto d = position_density(p, q);
  EXPECT_NEAR(d[0], 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(d[0], 0.398942, 1e-6);
  EXPECT_DOUBLE_EQ(d[1], d[2]);
}

TEST(PositionDensity, GridProbeIntegratesToOne) {
  for (const auto& gp : {grid_gaussian(), oracle::skewed_probe(), oracle::chirped_probe()}) {
    std::vector<double> q(gp.n_points());
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = gp.q(j);
    EXPECT_NEAR(trapezoid(position_density(ProbeState(gp), q), q), 1.0, 1e-8);
  }
}

TEST(ProbeMoments, GaussianAndGrid) {
  const ProbeState g(GaussianProbe{0.5});
  EXPECT_DOUBLE_EQ(position_variance(g), 0.25);
  EXPECT_DOUBLE_EQ(momentum_second_moment(g), 1.0);
  const ProbeState gg(grid_gaussian());
  EXPECT_NEAR(position_variance(gg), 0.25, 1e-10);
  EXPECT_NEAR(momentum_second_moment(gg), 1.0, 1e-8);
}

}  // namespace
}  // namespace vnm
