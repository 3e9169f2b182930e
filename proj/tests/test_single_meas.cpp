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

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "vnm/single_meas.hpp"

namespace vnm {
namespace {

Matrix m2(cplx a, cplx b, cplx c, cplx d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const Observable kSigmaZ = spectral_decompose(m2(1, 0, 0, -1));

DensityOperator plus_state() {
  Vector v(2);
  v << 1, 1;
  return DensityOperator::pure(v);
}

Observable seven_level() {
  Matrix a = Matrix::Zero(7, 7);
  for (int i = 0; i < 7; ++i) a(i, i) = i - 3;
  return spectral_decompose(a);
}

DensityOperator seven_weights() {
  const std::vector<double> w = {0.1, 0.2, 0.2, 0.15, 0.2, 0.05, 0.1};
  Matrix r = Matrix::Zero(7, 7);
  for (int i = 0; i < 7; ++i) r(i, i) = w[static_cast<std::size_t>(i)];
  return DensityOperator(r);
}

TEST(PointerDensity, EigenstateGivesSinglePeak) {
  const auto a = seven_level();
  Matrix r = Matrix::Zero(7, 7);
  r(5, 5) = 1.0;
  const ProbeState p(GaussianProbe{0.3});
  const auto grid = linspace(-6, 6, 2001);
  const auto d = pointer_density(DensityOperator(r), a, p, 1.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(d.values[i], position_density_at(p, grid[i] - 2.0), 1e-15);
}

TEST(PointerDensity, SevenResolvedPeaksCarryBornWeights) {
  const auto a = seven_level();
  const auto rho = seven_weights();
  const ProbeState p(GaussianProbe{0.05});
  const auto grid = linspace(-3.4, 3.4, 8192);
  const auto d = pointer_density(rho, a, p, 1.0, grid);
  EXPECT_NEAR(d.integral(), 1.0, 1e-6);
  const std::vector<double> w = {0.1, 0.2, 0.2, 0.15, 0.2, 0.05, 0.1};
  for (int n = 0; n < 7; ++n) {
    double mass = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double mid = 0.5 * (grid[i] + grid[i - 1]);
      if (std::abs(mid - (n - 3)) < 0.5) mass += 0.5 * (d.values[i] + d.values[i - 1]) * (grid[i] - grid[i - 1]);
    }
    EXPECT_NEAR(mass, w[static_cast<std::size_t>(n)], 1e-6) << n;
  }
}

TEST(PointerDensity, WeakCouplingGivesSingleHump) {
  const ProbeState p(GaussianProbe{1.0});
  const auto grid = linspace(-10, 10, 4001);
  const auto rho = seven_weights();
  const auto d = pointer_density(rho, seven_level(), p, 1.0, grid);
  const double center = pointer_moments(rho, seven_level(), p, 1.0).mean_q;
  double mx = 0, mn = 1e300;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - center) <= 1.0) {
      mx = std::max(mx, d.values[i]);
      mn = std::min(mn, d.values[i]);
    }
  EXPECT_LT(mx / mn, 2.0);
  for (double v : d.values) EXPECT_GE(v, 0.0);
}

TEST(PointerDensity, GridTooNarrow) {
  const auto grid = linspace(-2, 2, 101);
  EXPECT_THROW(pointer_density(plus_state(), kSigmaZ, GaussianProbe{0.5}, 1.0, grid), GridTooNarrow);
}

TEST(PointerMoments, Examples) {
  const DensityOperator rho(m2(0.3, 0, 0, 0.7));
  EXPECT_NEAR(pointer_moments(rho, kSigmaZ, GaussianProbe{1.0}, 2.0).mean_q, -0.8, 1e-15);
  const auto mixed = DensityOperator::maximally_mixed(2);
  EXPECT_EQ(pointer_moments(mixed, kSigmaZ, GaussianProbe{1.0}, 3.7).mean_q, 0.0);
  EXPECT_NEAR(pointer_moments(mixed, kSigmaZ, GaussianProbe{0.5}, 1.0).second_moment_q, 1.25, 1e-15);
}

TEST(PointerMoments, MeanIsLinearInEpsilon) {
  for (int t = 0; t < 20; ++t) {
    const auto rho = random_density(3, 10 + t);
    const auto a = random_observable(3, 20 + t);
    const double e = 0.1 + 0.3 * t;
    EXPECT_NEAR(pointer_moments(rho, a, GaussianProbe{1}, 2 * e).mean_q, 2 * pointer_moments(rho, a, GaussianProbe{1}, e).mean_q,
                1e-12);
  }
}

TEST(PointerMoments, GridMomentsMatchClosedForm) {
  const int dims[] = {2, 3, 5};
  for (int t = 0; t < 20; ++t) {
    const int n = dims[t % 3];
    const auto rho = random_density(n, 300 + t);
    const auto a = random_observable(n, 400 + t);
    const double eps = 0.2 + 0.4 * (t % 5);
    const double s = 0.1 + 0.2 * (t % 4);
    const ProbeState p(GaussianProbe{s});
    const auto grid = linspace(-eps - 8 * s, eps + 8 * s, 4001);
    const auto d = pointer_density(rho, a, p, eps, grid);
    std::vector<double> q1(grid.size()), q2(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      q1[i] = grid[i] * d.values[i];
      q2[i] = grid[i] * grid[i] * d.values[i];
    }
    const auto m = pointer_moments(rho, a, p, eps);
    EXPECT_NEAR(trapezoid(q1, grid), m.mean_q, 1e-5);
    EXPECT_NEAR(trapezoid(q2, grid), m.second_moment_q, 1e-5);
  }
}

TEST(PointerCharfn, ExamplesAndFourierOracle) {
  const auto rho = random_density(3, 5);
  const auto a = random_observable(3, 6);
  const ProbeState p(GaussianProbe{0.4});
  EXPECT_NEAR(std::abs(pointer_charfn(rho, a, p, 1.3, 0.0) - 1.0), 0.0, 1e-14);

  Matrix r = Matrix::Zero(3, 3);
  r(0, 0) = 1;
  const auto eig = spectral_decompose(Matrix(Eigen::Vector3d(-1, 0.5, 2).cast<cplx>().asDiagonal()));
  const cplx v = pointer_charfn(DensityOperator(r), eig, p, 1.5, 0.7);
  EXPECT_NEAR(std::abs(v - std::exp(kI * 0.7 * 1.5 * -1.0) * std::exp(-0.5 * 0.49 * 0.16)), 0.0, 1e-14);

  const auto grid = linspace(-8, 8, 8001);
  const auto d = pointer_density(rho, a, p, 1.3, grid);
  for (double k : {0.1, 0.5, 1.0}) {
    std::vector<double> re(grid.size()), im(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      re[i] = d.values[i] * std::cos(k * grid[i]);
      im[i] = d.values[i] * std::sin(k * grid[i]);
    }
    const cplx numeric(trapezoid(re, grid), trapezoid(im, grid));
    EXPECT_NEAR(std::abs(numeric - pointer_charfn(rho, a, p, 1.3, k)), 0.0, 1e-5) << k;
  }
}

TEST(ReducedState, ZeroCouplingLeavesStateUnchanged) {
  const auto rho = random_density(4, 1);
  const auto r = reduced_state_after(rho, random_observable(4, 2), GaussianProbe{1}, 0.0);
  EXPECT_LT(max_abs(r.matrix() - rho.matrix()), 1e-15);
}

TEST(ReducedState, QubitOffDiagonalClosedForm) {
  for (double eps : {0.3, 1.0, 2.5, 10.0}) {
    const double s = 1.0;
    const auto r = reduced_state_after(plus_state(), kSigmaZ, GaussianProbe{s}, eps);
    EXPECT_NEAR(std::abs(r(0, 1)), 0.5 * std::exp(-eps * eps * 4 / (8 * s * s)), 1e-15);
    EXPECT_NEAR(r(0, 0).real(), 0.5, 1e-15);
  }
  const auto r = reduced_state_after(plus_state(), kSigmaZ, GaussianProbe{1}, 10.0);
  EXPECT_LT(max_abs(r.matrix() - Matrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(ReducedState, EigenvectorEquationInStrongLimit) {
  for (int t = 0; t < 10; ++t) {
    const Vector psi = random_pure_vector(4, 50 + t);
    const auto rho = DensityOperator::pure(psi);
    const auto a = random_observable(4, 60 + t);
    const auto strong = reduced_state_after(rho, a, GaussianProbe{1}, 1e4);
    const auto lud = luders(rho, a);
    for (std::size_t nu = 0; nu < a.size(); ++nu) {
      const Vector v = a.projector(nu) * psi;
      const double w = (psi.adjoint() * a.projector(nu) * psi)(0).real();
      EXPECT_LT((strong.matrix() * v - w * v).norm(), 1e-12);
      EXPECT_LT((lud.matrix() * v - w * v).norm(), 1e-12);
    }
  }
}

TEST(ReducedState, EigenvectorEquationFailsAtFiniteCoupling) {
  const Vector psi = random_pure_vector(3, 5);
  const auto a = random_observable(3, 6);
  const auto rf = reduced_state_after(DensityOperator::pure(psi), a, GaussianProbe{1}, 0.5);
  const Vector v = a.projector(0) * psi;
  const double w = (psi.adjoint() * a.projector(0) * psi)(0).real();
  EXPECT_GT((rf.matrix() * v - w * v).norm(), 1e-3);
}

TEST(ReducedState, PreservesTraceHermiticityAndPositivity) {
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 4;
    const auto rho = random_density(n, 700 + t);
    const auto a = random_observable(n, 800 + t);
    const auto rf = reduced_state_after(rho, a, GaussianProbe{0.7}, 0.05 * t);
    EXPECT_NEAR(std::abs(rf.matrix().trace() - 1.0), 0.0, 1e-12);
    EXPECT_LT(hermiticity_residual(rf.matrix()), 1e-12);
    EXPECT_GE(min_eigenvalue(rf.matrix()), -1e-10);
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_LT(max_abs(a.projector(k) * (rf.matrix() - rho.matrix()) * a.projector(k)), 1e-12);
    }
  }
}

TEST(ReducedState, OffDiagonalDampingIsMonotone) {
  const auto rho = random_density(3, 9);
  const auto a = random_observable(3, 10);
  double prev[3][3] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) prev[i][j] = 1e300;
  for (double eps = 0; eps <= 20; eps += 0.5) {
    const Matrix rf = reduced_state_after(rho, a, GaussianProbe{1}, eps).matrix();
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t m = 0; m < 3; ++m) {
        if (n == m) continue;
        const double v = (a.projector(n) * rf * a.projector(m)).norm();
        EXPECT_LE(v, prev[n][m] + 1e-15);
        prev[n][m] = v;
      }
  }
}

TEST(Luders, Examples) {
  const DensityOperator diag(m2(0.2, 0, 0, 0.8));
  EXPECT_LT(max_abs(luders(diag, kSigmaZ).matrix() - diag.matrix()), 1e-15);
  EXPECT_LT(max_abs(luders(plus_state(), kSigmaZ).matrix() - Matrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(Luders, StrongCouplingLimitAndIdempotence) {
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 4;
    const auto rho = random_density(n, 900 + t);
    const auto a = random_observable(n, 950 + t);
    const auto l = luders(rho, a);
    EXPECT_LT(max_abs(reduced_state_after(rho, a, GaussianProbe{1}, 1e3).matrix() - l.matrix()), 1e-12);
    EXPECT_LT(max_abs(luders(l, a).matrix() - l.matrix()), 1e-12);
  }
}

TEST(ProjectorYes, Examples) {
  const auto mixed = DensityOperator::maximally_mixed(2);
  EXPECT_NEAR(projector_yes_probability(mixed, Matrix::Identity(2, 2), GaussianProbe{1}, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(projector_yes_probability(mixed, m2(1, 0, 0, 0), GaussianProbe{1}, 1.0), 0.5, 1e-15);
  const auto rho = random_density(3, 4);
  const Vector v = random_pure_vector(3, 5);
  const Matrix p = outer(v);
  const double ref = projector_yes_probability(rho, p, GaussianProbe{1}, 0.01);
  for (double eps : {1.0, 100.0}) EXPECT_NEAR(projector_yes_probability(rho, p, GaussianProbe{0.3}, eps), ref, 1e-12);
  EXPECT_NEAR(ref, (rho.matrix() * p).trace().real(), 1e-12);
  EXPECT_THROW(projector_yes_probability(rho, 2.0 * p, GaussianProbe{1}, 1.0), NotAProjector);
  EXPECT_THROW(projector_yes_probability(rho, p, GaussianProbe{1}, 0.0), InvalidArgument);
}

TEST(QndCheck, PauliZAndRandomObservables) {
  const auto r = qnd_check(m2(1, 0, 0, -1), ProbeReadout::position, 1.0);
  EXPECT_TRUE(r.info_gain);
  EXPECT_TRUE(r.nondemolition);
  const auto rm = qnd_check(m2(1, 0, 0, -1), ProbeReadout::momentum, -1.0);
  EXPECT_TRUE(rm.info_gain);
  EXPECT_TRUE(rm.nondemolition);
  EXPECT_FALSE(rm.note.empty());
  for (int t = 0; t < 10; ++t) {
    const auto q = qnd_check(random_hermitian(4, 30 + t), ProbeReadout::position, 0.5);
    EXPECT_TRUE(q.nondemolition);
    EXPECT_LT(q.residuals.at("[V,A_s]"), 1e-12);
    EXPECT_LT(q.residuals.at("[H_s,A_s]"), 1e-12);
    EXPECT_LT(q.residuals.at("[V,P]"), 1e-12);
  }
  EXPECT_THROW(qnd_check(m2(0, 1, 0, 0), ProbeReadout::position, 1.0), NonHermitianInput);
}

TEST(SingleProbeOracle, PointerDensityMatchesEvolvedWavefunction) {
  // one-probe experiment: take eps2 = 0 so the second probe is untouched;
  // eps * a_n land on grid nodes (dq = 0.09375)
  const auto rho = random_density(3, 17);
  const Matrix a = basis_observable(random_unitary(3, 18), {-0.75, 0.375, 1.125}).matrix();
  const auto p1 = oracle::skewed_probe();
  const auto p2 = GridProbe::gaussian(1.0, -12, 12, 64);
  const auto r = oracle::two_probe_experiment(rho.matrix(), a, Matrix::Zero(3, 3), p1, p2, 1.0, 0.0);
  const auto obs = spectral_decompose(a);
  const auto d = pointer_density(rho, obs, ProbeState(p1), 1.0, r.q1_grid);
  double err = 0;
  for (std::size_t i = 0; i < r.q1_grid.size(); ++i) {
    double marg = 0;
    for (std::size_t j = 0; j < r.q2_grid.size(); ++j) marg += r.density_qq[i * r.q2_grid.size() + j] * p2.dq();
    err = std::max(err, std::abs(marg - d.values[i]));
  }
  EXPECT_LT(err, 1e-10);
  const auto rf_direct = reduced_state_after(rho, obs, ProbeState(p1), 1.0);
  EXPECT_LT(hermiticity_residual(rf_direct.matrix()), 1e-12);
}

}  // namespace
}  // namespace vnm
