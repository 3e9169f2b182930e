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

#include "vnm/core_hilbert.hpp"

namespace vnm {
namespace {

Matrix m2(cplx a, cplx b, cplx c, cplx d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const Matrix kSigmaX = m2(0, 1, 1, 0);
const Matrix kSigmaZ = m2(1, 0, 0, -1);

TEST(SpectralDecompose, PauliZ) {
  const auto o = spectral_decompose(kSigmaZ);
  ASSERT_EQ(o.size(), 2u);
  EXPECT_DOUBLE_EQ(o.eigenvalue(0), -1.0);
  EXPECT_DOUBLE_EQ(o.eigenvalue(1), 1.0);
  EXPECT_LT(max_abs(o.projector(0) - m2(0, 0, 0, 1)), 1e-14);
  EXPECT_LT(max_abs(o.projector(1) - m2(1, 0, 0, 0)), 1e-14);
}

TEST(SpectralDecompose, IdentityMergesIntoOneProjector) {
  const auto o = spectral_decompose(Matrix::Identity(3, 3), 1e-8);
  ASSERT_EQ(o.size(), 1u);
  EXPECT_NEAR(o.eigenvalue(0), 1.0, 1e-14);
  EXPECT_LT(max_abs(o.projector(0) - Matrix::Identity(3, 3)), 1e-14);
}

TEST(SpectralDecompose, PauliXProjectorsByMultiplication) {
  const auto o = spectral_decompose(kSigmaX);
  ASSERT_EQ(o.size(), 2u);
  EXPECT_NEAR(o.eigenvalue(0), -1.0, 1e-14);
  EXPECT_LT(max_abs(o.projector(0) - 0.5 * m2(1, -1, -1, 1)), 1e-14);
  EXPECT_LT(max_abs(o.projector(1) - 0.5 * m2(1, 1, 1, 1)), 1e-14);
  for (const auto& p : o.projectors()) EXPECT_LT(max_abs(p * p - p), 1e-14);
  EXPECT_LT(max_abs(-o.projector(0) + o.projector(1) - kSigmaX), 1e-14);
}

TEST(SpectralDecompose, NearDegenerateEigenvaluesMerge) {
  Matrix h = Matrix::Zero(3, 3);
  h.diagonal() << 2.0, 2.0 + 1e-12, -1.0;
  const Matrix u = random_unitary(3, 5);
  const auto o = spectral_decompose(u * h * u.adjoint());
  ASSERT_EQ(o.size(), 2u);
  EXPECT_NEAR(o.projector(1).trace().real(), 2.0, 1e-10);
}

TEST(SpectralDecompose, RejectsNonHermitian) {
  EXPECT_THROW(spectral_decompose(m2(0, 1, 0, 0)), NonHermitianInput);
  EXPECT_THROW(spectral_decompose(kSigmaZ, 0.0), InvalidArgument);
}

TEST(SpectralDecompose, InvariantsOnRandomHermitianMatrices) {
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    const Matrix h = random_hermitian(n, 1000 + trial);
    const auto o = spectral_decompose(h);
    Matrix sum = Matrix::Zero(n, n);
    Matrix recon = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < o.size(); ++i) {
      sum += o.projector(i);
      recon += o.eigenvalue(i) * o.projector(i);
      EXPECT_LT(max_abs(o.projector(i) * o.projector(i) - o.projector(i)), 1e-10);
      for (std::size_t j = i + 1; j < o.size(); ++j) EXPECT_LT(max_abs(o.projector(i) * o.projector(j)), 1e-10);
      if (i > 0) {
        EXPECT_LT(o.eigenvalue(i - 1), o.eigenvalue(i));
      }
    }
    EXPECT_LT(max_abs(sum - Matrix::Identity(n, n)), 1e-10);
    EXPECT_LT(max_abs(recon - h), 1e-10);
  }
}

TEST(BornProbability, Examples) {
  const Matrix p0 = m2(1, 0, 0, 0);
  EXPECT_DOUBLE_EQ(born_probability(DensityOperator::maximally_mixed(2), p0), 0.5);
  EXPECT_NEAR(born_probability(DensityOperator(m2(0.3, 0, 0, 0.7)), p0), 0.3, 1e-15);
  Vector plus(2);
  plus << 1, 1;
  EXPECT_NEAR(born_probability(DensityOperator::pure(plus), p0), 0.5, 1e-15);
}

TEST(BornProbability, DimensionMismatch) {
  EXPECT_THROW(born_probability(DensityOperator::maximally_mixed(2), Matrix::Identity(3, 3)), DimensionMismatch);
}

TEST(BornProbability, SumsToOneOverCompleteObservable) {
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 4;
    const auto rho = random_density(n, 77 + trial);
    const auto o = random_observable(n, 99 + trial);
    double s = 0.0;
    for (const auto& p : o.projectors()) s += born_probability(rho, p);
    EXPECT_NEAR(s, 1.0, 1e-10);
  }
}

TEST(RandomDensity, OneDimensionalStateIsOne) {
  const auto rho = random_density(1, 123456);
  EXPECT_NEAR(std::abs(rho(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(RandomDensity, DeterministicInSeed) {
  EXPECT_EQ(random_density(4, 7).matrix(), random_density(4, 7).matrix());
  EXPECT_NE(random_density(4, 7).matrix(), random_density(4, 8).matrix());
}

TEST(RandomDensity, PassesValidation) {
  const auto rho = random_density(3, 42);
  EXPECT_TRUE(validate_density(rho.matrix(), 1e-12).empty());
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  EXPECT_NEAR(es.eigenvalues().sum(), 1.0, 1e-12);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    ASSERT_TRUE(validate_density(random_density(2 + static_cast<int>(seed % 5), seed).matrix(), 1e-10).empty());
  }
}

TEST(ValidateDensity, Examples) {
  EXPECT_TRUE(validate_density(Matrix::Identity(2, 2) / 2.0, 1e-12).empty());

  const auto trace = validate_density(m2(0.6, 0, 0, 0.6), 1e-12);
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_EQ(trace[0].invariant, "trace");
  EXPECT_NEAR(trace[0].residual, 0.2, 1e-14);

  const auto psd = validate_density(m2(0.5, 0.6, 0.6, 0.5), 1e-12);
  ASSERT_EQ(psd.size(), 1u);
  EXPECT_EQ(psd[0].invariant, "psd");
  EXPECT_NEAR(psd[0].measured, -0.1, 1e-14);

  EXPECT_EQ(validate_density(Matrix::Zero(2, 3), 1e-12).front().invariant, "square");
  EXPECT_EQ(validate_density(m2(0.5, 0.1, 0.2, 0.5), 1e-12).front().invariant, "hermitian");
}

TEST(DensityOperator, ConstructorRejectsInvalidMatrices) {
  EXPECT_THROW(DensityOperator(m2(0.6, 0, 0, 0.6)), InvalidDensity);
  EXPECT_THROW(DensityOperator(m2(0.5, 0.6, 0.6, 0.5)), InvalidDensity);
  EXPECT_THROW(DensityOperator(Matrix::Zero(0, 0)), InvalidDensity);
  EXPECT_THROW(DensityOperator::pure(Vector::Zero(2)), InvalidDensity);
}

TEST(Observable, FromProjectorsValidates) {
  EXPECT_THROW(Observable::from_projectors({0.0, 1.0}, {m2(1, 0, 0, 0), m2(1, 0, 0, 0)}), InvalidObservable);
  EXPECT_THROW(Observable::from_projectors({0.0}, {m2(1, 0, 0, 0)}), InvalidObservable);
  EXPECT_THROW(Observable::from_projectors({1.0, 1.0}, {m2(1, 0, 0, 0), m2(0, 0, 0, 1)}), InvalidObservable);
  const auto o = Observable::from_projectors({3.0, -2.0}, {m2(1, 0, 0, 0), m2(0, 0, 0, 1)});
  EXPECT_DOUBLE_EQ(o.eigenvalue(0), -2.0);
  EXPECT_LT(max_abs(o.matrix() - m2(3, 0, 0, -2)), 1e-15);
  EXPECT_LT(max_abs(o.squared() - m2(9, 0, 0, 4)), 1e-15);
}

TEST(ProjectorObservable, TwoOutcomesAndTrivialCases) {
  const auto o = projector_observable(m2(1, 0, 0, 0));
  ASSERT_EQ(o.size(), 2u);
  EXPECT_DOUBLE_EQ(o.eigenvalue(1), 1.0);
  EXPECT_EQ(projector_observable(Matrix::Identity(2, 2)).size(), 1u);
  EXPECT_THROW(projector_observable(kSigmaX), NotAProjector);
}

TEST(MakeBasisPair, QubitPairHasEqualOverlaps) {
  const double s = 1.0 / std::sqrt(2.0);
  Vector k0(2), k1(2), plus(2), minus(2);
  k0 << 1, 0;
  k1 << 0, 1;
  plus << s, s;
  minus << s, -s;
  const auto bp = make_basis_pair({k0, k1}, {plus, minus});
  for (int mu = 0; mu < 2; ++mu)
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(std::norm(bp.overlap(mu, k)), 0.5, 1e-15);
}

TEST(MakeBasisPair, SameBasisIsMutuallyOrthogonal) {
  Vector k0(2), k1(2);
  k0 << 1, 0;
  k1 << 0, 1;
  try {
    make_basis_pair({k0, k1}, {k0, k1});
    FAIL() << "expected MutuallyOrthogonalPair";
  } catch (const MutuallyOrthogonalPair& e) {
    EXPECT_NE(std::string(e.what()).find("k=0"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("mu=1"), std::string::npos);
  }
}

TEST(MakeBasisPair, FourierPairInDimensionThree) {
  const BasisPair bp(computational_basis(3), fourier_basis(3));
  for (int mu = 0; mu < 3; ++mu)
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::norm(bp.overlap(mu, k)), 1.0 / 3.0, 1e-15);
}

TEST(MakeBasisPair, RejectsNonOrthonormalSets) {
  Vector a(2), b(2);
  a << 1, 0;
  b << 1, 1;
  const auto f = fourier_basis(2);
  EXPECT_THROW(make_basis_pair({a, b}, {f.col(0), f.col(1)}), NotOrthonormal);
  EXPECT_THROW(make_basis_pair({a}, {f.col(0), f.col(1)}), DimensionMismatch);
}

TEST(RandomInstances, UnitaryAndObservableProperties) {
  const Matrix u = random_unitary(4, 3);
  EXPECT_LT(max_abs(u.adjoint() * u - Matrix::Identity(4, 4)), 1e-12);
  const auto o = random_observable(5, 9);
  for (std::size_t i = 1; i < o.size(); ++i) EXPECT_GE(o.eigenvalue(i) - o.eigenvalue(i - 1), 0.05);
  EXPECT_NEAR(random_pure_vector(3, 1).norm(), 1.0, 1e-14);
  EXPECT_LT(hermiticity_residual(random_hermitian(4, 2)), 1e-15);
}

}  // namespace
}  // namespace vnm
