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

// Finite-dimensional Hilbert-space primitives: density operators,
// observables in spectral form, pairs of orthonormal bases and the random
// instance generators used by tests and scenarios.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "vnm/errors.hpp"
#include "vnm/rng.hpp"

namespace vnm {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr cplx kI{0.0, 1.0};

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_residual(const Matrix& m) { return max_abs(m - m.adjoint()); }

inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline Matrix outer(const Vector& v) { return v * v.adjoint(); }

inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string invariant;  // "square", "hermitian", "trace" or "psd"
  double residual;        // size of the violation (always >= 0)
  double measured;        // the measured quantity (max |M-M^+|, Tr M, min eigenvalue)
};

using ValidationReport = std::vector<Violation>;

/// Checks the three density-operator invariants at tolerance `tol`.
/// Empty report iff all hold.
inline ValidationReport validate_density(const Matrix& m, double tol) {
  ValidationReport report;
  if (m.rows() != m.cols() || m.rows() == 0) {
    report.push_back({"square", 1.0, static_cast<double>(m.rows() - m.cols())});
    return report;
  }
  const double herm = hermiticity_residual(m);
  if (herm > tol) report.push_back({"hermitian", herm, herm});
  const cplx tr = m.trace();
  const double tr_res = std::abs(tr - 1.0);
  if (tr_res > tol) report.push_back({"trace", tr_res, tr.real()});
  const double lmin = min_eigenvalue(m);
  if (lmin < -tol) report.push_back({"psd", -lmin, lmin});
  return report;
}

inline std::string describe(const ValidationReport& report) {
  std::ostringstream os;
  for (std::size_t i = 0; i < report.size(); ++i) {
    if (i) os << "; ";
    os << report[i].invariant << " violated (residual " << report[i].residual << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// DensityOperator

/// Unit-trace, Hermitian, positive semi-definite N x N matrix. Immutable.
class DensityOperator {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;
  static constexpr double kPsdTol = 1e-10;

  explicit DensityOperator(const Matrix& m) {
    ValidationReport report;
    if (m.rows() != m.cols() || m.rows() == 0) {
      throw InvalidDensity("density matrix must be square and non-empty");
    }
    const double herm = hermiticity_residual(m);
    if (herm > kHermitianTol) report.push_back({"hermitian", herm, herm});
    const double tr_res = std::abs(m.trace() - 1.0);
    if (tr_res > kTraceTol) report.push_back({"trace", tr_res, m.trace().real()});
    const double lmin = min_eigenvalue(m);
    if (lmin < -kPsdTol) report.push_back({"psd", -lmin, lmin});
    if (!report.empty()) throw InvalidDensity(describe(report));
    matrix_ = hermitize(m);
  }

  /// |psi><psi| for the normalized direction of `psi`.
  static DensityOperator pure(const Vector& psi) {
    const double n = psi.norm();
    if (n < 1e-300) throw InvalidDensity("pure state vector has zero norm");
    const Vector u = psi / n;
    return DensityOperator(outer(u));
  }

  static DensityOperator maximally_mixed(int dim) {
    return DensityOperator(Matrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  cplx operator()(int r, int c) const { return matrix_(r, c); }

 private:
  Matrix matrix_;
};

// ---------------------------------------------------------------------------
// Observable

/// Hermitian operator in spectral form: distinct ascending eigenvalues with
/// mutually orthogonal eigenprojectors (degenerate groups allowed).
class Observable {
 public:
  static constexpr double kTol = 1e-10;

  /// Validates idempotence, orthogonality and completeness; sorts ascending.
  static Observable from_projectors(std::vector<double> eigenvalues, std::vector<Matrix> projectors) {
    if (eigenvalues.size() != projectors.size() || eigenvalues.empty()) {
      throw InvalidObservable("eigenvalue and projector counts differ or are zero");
    }
    const auto dim = projectors.front().rows();
    std::vector<std::size_t> order(eigenvalues.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return eigenvalues[a] < eigenvalues[b]; });
    Observable obs;
    Matrix sum = Matrix::Zero(dim, dim);
    for (auto i : order) {
      const Matrix& p = projectors[i];
      if (p.rows() != dim || p.cols() != dim) throw DimensionMismatch("projector dimensions differ");
      if (hermiticity_residual(p) > kTol) throw InvalidObservable("projector is not Hermitian");
      if (max_abs(p * p - p) > kTol) throw InvalidObservable("projector is not idempotent");
      if (!obs.eigenvalues_.empty() && eigenvalues[i] == obs.eigenvalues_.back()) {
        throw InvalidObservable("eigenvalues must be distinct");
      }
      obs.eigenvalues_.push_back(eigenvalues[i]);
      obs.projectors_.push_back(hermitize(p));
      sum += p;
    }
    if (max_abs(sum - Matrix::Identity(dim, dim)) > kTol) {
      throw InvalidObservable("projectors do not resolve the identity");
    }
    for (std::size_t a = 0; a < obs.projectors_.size(); ++a)
      for (std::size_t b = a + 1; b < obs.projectors_.size(); ++b)
        if (max_abs(obs.projectors_[a] * obs.projectors_[b]) > kTol)
          throw InvalidObservable("projectors are not mutually orthogonal");
    return obs;
  }

  int dim() const { return static_cast<int>(projectors_.front().rows()); }
  std::size_t size() const { return eigenvalues_.size(); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const std::vector<Matrix>& projectors() const { return projectors_; }
  double eigenvalue(std::size_t n) const { return eigenvalues_[n]; }
  const Matrix& projector(std::size_t n) const { return projectors_[n]; }

  Matrix matrix() const {
    Matrix m = Matrix::Zero(dim(), dim());
    for (std::size_t n = 0; n < size(); ++n) m += eigenvalues_[n] * projectors_[n];
    return m;
  }

  Matrix squared() const {
    Matrix m = Matrix::Zero(dim(), dim());
    for (std::size_t n = 0; n < size(); ++n) m += eigenvalues_[n] * eigenvalues_[n] * projectors_[n];
    return m;
  }

  double max_abs_eigenvalue() const {
    return std::max(std::abs(eigenvalues_.front()), std::abs(eigenvalues_.back()));
  }

 private:
  Observable() = default;
  std::vector<double> eigenvalues_;
  std::vector<Matrix> projectors_;
};

/// Spectral decomposition; eigenvalues closer than `degeneracy_tol` (chained,
/// in ascending order) are merged into one eigenprojector.
inline Observable spectral_decompose(const Matrix& h, double degeneracy_tol) {
  if (h.rows() != h.cols()) throw DimensionMismatch("observable matrix is not square");
  if (!(degeneracy_tol > 0)) throw InvalidArgument("degeneracy_tol must be > 0");
  if (hermiticity_residual(h) > 1e-10) {
    throw NonHermitianInput("matrix is not Hermitian (residual " +
                            std::to_string(hermiticity_residual(h)) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  std::vector<double> eigs;
  std::vector<Matrix> projs;
  const int n = static_cast<int>(h.rows());
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && vals(end) - vals(end - 1) <= degeneracy_tol) ++end;
    Matrix p = Matrix::Zero(n, n);
    double mean = 0.0;
    for (int j = start; j < end; ++j) {
      p += outer(vecs.col(j));
      mean += vals(j);
    }
    eigs.push_back(mean / (end - start));
    projs.push_back(p);
    start = end;
  }
  return Observable::from_projectors(std::move(eigs), std::move(projs));
}

/// Default tolerance: 1e-8 * max |eigenvalue| (absolute 1e-8 for the zero matrix).
inline Observable spectral_decompose(const Matrix& h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("observable matrix is not square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h), Eigen::EigenvaluesOnly);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  return spectral_decompose(h, 1e-8 * (scale > 0 ? scale : 1.0));
}

inline bool is_projector(const Matrix& p, double tol = 1e-10) {
  return p.rows() == p.cols() && hermiticity_residual(p) <= tol && max_abs(p * p - p) <= tol;
}

/// The two-outcome observable {0: I - P, 1: P}. A projector equal to 0 or I
/// yields a single-outcome observable.
inline Observable projector_observable(const Matrix& p) {
  if (!is_projector(p)) throw NotAProjector("matrix is not a Hermitian idempotent");
  const auto n = p.rows();
  const Matrix q = Matrix::Identity(n, n) - p;
  if (max_abs(p) < 1e-10) return Observable::from_projectors({0.0}, {q});
  if (max_abs(q) < 1e-10) return Observable::from_projectors({1.0}, {p});
  return Observable::from_projectors({0.0, 1.0}, {q, p});
}

/// Nondegenerate observable with the given eigenvectors (columns of `basis`).
inline Observable basis_observable(const Matrix& basis, const std::vector<double>& eigenvalues) {
  std::vector<Matrix> projs;
  for (int j = 0; j < basis.cols(); ++j) projs.push_back(outer(basis.col(j)));
  return Observable::from_projectors(eigenvalues, std::move(projs));
}

/// Tr(rho P), clamped to [0, 1].
inline double born_probability(const DensityOperator& rho, const Matrix& proj) {
  if (proj.rows() != rho.dim() || proj.cols() != rho.dim()) {
    throw DimensionMismatch("projector and state dimensions differ");
  }
  const double w = (rho.matrix() * proj).trace().real();
  return std::clamp(w, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// BasisPair

/// Two orthonormal bases {|k>} and {|mu)} (stored as matrix columns) with
/// overlaps(mu, k) = (mu|k>. Construction requires every overlap non-zero.
class BasisPair {
 public:
  static constexpr double kOrthonormalTol = 1e-12;
  static constexpr double kMinOverlap = 1e-10;

  BasisPair(const Matrix& basis_k, const Matrix& basis_mu) : basis_k_(basis_k), basis_mu_(basis_mu) {
    const auto n = basis_k.rows();
    if (basis_k.cols() != n || basis_mu.rows() != n || basis_mu.cols() != n || n == 0) {
      throw DimensionMismatch("both bases need N vectors of dimension N");
    }
    check_orthonormal(basis_k, "basis_k");
    check_orthonormal(basis_mu, "basis_mu");
    overlaps_ = basis_mu.adjoint() * basis_k;
    for (int k = 0; k < n; ++k)
      for (int mu = 0; mu < n; ++mu)
        if (std::abs(overlaps_(mu, k)) < kMinOverlap) {
          throw MutuallyOrthogonalPair("bases are mutually orthogonal at (k=" + std::to_string(k) +
                                       ", mu=" + std::to_string(mu) + ")");
        }
  }

  int dim() const { return static_cast<int>(basis_k_.rows()); }
  const Matrix& basis_k() const { return basis_k_; }
  const Matrix& basis_mu() const { return basis_mu_; }
  Vector k(int i) const { return basis_k_.col(i); }
  Vector mu(int i) const { return basis_mu_.col(i); }
  /// (mu|k>
  cplx overlap(int mu, int k) const { return overlaps_(mu, k); }
  const Matrix& overlaps() const { return overlaps_; }
  Matrix projector_k(int i) const { return outer(basis_k_.col(i)); }
  Matrix projector_mu(int i) const { return outer(basis_mu_.col(i)); }

 private:
  static void check_orthonormal(const Matrix& b, const char* name) {
    const double res = max_abs(b.adjoint() * b - Matrix::Identity(b.cols(), b.cols()));
    if (res > kOrthonormalTol) {
      throw NotOrthonormal(std::string(name) + " is not orthonormal (residual " + std::to_string(res) + ")");
    }
  }

  Matrix basis_k_;
  Matrix basis_mu_;
  Matrix overlaps_;
};

inline BasisPair make_basis_pair(const std::vector<Vector>& basis_k, const std::vector<Vector>& basis_mu) {
  const auto n = static_cast<Eigen::Index>(basis_k.size());
  if (n == 0 || static_cast<Eigen::Index>(basis_mu.size()) != n) {
    throw DimensionMismatch("both bases need N vectors");
  }
  Matrix bk(n, n), bm(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (basis_k[j].size() != n || basis_mu[j].size() != n) throw DimensionMismatch("vector dimension differs from N");
    bk.col(j) = basis_k[j];
    bm.col(j) = basis_mu[j];
  }
  return BasisPair(bk, bm);
}

inline Matrix computational_basis(int n) { return Matrix::Identity(n, n); }

/// Discrete Fourier basis: column j has entries exp(2 pi i j l / N) / sqrt(N).
inline Matrix fourier_basis(int n) {
  Matrix f(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      f(l, j) = std::polar(s, 2.0 * std::numbers::pi * j * l / n);
  return f;
}

/// Computational basis {|0>,|1>} paired with {|+), |-)}, |+-) = (|0> +- |1>)/sqrt 2.
inline BasisPair canonical_qubit_pair() {
  Matrix pm(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  pm << s, s, s, -s;
  return BasisPair(computational_basis(2), pm);
}

// ---------------------------------------------------------------------------
// Random instances

namespace detail {
inline Matrix ginibre(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) g(r, c) = cplx(normal(rng), normal(rng));
  return g;
}
}  // namespace detail

/// Hilbert-Schmidt random state G G^+ / Tr(G G^+); deterministic in `seed`.
inline DensityOperator random_density(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("dimension must be >= 1");
  auto rng = make_rng(seed, {0x7d1});
  const Matrix g = detail::ginibre(n, rng);
  Matrix m = g * g.adjoint();
  m = hermitize(m / m.trace().real());
  return DensityOperator(m);
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fix).
inline Matrix random_unitary(int n, std::uint64_t seed) {
  auto rng = make_rng(seed, {0x3a7});
  const Matrix g = detail::ginibre(n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline Vector random_pure_vector(int n, std::uint64_t seed) {
  auto rng = make_rng(seed, {0x51e});
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(normal(rng), normal(rng));
  return v / v.norm();
}

/// GUE-like random Hermitian matrix.
inline Matrix random_hermitian(int n, std::uint64_t seed) {
  auto rng = make_rng(seed, {0x4e2});
  return hermitize(detail::ginibre(n, rng));
}

/// Nondegenerate observable with eigenvalues uniform in [-1, 1], pairwise
/// separated by at least `min_gap`, and a Haar-random eigenbasis.
inline Observable random_observable(int n, std::uint64_t seed, double min_gap = 0.05) {
  auto rng = make_rng(seed, {0x0b5});
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> eigs(n);
  for (int attempt = 0;; ++attempt) {
    for (auto& e : eigs) e = uni(rng);
    std::sort(eigs.begin(), eigs.end());
    bool ok = true;
    for (int i = 1; i < n; ++i) ok = ok && (eigs[i] - eigs[i - 1] >= min_gap);
    if (ok) break;
    if (attempt > 10000) throw InvalidArgument("min_gap too large for the requested dimension");
  }
  return basis_observable(random_unitary(n, seed ^ 0x9e37ULL), eigs);
}

}  // namespace vnm
