#include "khess/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "khess/error.hpp"

namespace khess {

namespace {

void check_dim(int n) {
  if (n < 2 || n > kMaxDim) {
    throw Error(Errc::DimensionMismatch,
                "dimension " + std::to_string(n) + " outside [2, " + std::to_string(kMaxDim) + "]");
  }
}

void check_same_dim(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(Errc::DimensionMismatch, "forms of dimension " + std::to_string(a.dim()) +
                                             " and " + std::to_string(b.dim()));
  }
}

void check_degree(int n, int k) {
  if (k < 1 || k > n) {
    throw Error(Errc::DimensionMismatch,
                "degree k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
}

// Cholesky factor of the metric; L^{-1} A L^{-*} has the relative eigenvalues.
Eigen::LLT<ComplexMatrix> metric_factor(const HermitianMatrix& g) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g.entries(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || es.eigenvalues()(0) <= kMetricFloor) {
    throw Error(Errc::NonPositiveMetric, "metric is not positive definite");
  }
  Eigen::LLT<ComplexMatrix> llt(g.entries());
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NonPositiveMetric, "Cholesky factorization of the metric failed");
  }
  return llt;
}

ComplexMatrix reduce(const HermitianMatrix& a, const Eigen::LLT<ComplexMatrix>& llt) {
  const auto l = llt.matrixL();
  ComplexMatrix tmp = l.solve(a.entries());
  ComplexMatrix out = l.solve(tmp.adjoint()).adjoint();
  return (out + out.adjoint()) * 0.5;
}

EigenValues hermitian_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  EigenValues out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  return out;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const ComplexMatrix& entries) {
  if (entries.rows() != entries.cols()) {
    throw Error(Errc::DimensionMismatch, "form coefficients must be a square matrix");
  }
  check_dim(static_cast<int>(entries.rows()));
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double skew = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  if (!(skew <= kHermitianTolerance * scale)) {
    throw Error(Errc::NonHermitianInput, "A - A* has entry of size " + std::to_string(skew));
  }
  if (!entries.allFinite()) throw Error(Errc::NonHermitianInput, "non-finite entry");
  m_ = (entries + entries.adjoint()) * 0.5;
}

HermitianMatrix HermitianMatrix::identity(int n) {
  check_dim(n);
  return HermitianMatrix(ComplexMatrix::Identity(n, n), Trusted{});
}

HermitianMatrix HermitianMatrix::zero(int n) {
  check_dim(n);
  return HermitianMatrix(ComplexMatrix::Zero(n, n), Trusted{});
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> d) {
  const int n = static_cast<int>(d.size());
  check_dim(n);
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return HermitianMatrix(m);
}

HermitianMatrix HermitianMatrix::diagonal(std::initializer_list<double> d) {
  return diagonal(std::span<const double>(d.begin(), d.size()));
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& other) const {
  check_same_dim(*this, other);
  return HermitianMatrix(m_ + other.m_, Trusted{});
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& other) const {
  check_same_dim(*this, other);
  return HermitianMatrix(m_ - other.m_, Trusted{});
}

HermitianMatrix HermitianMatrix::scaled(double t) const { return HermitianMatrix(m_ * t, Trusted{}); }

HermitianMatrix HermitianMatrix::congruence(const ComplexMatrix& m) const {
  if (m.rows() != dim() || m.cols() != dim()) {
    throw Error(Errc::DimensionMismatch, "congruence matrix has wrong shape");
  }
  ComplexMatrix out = m.adjoint() * m_ * m;
  return HermitianMatrix((out + out.adjoint()) * 0.5, Trusted{});
}

double binomial(int n, int k) noexcept {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

EigenValues relative_eigenvalues(const HermitianMatrix& a, const HermitianMatrix& g) {
  check_same_dim(a, g);
  const auto llt = metric_factor(g);
  return hermitian_eigenvalues(reduce(a, llt));
}

SigmaValues sigma(std::span<const double> lambda) {
  const auto n = lambda.size();
  if (n < 1 || n > static_cast<std::size_t>(kMaxDim)) {
    throw Error(Errc::DimensionMismatch, "eigenvalue vector of length " + std::to_string(n));
  }
  std::vector<double> e(n + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j >= 1; --j) e[j] += lambda[i] * e[j - 1];
  }
  return SigmaValues(std::move(e));
}

double hessian_density(const HermitianMatrix& a, const HermitianMatrix& g, int k) {
  check_same_dim(a, g);
  check_degree(a.dim(), k);
  const auto lambda = relative_eigenvalues(a, g);
  return sigma(lambda)[k] / binomial(a.dim(), k);
}

double mixed_hessian_density(std::span<const HermitianMatrix> forms, const HermitianMatrix& g) {
  const int k = static_cast<int>(forms.size());
  const int n = g.dim();
  check_degree(n, k);
  for (const auto& f : forms) check_same_dim(f, g);
  const auto llt = metric_factor(g);

  std::vector<ComplexMatrix> reduced;
  reduced.reserve(forms.size());
  for (const auto& f : forms) reduced.push_back(reduce(f, llt));

  // sigma_k is homogeneous of degree k, so its polarization is
  // (1/k!) sum_{S nonempty} (-1)^{k-|S|} sigma_k(sum_{i in S} A_i).
  double acc = 0.0;
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    int size = 0;
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) {
        sum += reduced[static_cast<std::size_t>(i)];
        ++size;
      }
    }
    const double s = sigma(hermitian_eigenvalues(sum))[k];
    acc += ((k - size) % 2 == 0 ? s : -s);
  }
  double factorial = 1.0;
  for (int i = 2; i <= k; ++i) factorial *= i;
  return acc / factorial / binomial(n, k);
}

ConeCertificate in_gamma_k(const HermitianMatrix& a, const HermitianMatrix& g, int k) {
  check_same_dim(a, g);
  check_degree(a.dim(), k);
  const auto s = sigma(relative_eigenvalues(a, g));
  ConeCertificate cert;
  cert.margins.reserve(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) cert.margins.push_back(s[j] / binomial(a.dim(), j));
  cert.worst_margin = *std::min_element(cert.margins.begin(), cert.margins.end());
  cert.member = cert.worst_margin > 0.0;
  return cert;
}

double garding_gap(std::span<const HermitianMatrix> forms, const HermitianMatrix& g) {
  const int k = static_cast<int>(forms.size());
  check_degree(g.dim(), k);
  double geometric = 1.0;
  for (const auto& f : forms) {
    const auto cert = in_gamma_k(f, g, k);
    if (!cert.member) {
      throw Error(Errc::ConeViolation,
                  "form outside Gamma_k (worst margin " + std::to_string(cert.worst_margin) + ")");
    }
    geometric *= std::pow(cert.margins.back(), 1.0 / k);
  }
  return mixed_hessian_density(forms, g) - geometric;
}

}  // namespace khess
