#pragma once

// Pointwise algebra of real (1,1)-forms: a form i sum A_jk dz_j ^ dz̄_k is
// stored as its Hermitian coefficient matrix A. Everything is measured
// relative to a reference form G (the metric), i.e. through the roots of
// det(A - lambda G) = 0.

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace khess {

inline constexpr int kMaxDim = 4;

using Complex = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using EigenValues = std::vector<double>;

/// Relative tolerance on A - A* accepted at construction.
inline constexpr double kHermitianTolerance = 1e-12;
/// Smallest admissible eigenvalue of a metric.
inline constexpr double kMetricFloor = 1e-10;

class HermitianMatrix {
 public:
  /// Throws NonHermitianInput if the entries are not Hermitian to within
  /// kHermitianTolerance (relative), DimensionMismatch unless 2 <= dim <= 4.
  /// The stored matrix is the exact Hermitian part of the input.
  explicit HermitianMatrix(const ComplexMatrix& entries);

  static HermitianMatrix identity(int n);
  static HermitianMatrix zero(int n);
  static HermitianMatrix diagonal(std::span<const double> d);
  static HermitianMatrix diagonal(std::initializer_list<double> d);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& entries() const noexcept { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  HermitianMatrix operator+(const HermitianMatrix& other) const;
  HermitianMatrix operator-(const HermitianMatrix& other) const;
  HermitianMatrix scaled(double t) const;
  /// M* A M for any square M of matching size.
  HermitianMatrix congruence(const ComplexMatrix& m) const;

 private:
  struct Trusted {};
  HermitianMatrix(ComplexMatrix entries, Trusted) : m_(std::move(entries)) {}

  ComplexMatrix m_;
};

/// Elementary symmetric polynomials sigma_0..sigma_n of an eigenvalue vector.
class SigmaValues {
 public:
  explicit SigmaValues(std::vector<double> values) : values_(std::move(values)) {}

  int degree() const noexcept { return static_cast<int>(values_.size()) - 1; }
  double operator[](int j) const { return values_.at(static_cast<std::size_t>(j)); }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

struct ConeCertificate {
  bool member = false;
  /// sigma_j / C(n, j) for j = 1..k
  std::vector<double> margins;
  double worst_margin = 0.0;
};

double binomial(int n, int k) noexcept;

/// Roots of det(A - lambda G) = 0 in ascending order.
EigenValues relative_eigenvalues(const HermitianMatrix& a, const HermitianMatrix& g);

SigmaValues sigma(std::span<const double> lambda);

/// alpha^k ^ G^{n-k} / G^n = sigma_k(lambda(A, G)) / C(n, k).
double hessian_density(const HermitianMatrix& a, const HermitianMatrix& g, int k);

/// alpha_1 ^ ... ^ alpha_k ^ G^{n-k} / G^n by polarization of sigma_k.
double mixed_hessian_density(std::span<const HermitianMatrix> forms, const HermitianMatrix& g);

ConeCertificate in_gamma_k(const HermitianMatrix& a, const HermitianMatrix& g, int k);

/// mixed(A_1..A_k) - prod_i hessian_density(A_i)^{1/k}; non-negative on the
/// cone. Throws ConeViolation when some A_i is not in Gamma_k(G).
double garding_gap(std::span<const HermitianMatrix> forms, const HermitianMatrix& g);

}  // namespace khess
