#pragma once

// Allocation-free algebra on packed Hermitian n x n matrices, used in the
// grid loops where the metric is the identity (flat torus).
//
// Packed layout, n*n doubles: the n real diagonal entries, then for every
// pair j < l in row-major order the real and imaginary part of A(j, l).

#include <array>

#include "khess/hermitian.hpp"

namespace khess::kernel {

constexpr int packed_size(int n) noexcept { return n * n; }

/// Offset of the (re, im) pair for entry (j, l), j < l.
constexpr int off_diagonal_offset(int n, int j, int l) noexcept {
  // pairs before row j: sum_{r<j} (n-1-r)
  const int before = j * (n - 1) - j * (j - 1) / 2;
  return n + 2 * (before + (l - j - 1));
}

using SigmaArray = std::array<double, kMaxDim + 1>;

/// sigma_0..sigma_k of the eigenvalues of a packed matrix, from the power
/// sums tr(A^m) through Newton's identities. Entries above k are zero.
SigmaArray sigma_packed(const double* packed, int n, int k) noexcept;

/// Gradient of sigma_k with respect to the matrix entries,
/// W = sum_{m<k} (-1)^m sigma_{k-1-m} A^m, packed. For every Hermitian B,
/// d/dt sigma_k(A + tB) = Re tr(W B).
void sigma_gradient_packed(const double* packed, int n, int k, const SigmaArray& s,
                           double* w_out) noexcept;

/// Re tr(W B) for packed Hermitian W and B.
double trace_product_packed(const double* w, const double* b, int n) noexcept;

/// Smallest normalized margin min_{1<=j<=k} sigma_j / C(n, j).
double worst_margin(const SigmaArray& s, int n, int k) noexcept;

/// Largest real t with sigma_k(mu + t * 1) = 0, where mu are the eigenvalues
/// whose sigma values are given. mu + t * 1 lies in the closed Gamma_k cone
/// exactly for t >= that root.
double cone_entry_shift(const SigmaArray& s, int n, int k) noexcept;

void pack(const HermitianMatrix& a, double* out) noexcept;
HermitianMatrix unpack(const double* packed, int n);

}  // namespace khess::kernel
