#pragma once

// Restarted GMRES for matrix-free operators.

#include <functional>
#include <span>

namespace khess {

/// y = A x
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct GmresOptions {
  /// stop when the residual drops below rel_tol times its initial value,
  /// or below abs_tol
  double rel_tol = 1e-2;
  double abs_tol = 0.0;
  int restart = 40;
  int max_iter = 2000;
};

struct GmresResult {
  int iterations = 0;
  double initial_norm = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
};

/// Right-preconditioned GMRES: A M^{-1} y = b, x = M^{-1} y, so the
/// residual it monitors is the true one. `precondition` applies M^{-1}.
/// x holds the initial guess on entry.
GmresResult gmres(const LinearOperator& apply, const LinearOperator& precondition,
                  std::span<const double> b, std::span<double> x, const GmresOptions& options);

}  // namespace khess
