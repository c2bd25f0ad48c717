#pragma once

// Damped inexact Newton iteration for
//
//   H_k(phi) = g * exp(s * (phi - u) + theta)
//
// on a torus grid, written in the regularized log form
// log(H + tau) - log(rhs + tau) = 0. With free_constant the scalar theta is
// an unknown too and mean(phi) is held at its initial value.

#include <vector>

#include "khess/torus.hpp"

namespace khess {

struct NewtonTarget {
  /// log g per grid point
  std::vector<double> log_g;
  double s = 0.0;
  /// u per grid point; empty means u = 0
  std::vector<double> reference;
  bool free_constant = false;
};

struct NewtonOptions {
  /// on sup |H - rhs|
  double tol = 1e-8;
  int max_iter = 200;
  double tau = 1e-12;
  /// linear tolerance = min(forcing, current residual) relative
  double forcing = 1e-2;
  int restart = 40;
  int max_linear = 4000;
  /// line search keeps every point's cone margin above this fraction of
  /// its previous value
  double margin_keep = 0.1;
  /// margins below this are roundoff on the cone boundary; such points only
  /// have to stay above -margin_floor
  double margin_floor = 1e-13;
};

struct NewtonOutcome {
  GridFunction phi;
  double theta = 0.0;
  double residual_sup = 0.0;
  int iterations = 0;
  int linear_iterations = 0;
  double cone_margin_min = 0.0;
  /// sup residual before each iteration, and after the last
  std::vector<double> trace;
};

/// Throws ConeExit when the initial guess is outside the cone or the line
/// search cannot stay inside it, MaxIterExceeded, SolverDiverged on a
/// stalled line search or non-finite values.
NewtonOutcome newton_solve(const FormField& omega, int k, const NewtonTarget& target,
                           GridFunction initial, double theta, const NewtonOptions& options);

/// d/dt H_k(omega + dd^c(phi + t v)) at t = 0, pointwise.
std::vector<double> density_derivative(const FormField& omega, const GridFunction& phi, int k,
                                       const GridFunction& direction);

}  // namespace khess
