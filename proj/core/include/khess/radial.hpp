#pragma once

// Radial k-Hessian operator on the unit ball of C^n. For u(z) = chi(|z|^2),
// rho = |z|^2, dd^c u has eigenvalues 2 chi' (n - 1 times) and
// 2 (chi' + rho chi''), so
//   H_k(u) = (2^k / n) rho^{1-n} d/drho [rho^n (chi')^k].
//
// Integrals near the origin are taken in L = log(1/rho), with integrands
// carried as logarithms so that L can run to 1e300.

#include <utility>
#include <vector>

namespace khess {

/// f(rho) = rho^{-a} log(e + 1/rho)^{-b}
struct RadialDensityFamily {
  double a = 0.0;
  double b = 0.0;
  /// log-log margin of the weighted integrability functional
  double delta = 0.1;

  double value(double rho) const;
  /// log f at rho = e^{-L}
  double log_value_at(double L) const;
};

struct RadialProfile {
  int n = 2;
  int k = 1;
  /// strictly increasing, positive
  std::vector<double> rho;
  std::vector<double> chi;
};

/// Pointwise H_k on the profile grid from fourth-order differences in
/// log rho. Throws NonMonotoneGrid.
std::vector<double> radial_hessian_density(const RadialProfile& profile, int k);

/// Decision on whether an integral over L in [0, inf) is finite.
struct Finiteness {
  bool finite = false;
  /// the integral if finite, else the partial sum at L = 1e300 (may be inf)
  double value = 0.0;
  /// local power of the integrand in L near L = 1e300
  double tail_exponent = 0.0;
  /// d log(partial sum) / d log L at the end of the range
  double growth = 0.0;
};

struct RadialSolveOptions {
  int points = 4096;
  double rho_min = 1e-10;
  std::vector<double> rho_min_scan{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
};

struct RadialSolution {
  RadialProfile profile;
  /// (rho_min, u(1) - u(rho_min))
  std::vector<std::pair<double, double>> osc_trace;
  /// oscillation as rho_min -> 0
  Finiteness osc_limit;
};

/// Solves H_k(u) = f with u(1) = 0 through the first integral
/// rho^n (chi')^k = (n / 2^k) int_0^rho s^{n-1} f(s) ds.
/// Throws NonIntegrableSource when s^{n-1} f is not integrable at 0.
RadialSolution radial_solve(const RadialDensityFamily& f, int n, int k,
                            const RadialSolveOptions& options = {});

struct IntegrabilityReport {
  /// (p, normalized L^p norm or its divergence decision)
  std::vector<std::pair<double, Finiteness>> lp;
  /// int f^{n/k} |log f|^n (log|log f|)^{n+delta} with regularized logs
  Finiteness weighted;
};

IntegrabilityReport integrability_weight(const RadialDensityFamily& f, int n, int k,
                                         const std::vector<double>& exponents);

}  // namespace khess
