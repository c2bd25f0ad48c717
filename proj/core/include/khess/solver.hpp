#pragma once

// k-Hessian equations on the torus:
//   exponential mode  H_k(phi) = e^{s phi} g
//   constant mode     H_k(phi) = c f,  sup phi = 0
// and the continuation omega_j = omega_0 + 2^{-j} omega_X for semi-positive
// omega_0.

#include <optional>
#include <vector>

#include "khess/error.hpp"
#include "khess/newton.hpp"
#include "khess/torus.hpp"

namespace khess {

enum class SolveMode { Exponential, Constant };

struct HessianProblem {
  FormField omega;
  int k = 1;
  DensityField density;
  SolveMode mode = SolveMode::Constant;
  /// exponential mode only, s > 0
  double s = 1.0;
  /// Lebesgue exponent used for reporting norms
  double p = 2.0;

  int n() const noexcept { return omega.n(); }
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double density_floor = 1e-8;
  NewtonOptions newton{};
};

struct SolveReport {
  GridFunction phi;
  /// constant mode
  double c = 0.0;
  /// exponential mode
  double s = 0.0;
  double residual_sup = 0.0;
  int newton_iters = 0;
  int linear_iters = 0;
  double cone_margin_min = 0.0;
  double osc = 0.0;
  std::vector<double> trace{};
  /// grid points where the density was raised to the floor
  std::size_t floored_points = 0;
};

SolveReport solve_exponential(const HessianProblem& prob, const SolveOptions& options = {},
                              std::optional<GridFunction> initial = std::nullopt);

/// Returns phi with sup phi = 0 and c > 0. Throws ZeroMass if mean f <= 0.
SolveReport solve_with_constant(const HessianProblem& prob, const SolveOptions& options = {},
                                std::optional<GridFunction> initial = std::nullopt);

struct ContinuationStage {
  int j = 0;
  double c = 0.0;
  double osc = 0.0;
  double residual = 0.0;
  int newton_iters = 0;
};

struct ContinuationResult {
  std::vector<ContinuationStage> schedule;
  std::vector<SolveReport> reports;
  /// p <= n / k: outside the range where oscillation bounds are expected
  bool exponent_warning = false;
};

/// Thrown by continuation_degenerate; carries the stages finished so far.
class StageFailure : public Error {
 public:
  StageFailure(int stage, const std::string& cause, ContinuationResult partial)
      : Error(Errc::StageFailed, "stage j=" + std::to_string(stage) + ": " + cause),
        stage_(stage),
        partial_(std::move(partial)) {}
  int stage() const noexcept { return stage_; }
  const ContinuationResult& partial() const noexcept { return partial_; }

 private:
  int stage_;
  ContinuationResult partial_;
};

/// Solves the constant-mode problem for omega_j = omega_0 + 2^{-j} omega_X,
/// j = 0..j_max, warm-starting each stage. prob.omega is ignored; omega_0
/// must be pointwise positive semi-definite.
ContinuationResult continuation_degenerate(const FormField& omega_0, const HessianProblem& prob,
                                           int j_max, const SolveOptions& options = {});

struct Residual {
  double sup = 0.0;
  double l1 = 0.0;
};

Residual residual(const FormField& omega, const GridFunction& phi, int k, const DensityField& target);

}  // namespace khess
