#pragma once

// Envelopes P_{omega,k}(u): the largest (omega, k)-subharmonic function
// below an obstacle u, by exponential penalization
//   H_k(phi_j) = e^{j (phi_j - u)} f
// for increasing j, and by an independent Gauss-Seidel obstacle sweep.

#include <filesystem>
#include <vector>

#include "khess/torus.hpp"

namespace khess {

struct ObstacleProblem {
  FormField omega;
  /// k = n gives the omega-plurisubharmonic envelope
  int k = 1;
  GridFunction obstacle;
  /// positive, at least the Hessian density of the obstacle
  DensityField majorant;
};

/// Majorant f = max(H_k(u), 0) + 1.
ObstacleProblem make_obstacle_problem(FormField omega, int k, GridFunction obstacle);

struct EnvelopeOptions {
  /// penalization parameters, increasing
  std::vector<int> schedule{2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  /// inner Newton tolerance on sup |H - rhs|
  double tol = 1e-9;
  int max_iter = 200;
  /// contact tolerance; negative means 10 h^2
  double contact_tol = -1.0;
  /// largest j included in the rate check
  int rate_j_max = 512;
  /// stage the rate errors e_j are measured against; the last stage when
  /// it is not in the schedule
  int rate_reference = 1024;
};

struct EnvelopeStage {
  int j = 0;
  /// sup |phi_j - phi_final|
  double sup_error = 0.0;
  /// sup |phi_j - phi_previous|
  double change = 0.0;
  double residual = 0.0;
  double wall_time_s = 0.0;
  /// min (phi_j - u), the penalization lower gap
  double min_gap = 0.0;
  int newton_iters = 0;
};

struct EnvelopeResult {
  GridFunction envelope;
  std::vector<bool> contact_mask{};
  std::vector<EnvelopeStage> trace{};
  /// C in e_j <= C log j / j, calibrated at the first stage
  double rate_fit = 0.0;
  /// largest e_j / (C log j / j) over the checked stages
  double rate_worst_ratio = 0.0;
  bool rate_holds = false;
  std::vector<GridFunction> stages{};
};

/// Throws SolverDiverged (with the stage in the message) or
/// MajorantViolated.
EnvelopeResult envelope_penalized(const ObstacleProblem& prob, const EnvelopeOptions& options = {});

/// Gauss-Seidel sweep: each point is set to the smaller of the obstacle and
/// the largest value keeping its own stencil in the closed cone. Throws
/// NoConvergence after max_sweeps.
GridFunction envelope_sweep_oracle(const ObstacleProblem& prob, int max_sweeps = 200000,
                                   double tol = 1e-13);

struct ContactSet {
  std::vector<bool> mask;
  std::size_t contact_points = 0;
  /// grid average of H_k(envelope) outside the mask
  double off_contact_mass = 0.0;
  double total_mass = 0.0;
};

/// mask = {obstacle - envelope <= tol_c}; tol_c < 0 means 10 h^2.
ContactSet contact_set(const GridFunction& envelope, const ObstacleProblem& prob, double tol_c = -1.0);

struct MaBoundCheck {
  double c_observed = 0.0;
  bool pass = false;
  std::size_t contact_points = 0;
};

/// u = P_omega(phi) (k = n envelope); on the contact set g = H_n(u) is
/// compared with f^{n/k}. pass when max g / f^{n/k} <= 1 + slack.
MaBoundCheck envelope_ma_bound_check(const GridFunction& phi, const DensityField& f,
                                     const FormField& omega, int k, double slack = 0.05);

/// Columns j, sup_error, residual, wall_time_s.
void write_rate_csv(const std::filesystem::path& path, const EnvelopeResult& result);

}  // namespace khess
