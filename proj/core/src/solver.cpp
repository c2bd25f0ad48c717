#include "khess/solver.hpp"

#include <algorithm>
#include <cmath>

namespace khess {

namespace {

void validate(const HessianProblem& prob) {
  if (prob.k < 1 || prob.k > prob.n()) {
    throw Error(Errc::DimensionMismatch, "degree k=" + std::to_string(prob.k) + " outside [1, n]");
  }
  check_same_grid(prob.omega.grid(), prob.density.grid());
}

/// log of the floored density; counts floored points.
std::vector<double> floored_log(const DensityField& f, double floor, std::size_t& floored) {
  std::vector<double> out(f.size());
  floored = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < -1e-9) {
      throw Error(Errc::NonPositiveDensity, "density is negative (" + std::to_string(f[i]) + ")");
    }
    double v = f[i];
    if (v < floor) {
      v = floor;
      ++floored;
    }
    out[i] = std::log(v);
  }
  return out;
}

NewtonOptions newton_options(const SolveOptions& options) {
  NewtonOptions n = options.newton;
  n.tol = options.tol;
  n.max_iter = options.max_iter;
  return n;
}

void fill_report(SolveReport& rep, NewtonOutcome& out) {
  rep.residual_sup = out.residual_sup;
  rep.newton_iters = out.iterations;
  rep.linear_iters = out.linear_iterations;
  rep.cone_margin_min = out.cone_margin_min;
  rep.trace = std::move(out.trace);
  rep.osc = field_norms(rep.phi, 1.0).osc;
}

bool positive_semidefinite(const FormField& omega) {
  const auto g = HermitianMatrix::identity(omega.n());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (relative_eigenvalues(omega.at(i), g).front() < -1e-12) return false;
  }
  return true;
}

}  // namespace

SolveReport solve_exponential(const HessianProblem& prob, const SolveOptions& options,
                              std::optional<GridFunction> initial) {
  validate(prob);
  if (!(prob.s > 0.0)) throw Error(Errc::InvalidArgument, "exponential mode needs s > 0");
  NewtonTarget target;
  std::size_t floored = 0;
  target.log_g = floored_log(prob.density, options.density_floor, floored);
  target.s = prob.s;
  GridFunction start = initial ? std::move(*initial) : GridFunction(prob.omega.grid(), 0.0);
  auto out = newton_solve(prob.omega, prob.k, target, std::move(start), 0.0, newton_options(options));
  SolveReport rep{.phi = out.phi};
  rep.s = prob.s;
  rep.floored_points = floored;
  fill_report(rep, out);
  return rep;
}

SolveReport solve_with_constant(const HessianProblem& prob, const SolveOptions& options,
                                std::optional<GridFunction> initial) {
  validate(prob);
  if (!(grid_mean(prob.density.values()) > 0.0)) {
    throw Error(Errc::ZeroMass, "density has non-positive mean");
  }
  NewtonTarget target;
  std::size_t floored = 0;
  target.log_g = floored_log(prob.density, options.density_floor, floored);
  target.s = 0.0;
  target.free_constant = true;

  GridFunction start = initial ? std::move(*initial) : GridFunction(prob.omega.grid(), 0.0);
  const double mean = grid_mean(start.values());
  for (auto& v : start.values()) v -= mean;
  std::vector<double> g(target.log_g.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::exp(target.log_g[i]);
  const double mass = hessian_measure(prob.omega, start, prob.k).total_mass;
  const double theta = std::log(std::max(mass, 1e-300)) - std::log(grid_mean(g));

  auto out = newton_solve(prob.omega, prob.k, target, std::move(start), theta, newton_options(options));
  SolveReport rep{.phi = out.phi};
  const double top = field_norms(rep.phi, 1.0).max;
  for (auto& v : rep.phi.values()) v -= top;
  rep.c = std::exp(out.theta);
  rep.floored_points = floored;
  fill_report(rep, out);
  return rep;
}

ContinuationResult continuation_degenerate(const FormField& omega_0, const HessianProblem& prob,
                                           int j_max, const SolveOptions& options) {
  check_same_grid(omega_0.grid(), prob.density.grid());
  if (j_max < 0) throw Error(Errc::InvalidArgument, "j_max must be >= 0");
  if (!positive_semidefinite(omega_0)) {
    throw Error(Errc::InvalidArgument, "omega_0 is not positive semi-definite");
  }
  ContinuationResult result;
  result.exponent_warning = prob.p <= static_cast<double>(omega_0.n()) / prob.k;

  std::optional<GridFunction> warm;
  for (int j = 0; j <= j_max; ++j) {
    HessianProblem stage = prob;
    stage.omega = omega_0.plus_identity(std::ldexp(1.0, -j));
    stage.mode = SolveMode::Constant;
    std::optional<GridFunction> start;
    if (warm) {
      // shrink the previous solution until it is admissible for the new form
      for (double t = 1.0; t > 1e-3; t *= 0.5) {
        GridFunction trial(*warm);
        for (auto& v : trial.values()) v *= t;
        if (is_k_subharmonic(stage.omega, trial, stage.k).member) {
          start = std::move(trial);
          break;
        }
      }
    }
    try {
      auto rep = solve_with_constant(stage, options, std::move(start));
      result.schedule.push_back({j, rep.c, rep.osc, rep.residual_sup, rep.newton_iters});
      warm = rep.phi;
      result.reports.push_back(std::move(rep));
    } catch (const Error& e) {
      throw StageFailure(j, e.what(), std::move(result));
    }
  }
  return result;
}

Residual residual(const FormField& omega, const GridFunction& phi, int k, const DensityField& target) {
  check_same_grid(phi.grid(), target.grid());
  const auto h = hessian_measure(omega, phi, k);
  std::vector<double> diff(h.density.size());
  Residual r;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = std::abs(h.density[i] - target[i]);
    r.sup = std::max(r.sup, diff[i]);
  }
  r.l1 = grid_mean(diff);
  return r;
}

}  // namespace khess
