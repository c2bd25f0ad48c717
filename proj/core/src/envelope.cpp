#include "khess/envelope.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "khess/detail/stencil.hpp"
#include "khess/error.hpp"
#include "khess/newton.hpp"
#include "khess/point_kernel.hpp"

namespace khess {

namespace {

double default_contact_tol(const TorusGrid& g) { return 10.0 * g.spacing() * g.spacing(); }

double sup_distance(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

void check_problem(const ObstacleProblem& prob) {
  check_same_grid(prob.omega.grid(), prob.obstacle.grid());
  check_same_grid(prob.omega.grid(), prob.majorant.grid());
  if (prob.k < 1 || prob.k > prob.omega.n()) throw Error(Errc::DimensionMismatch, "degree k outside [1, n]");
  for (double f : prob.majorant.values()) {
    if (!(f >= 1e-8)) throw Error(Errc::InvalidArgument, "majorant must be >= 1e-8");
  }
}

}  // namespace

ObstacleProblem make_obstacle_problem(FormField omega, int k, GridFunction obstacle) {
  auto h = hessian_measure(omega, obstacle, k).density;
  for (auto& v : h.values()) v = std::max(v, 0.0) + 1.0;
  return ObstacleProblem{std::move(omega), k, std::move(obstacle), std::move(h)};
}

EnvelopeResult envelope_penalized(const ObstacleProblem& prob, const EnvelopeOptions& options) {
  check_problem(prob);
  if (options.schedule.empty() || !std::is_sorted(options.schedule.begin(), options.schedule.end()) ||
      options.schedule.front() < 1) {
    throw Error(Errc::InvalidArgument, "schedule must be increasing positive integers");
  }
  const auto hu = hessian_measure(prob.omega, prob.obstacle, prob.k).density;
  for (std::size_t i = 0; i < hu.size(); ++i) {
    if (prob.majorant[i] < hu[i] - 1e-8 * std::max(1.0, std::abs(hu[i]))) {
      throw Error(Errc::MajorantViolated, "majorant below the Hessian density of the obstacle at point " +
                                              std::to_string(i));
    }
  }

  NewtonTarget target;
  target.log_g.resize(prob.majorant.size());
  for (std::size_t i = 0; i < target.log_g.size(); ++i) target.log_g[i] = std::log(prob.majorant[i]);
  target.reference.assign(prob.obstacle.values().begin(), prob.obstacle.values().end());
  NewtonOptions nopt;
  nopt.tol = options.tol;
  nopt.max_iter = options.max_iter;

  const double umin = field_norms(prob.obstacle, 1.0).min;
  GridFunction phi(prob.omega.grid(), umin);
  EnvelopeResult result{.envelope = phi};
  for (int j : options.schedule) {
    const auto t0 = std::chrono::steady_clock::now();
    target.s = static_cast<double>(j);
    NewtonOutcome out = [&] {
      try {
        return newton_solve(prob.omega, prob.k, target, phi, 0.0, nopt);
      } catch (const Error& e) {
        throw Error(Errc::SolverDiverged, "penalization stage j=" + std::to_string(j) + ": " + e.what());
      }
    }();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EnvelopeStage st;
    st.j = j;
    st.change = sup_distance(out.phi, phi);
    st.residual = out.residual_sup;
    st.wall_time_s = secs;
    st.newton_iters = out.iterations;
    st.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.phi.size(); ++i) {
      st.min_gap = std::min(st.min_gap, out.phi[i] - prob.obstacle[i]);
    }
    phi = out.phi;
    result.trace.push_back(st);
    result.stages.push_back(phi);
  }
  result.envelope = phi;
  std::size_t ref = result.stages.size() - 1;
  for (std::size_t s = 0; s < result.trace.size(); ++s) {
    if (result.trace[s].j == options.rate_reference) ref = s;
  }
  for (std::size_t s = 0; s < result.stages.size(); ++s) {
    result.trace[s].sup_error = sup_distance(result.stages[s], result.stages[ref]);
  }

  // rate: calibrate C at the first stage, then require e_j <= C log j / j
  const auto& first = result.trace.front();
  const double rate_at = [](int j) { return std::log(static_cast<double>(j)) / j; }(std::max(first.j, 2));
  result.rate_fit = first.sup_error / rate_at;
  result.rate_worst_ratio = 0.0;
  for (const auto& st : result.trace) {
    if (st.j > options.rate_j_max || st.j < 2 || st.j >= result.trace[ref].j) continue;
    const double bound = result.rate_fit * std::log(static_cast<double>(st.j)) / st.j;
    const double ratio = bound > 0.0 ? st.sup_error / bound : (st.sup_error > 0.0 ? INFINITY : 0.0);
    result.rate_worst_ratio = std::max(result.rate_worst_ratio, ratio);
  }
  result.rate_holds = result.rate_worst_ratio <= 1.0 + 1e-9;

  result.contact_mask = contact_set(result.envelope, prob, options.contact_tol).mask;
  return result;
}

GridFunction envelope_sweep_oracle(const ObstacleProblem& prob, int max_sweeps, double tol) {
  check_problem(prob);
  const auto& grid = prob.omega.grid();
  const int n = grid.n();
  const int k = prob.k;
  const auto terms = detail::ddc_terms(grid);
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());

  // raising phi_i by t lowers diagonal entry j by t * q_j
  std::array<double, kMaxDim> q{};
  for (int j = 0; j < n; ++j) {
    const int active = (grid.is_active(2 * j) ? 1 : 0) + (grid.is_active(2 * j + 1) ? 1 : 0);
    q[static_cast<std::size_t>(j)] = active * inv_h2;
  }
  const bool uniform = std::all_of(q.begin(), q.begin() + n, [&](double v) { return v == q[0]; });
  if (q[0] == 0.0 && uniform) {
    // no active axis: dd^c vanishes and the obstacle is its own envelope
    return prob.obstacle;
  }

  const std::size_t stride = static_cast<std::size_t>(n * n);
  std::vector<double> base(stride);
  std::vector<double> shifted(stride);
  auto inside = [&](double t) {
    std::copy(base.begin(), base.end(), shifted.begin());
    for (int j = 0; j < n; ++j) shifted[static_cast<std::size_t>(j)] -= t * q[static_cast<std::size_t>(j)];
    return kernel::worst_margin(kernel::sigma_packed(shifted.data(), n, k), n, k) >= 0.0;
  };

  GridFunction phi = prob.obstacle;
  double* v = phi.values().data();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double largest = 0.0;
    detail::walk(grid, 0, grid.size(), [&](std::size_t i, const detail::Neighbors& nb) {
      const double* w = prob.omega.packed(i);
      std::copy(w, w + stride, base.begin());
      for (const auto& t : terms) base[static_cast<std::size_t>(t.slot)] +=
          t.weight * detail::second_difference(v, i, nb, t.a, t.b, inv_h2);
      double tstar;
      if (uniform) {
        tstar = -kernel::cone_entry_shift(kernel::sigma_packed(base.data(), n, k), n, k) / q[0];
      } else {
        double lo = -1.0;
        int guard = 0;
        while (!inside(lo)) {
          lo *= 2.0;
          if (++guard > 80) throw Error(Errc::NoConvergence, "cone repair found no admissible value");
        }
        double hi = std::max(1.0, -lo);
        guard = 0;
        while (inside(hi)) {
          hi *= 2.0;
          if (++guard > 80) throw Error(Errc::NoConvergence, "cone repair is unbounded");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(lo)); ++it) {
          const double mid = 0.5 * (lo + hi);
          (inside(mid) ? lo : hi) = mid;
        }
        tstar = lo;
      }
      const double next = std::min(prob.obstacle[i], v[i] + tstar);
      largest = std::max(largest, std::abs(next - v[i]));
      v[i] = next;
    });
    if (largest <= tol) return phi;
  }
  throw Error(Errc::NoConvergence, "sweep oracle did not settle in " + std::to_string(max_sweeps) + " sweeps");
}

ContactSet contact_set(const GridFunction& envelope, const ObstacleProblem& prob, double tol_c) {
  check_same_grid(envelope.grid(), prob.obstacle.grid());
  if (tol_c < 0.0) tol_c = default_contact_tol(envelope.grid());
  ContactSet out;
  out.mask.resize(envelope.size());
  const auto h = hessian_measure(prob.omega, envelope, prob.k);
  std::vector<double> off(envelope.size(), 0.0);
  for (std::size_t i = 0; i < envelope.size(); ++i) {
    out.mask[i] = prob.obstacle[i] - envelope[i] <= tol_c;
    if (out.mask[i]) {
      ++out.contact_points;
    } else {
      off[i] = h.density[i];
    }
  }
  out.off_contact_mass = grid_mean(off);
  out.total_mass = h.total_mass;
  return out;
}

MaBoundCheck envelope_ma_bound_check(const GridFunction& phi, const DensityField& f,
                                     const FormField& omega, int k, double slack) {
  check_same_grid(phi.grid(), f.grid());
  const int n = omega.n();
  GridFunction env = [&] {
    try {
      return envelope_sweep_oracle(make_obstacle_problem(omega, n, phi));
    } catch (const Error& e) {
      throw Error(Errc::EnvelopeFailed, e.what());
    }
  }();
  const auto g = hessian_measure(omega, env, n).density;
  const double tol_c = default_contact_tol(phi.grid());
  MaBoundCheck out;
  const double power = static_cast<double>(n) / k;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (phi[i] - env[i] > tol_c) continue;
    ++out.contact_points;
    const double fv = std::max(f[i], 1e-300);
    out.c_observed = std::max(out.c_observed, g[i] / std::pow(fv, power));
  }
  out.pass = out.contact_points > 0 && out.c_observed <= 1.0 + slack;
  return out;
}

void write_rate_csv(const std::filesystem::path& path, const EnvelopeResult& result) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "j,sup_error,residual,wall_time_s\n";
  char line[160];
  for (const auto& st : result.trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", st.j, st.sup_error, st.residual,
                  st.wall_time_s);
    out << line;
  }
}

}  // namespace khess
