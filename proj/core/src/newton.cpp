#include "khess/newton.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "khess/detail/stencil.hpp"
#include "khess/error.hpp"
#include "khess/krylov.hpp"
#include "khess/parallel.hpp"
#include "khess/point_kernel.hpp"

namespace khess {

namespace {

double log_add_exp(double a, double b) noexcept {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

struct State {
  std::vector<double> form;  // packed omega + dd^c phi
  std::vector<double> h;     // H_k density
  std::vector<double> rhs;
  std::vector<double> log_rhs;
  std::vector<double> margin;
  std::vector<double> r;  // regularized log residual
  double sup = 0.0;       // sup |H - rhs|
  double norm2 = 0.0;     // |r|_2 over points (plus constraint row)
  double margin_min = 0.0;
  bool finite = true;
};

class Problem {
 public:
  Problem(const FormField& omega, int k, const NewtonTarget& target, const NewtonOptions& options)
      : omega_(omega),
        grid_(omega.grid()),
        k_(k),
        n_(omega.n()),
        target_(target),
        options_(options),
        terms_(detail::ddc_terms(grid_)),
        norm_(binomial(omega.n(), k)),
        inv_h2_(1.0 / (grid_.spacing() * grid_.spacing())),
        log_tau_(std::log(options.tau)) {}

  std::size_t size() const noexcept { return grid_.size(); }
  const TorusGrid& grid() const noexcept { return grid_; }

  void evaluate(const GridFunction& phi, double theta, double mean_target, State& st) const {
    const FormField form = omega_ + ddc(phi);
    const std::size_t m = size();
    const auto stride = static_cast<std::size_t>(n_ * n_);
    st.form.assign(form.data().begin(), form.data().end());
    st.h.resize(m);
    st.rhs.resize(m);
    st.log_rhs.resize(m);
    st.margin.resize(m);
    st.r.resize(m);
    const double s = target_.s;
    const bool has_ref = !target_.reference.empty();
    parallel_blocks(m, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto sig = kernel::sigma_packed(st.form.data() + i * stride, n_, k_);
        const double h = sig[static_cast<std::size_t>(k_)] / norm_;
        const double u = has_ref ? target_.reference[i] : 0.0;
        const double lr = target_.log_g[i] + s * (phi[i] - u) + theta;
        st.h[i] = h;
        st.log_rhs[i] = lr;
        st.rhs[i] = std::exp(lr);
        st.margin[i] = kernel::worst_margin(sig, n_, k_);
        const double lh = h > -options_.tau ? std::log(h + options_.tau)
                                            : -std::numeric_limits<double>::infinity();
        st.r[i] = lh - log_add_exp(lr, log_tau_);
      }
    });
    st.sup = 0.0;
    st.norm2 = 0.0;
    st.margin_min = std::numeric_limits<double>::infinity();
    st.finite = true;
    for (std::size_t i = 0; i < m; ++i) {
      const double diff = std::abs(st.h[i] - st.rhs[i]);
      if (!std::isfinite(diff) || !std::isfinite(st.r[i])) st.finite = false;
      st.sup = std::max(st.sup, diff);
      st.norm2 += st.r[i] * st.r[i];
      st.margin_min = std::min(st.margin_min, st.margin[i]);
    }
    if (target_.free_constant) {
      const double c = grid_mean(phi.values()) - mean_target;
      st.norm2 += c * c;
    }
    st.norm2 = std::sqrt(st.norm2);
  }

  /// Builds per-point stencil coefficients of the Jacobian at `st`.
  void linearize(const State& st) {
    const std::size_t m = size();
    const std::size_t t_count = terms_.size();
    const auto stride = static_cast<std::size_t>(n_ * n_);
    coef_.assign(m * t_count, 0.0);
    shift_.assign(m, 0.0);
    border_.assign(m, 0.0);
    diag_.assign(m, 0.0);
    std::atomic<bool> elliptic{true};
    const double s = target_.s;
    parallel_blocks(m, [&](std::size_t begin, std::size_t end) {
      std::array<double, kMaxDim * kMaxDim> w{};
      bool ok = true;
      for (std::size_t i = begin; i < end; ++i) {
        const double* p = st.form.data() + i * stride;
        const auto sig = kernel::sigma_packed(p, n_, k_);
        kernel::sigma_gradient_packed(p, n_, k_, sig, w.data());
        for (int j = 0; j < n_; ++j) {
          if (!(w[static_cast<std::size_t>(j)] > -options_.margin_floor)) ok = false;
        }
        const double a = 1.0 / (norm_ * (st.h[i] + options_.tau));
        const double frac = st.rhs[i] / (st.rhs[i] + options_.tau);
        shift_[i] = s * frac;
        border_[i] = frac;
        double diag = -shift_[i];
        for (std::size_t t = 0; t < t_count; ++t) {
          const auto& term = terms_[t];
          const double mult = term.slot < n_ ? 1.0 : 2.0;
          const double c = a * mult * term.weight * w[static_cast<std::size_t>(term.slot)];
          coef_[i * t_count + t] = c;
          if (term.a == term.b) diag += -2.0 * inv_h2_ * c;
        }
        diag_[i] = diag;
      }
      if (!ok) elliptic = false;
    });
    if (!elliptic) {
      throw Error(Errc::ConeExit, "linearized operator lost ellipticity (sigma gradient not positive)");
    }
  }

  /// y = J x; x and y have size() + 1 entries when the constant is free.
  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t m = size();
    const std::size_t t_count = terms_.size();
    const double xt = target_.free_constant ? x[m] : 0.0;
    parallel_blocks(m, [&](std::size_t begin, std::size_t end) {
      detail::walk(grid_, begin, end, [&](std::size_t i, const detail::Neighbors& nb) {
        double acc = 0.0;
        const double* c = coef_.data() + i * t_count;
        for (std::size_t t = 0; t < t_count; ++t) {
          acc += c[t] * detail::second_difference(x.data(), i, nb, terms_[t].a, terms_[t].b, inv_h2_);
        }
        y[i] = acc - shift_[i] * x[i] - border_[i] * xt;
      });
    });
    if (target_.free_constant) y[m] = grid_mean(x.subspan(0, m));
  }

  void precondition(std::span<const double> x, std::span<double> y) const {
    const std::size_t m = size();
    for (std::size_t i = 0; i < m; ++i) y[i] = diag_[i] != 0.0 ? x[i] / diag_[i] : x[i];
    if (target_.free_constant) y[m] = x[m];
  }

 private:
  const FormField& omega_;
  const TorusGrid& grid_;
  int k_;
  int n_;
  const NewtonTarget& target_;
  const NewtonOptions& options_;
  std::vector<detail::StencilTerm> terms_;
  double norm_;
  double inv_h2_;
  double log_tau_;
  std::vector<double> coef_;
  std::vector<double> shift_;
  std::vector<double> border_;
  std::vector<double> diag_;
};

}  // namespace

NewtonOutcome newton_solve(const FormField& omega, int k, const NewtonTarget& target,
                           GridFunction initial, double theta, const NewtonOptions& options) {
  check_same_grid(omega.grid(), initial.grid());
  const int n = omega.n();
  if (k < 1 || k > n) throw Error(Errc::DimensionMismatch, "degree k outside [1, n]");
  const std::size_t m = initial.size();
  if (target.log_g.size() != m || (!target.reference.empty() && target.reference.size() != m)) {
    throw Error(Errc::DimensionMismatch, "target fields do not match the grid");
  }

  Problem prob(omega, k, target, options);
  const double mean_target = grid_mean(initial.values());
  NewtonOutcome out{std::move(initial), theta, 0.0, 0, 0, 0.0, {}};

  State cur;
  prob.evaluate(out.phi, out.theta, mean_target, cur);
  if (!(cur.margin_min > -options.margin_floor)) {
    throw Error(Errc::ConeExit, "initial guess is outside the cone (worst margin " +
                                    std::to_string(cur.margin_min) + ")");
  }
  if (!cur.finite) throw Error(Errc::SolverDiverged, "non-finite residual at the initial guess");

  const std::size_t dim = m + (target.free_constant ? 1 : 0);
  std::vector<double> rhs(dim);
  std::vector<double> step(dim);
  State trial;

  for (;;) {
    out.trace.push_back(cur.sup);
    out.residual_sup = cur.sup;
    out.cone_margin_min = cur.margin_min;
    const double mean_gap =
        target.free_constant ? std::abs(grid_mean(out.phi.values()) - mean_target) : 0.0;
    if (cur.sup <= options.tol && mean_gap <= options.tol) return out;
    if (out.iterations >= options.max_iter) {
      throw Error(Errc::MaxIterExceeded, "Newton did not reach tol " + std::to_string(options.tol) +
                                             " in " + std::to_string(options.max_iter) +
                                             " iterations (residual " + std::to_string(cur.sup) + ")");
    }
    ++out.iterations;

    prob.linearize(cur);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = -cur.r[i];
    if (target.free_constant) rhs[m] = -(grid_mean(out.phi.values()) - mean_target);
    std::fill(step.begin(), step.end(), 0.0);
    GmresOptions gopt;
    gopt.rel_tol = std::min(options.forcing, std::max(cur.sup, 1e-12));
    gopt.restart = options.restart;
    gopt.max_iter = options.max_linear;
    const auto lin = gmres([&](auto x, auto y) { prob.apply(x, y); },
                           [&](auto x, auto y) { prob.precondition(x, y); }, rhs, step, gopt);
    out.linear_iterations += lin.iterations;

    // cone-preserving backtracking; the step must reduce the l2 norm of the
    // log residual or the sup of |H - rhs|
    double alpha = 1.0;
    bool accepted = false;
    bool any_inside = false;
    GridFunction candidate(out.phi);
    for (int halving = 0; halving < 40; ++halving, alpha *= 0.5) {
      for (std::size_t i = 0; i < m; ++i) candidate[i] = out.phi[i] + alpha * step[i];
      const double th = out.theta + (target.free_constant ? alpha * step[m] : 0.0);
      prob.evaluate(candidate, th, mean_target, trial);
      bool inside = trial.finite;
      for (std::size_t i = 0; i < m && inside; ++i) {
        const double need = cur.margin[i] > options.margin_floor ? options.margin_keep * cur.margin[i]
                                                                   : -options.margin_floor;
        if (!(trial.margin[i] >= need)) inside = false;
      }
      if (!inside) continue;
      any_inside = true;
      const double shrink = 1.0 - 1e-4 * alpha;
      if (trial.norm2 <= shrink * cur.norm2 || trial.sup <= shrink * cur.sup || trial.sup <= options.tol) {
        out.phi = candidate;
        out.theta = th;
        std::swap(cur, trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!any_inside) throw Error(Errc::ConeExit, "line search could not keep the iterate in the cone");
      throw Error(Errc::SolverDiverged, "line search stalled at residual " + std::to_string(cur.sup));
    }
  }
}

std::vector<double> density_derivative(const FormField& omega, const GridFunction& phi, int k,
                                       const GridFunction& direction) {
  check_same_grid(omega.grid(), phi.grid());
  check_same_grid(omega.grid(), direction.grid());
  const int n = omega.n();
  if (k < 1 || k > n) throw Error(Errc::DimensionMismatch, "degree k outside [1, n]");
  const FormField form = omega + ddc(phi);
  const FormField dform = ddc(direction);
  const double norm = binomial(n, k);
  std::vector<double> out(form.size());
  std::array<double, kMaxDim * kMaxDim> w{};
  for (std::size_t i = 0; i < form.size(); ++i) {
    const auto sig = kernel::sigma_packed(form.packed(i), n, k);
    kernel::sigma_gradient_packed(form.packed(i), n, k, sig, w.data());
    out[i] = kernel::trace_product_packed(w.data(), dform.packed(i), n) / norm;
  }
  return out;
}

}  // namespace khess
