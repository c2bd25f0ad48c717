#include "khess/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace khess {

namespace {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GmresResult gmres(const LinearOperator& apply, const LinearOperator& precondition,
                  std::span<const double> b, std::span<double> x, const GmresOptions& options) {
  const std::size_t n = b.size();
  const int m = options.restart;
  GmresResult result;

  std::vector<double> work(n);
  std::vector<double> r(n);
  auto residual = [&] {
    apply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return std::sqrt(dot(r, r));
  };

  std::vector<std::vector<double>> v(static_cast<std::size_t>(m) + 1, std::vector<double>(n));
  std::vector<double> h(static_cast<std::size_t>((m + 1) * m));
  std::vector<double> cs(static_cast<std::size_t>(m));
  std::vector<double> sn(static_cast<std::size_t>(m));
  std::vector<double> g(static_cast<std::size_t>(m) + 1);
  auto H = [&](int i, int j) -> double& { return h[static_cast<std::size_t>(i * m + j)]; };

  double beta = residual();
  result.initial_norm = beta;
  result.residual_norm = beta;
  const double target = std::max(options.abs_tol, options.rel_tol * beta);
  if (beta <= target || beta == 0.0) {
    result.converged = true;
    return result;
  }

  while (result.iterations < options.max_iter) {
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int j = 0;
    for (; j < m && result.iterations < options.max_iter; ++j) {
      ++result.iterations;
      auto& w = v[static_cast<std::size_t>(j) + 1];
      precondition(v[static_cast<std::size_t>(j)], work);
      apply(work, w);
      // modified Gram-Schmidt
      for (int i = 0; i <= j; ++i) {
        const double hij = dot(w, v[static_cast<std::size_t>(i)]);
        H(i, j) = hij;
        const auto& vi = v[static_cast<std::size_t>(i)];
        for (std::size_t q = 0; q < n; ++q) w[q] -= hij * vi[q];
      }
      const double hn = std::sqrt(dot(w, w));
      H(j + 1, j) = hn;
      if (hn > 0.0) {
        for (auto& q : w) q /= hn;
      }
      for (int i = 0; i < j; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const double t = cs[iu] * H(i, j) + sn[iu] * H(i + 1, j);
        H(i + 1, j) = -sn[iu] * H(i, j) + cs[iu] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      const auto ju = static_cast<std::size_t>(j);
      cs[ju] = denom == 0.0 ? 1.0 : H(j, j) / denom;
      sn[ju] = denom == 0.0 ? 0.0 : H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[ju + 1] = -sn[ju] * g[ju];
      g[ju] = cs[ju] * g[ju];
      result.residual_norm = std::abs(g[ju + 1]);
      if (result.residual_norm <= target || hn == 0.0) {
        ++j;
        break;
      }
    }
    // back substitution and update
    std::vector<double> y(static_cast<std::size_t>(j));
    for (int i = j - 1; i >= 0; --i) {
      double s = g[static_cast<std::size_t>(i)];
      for (int q = i + 1; q < j; ++q) s -= H(i, q) * y[static_cast<std::size_t>(q)];
      y[static_cast<std::size_t>(i)] = H(i, i) == 0.0 ? 0.0 : s / H(i, i);
    }
    std::fill(r.begin(), r.end(), 0.0);
    for (int i = 0; i < j; ++i) {
      const auto& vi = v[static_cast<std::size_t>(i)];
      const double yi = y[static_cast<std::size_t>(i)];
      for (std::size_t q = 0; q < n; ++q) r[q] += yi * vi[q];
    }
    precondition(r, work);
    for (std::size_t q = 0; q < n; ++q) x[q] += work[q];
    beta = residual();
    result.residual_norm = beta;
    if (beta <= target) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace khess
