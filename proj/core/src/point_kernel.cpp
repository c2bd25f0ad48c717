#include "khess/point_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace khess::kernel {

namespace {

using Mat = std::array<std::array<Complex, kMaxDim>, kMaxDim>;

void load(const double* p, int n, Mat& a) noexcept {
  for (int j = 0; j < n; ++j) a[j][j] = Complex(p[j], 0.0);
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const int o = off_diagonal_offset(n, j, l);
      a[j][l] = Complex(p[o], p[o + 1]);
      a[l][j] = Complex(p[o], -p[o + 1]);
    }
  }
}

void store(const Mat& a, int n, double* p) noexcept {
  for (int j = 0; j < n; ++j) p[j] = a[j][j].real();
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const int o = off_diagonal_offset(n, j, l);
      // average with the conjugate mirror to stay exactly Hermitian
      const Complex v = 0.5 * (a[j][l] + std::conj(a[l][j]));
      p[o] = v.real();
      p[o + 1] = v.imag();
    }
  }
}

void multiply(const Mat& x, const Mat& y, int n, Mat& out) noexcept {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (int l = 0; l < n; ++l) acc += x[i][l] * y[l][j];
      out[i][j] = acc;
    }
  }
}

double trace(const Mat& x, int n) noexcept {
  double t = 0.0;
  for (int i = 0; i < n; ++i) t += x[i][i].real();
  return t;
}

}  // namespace

SigmaArray sigma_packed(const double* packed, int n, int k) noexcept {
  SigmaArray s{};
  s[0] = 1.0;
  if (k <= 0) return s;
  Mat a{};
  load(packed, n, a);
  std::array<double, kMaxDim + 1> power_sum{};
  power_sum[1] = 0.0;
  for (int j = 0; j < n; ++j) power_sum[1] += packed[j];
  Mat cur = a;
  Mat next{};
  for (int m = 2; m <= k; ++m) {
    multiply(cur, a, n, next);
    cur = next;
    power_sum[static_cast<std::size_t>(m)] = trace(cur, n);
  }
  // Newton's identities: m e_m = sum_{i=1}^m (-1)^{i-1} e_{m-i} p_i
  for (int m = 1; m <= k; ++m) {
    double acc = 0.0;
    for (int i = 1; i <= m; ++i) {
      const double term = s[static_cast<std::size_t>(m - i)] * power_sum[static_cast<std::size_t>(i)];
      acc += (i % 2 == 1) ? term : -term;
    }
    s[static_cast<std::size_t>(m)] = acc / m;
  }
  return s;
}

void sigma_gradient_packed(const double* packed, int n, int k, const SigmaArray& s,
                           double* w_out) noexcept {
  Mat a{};
  load(packed, n, a);
  Mat w{};
  Mat power{};
  for (int i = 0; i < n; ++i) power[i][i] = 1.0;
  Mat next{};
  for (int m = 0; m < k; ++m) {
    const double coeff = ((m % 2 == 0) ? 1.0 : -1.0) * s[static_cast<std::size_t>(k - 1 - m)];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) w[i][j] += coeff * power[i][j];
    }
    if (m + 1 < k) {
      multiply(power, a, n, next);
      power = next;
    }
  }
  store(w, n, w_out);
}

double trace_product_packed(const double* w, const double* b, int n) noexcept {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += w[j] * b[j];
  double off = 0.0;
  for (int o = n; o < n * n; ++o) off += w[o] * b[o];
  // tr(WB) = sum_j W_jj B_jj + 2 sum_{j<l} Re(W_jl conj(B_jl))
  return acc + 2.0 * off;
}

double worst_margin(const SigmaArray& s, int n, int k) noexcept {
  double worst = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= k; ++j) worst = std::min(worst, s[static_cast<std::size_t>(j)] / binomial(n, j));
  return worst;
}

double cone_entry_shift(const SigmaArray& s, int n, int k) noexcept {
  // q(t) = sigma_k(mu + t 1) = sum_j C(n-j, k-j) sigma_j t^{k-j}; real rooted.
  std::array<double, kMaxDim + 1> c{};  // c[d] multiplies t^d
  double bound = 0.0;
  const double lead = binomial(n, k);
  for (int j = 0; j <= k; ++j) {
    c[static_cast<std::size_t>(k - j)] = binomial(n - j, k - j) * s[static_cast<std::size_t>(j)];
    if (j > 0) bound = std::max(bound, std::abs(c[static_cast<std::size_t>(k - j)]) / lead);
  }
  auto eval = [&](double t, double& dq) {
    double q = 0.0;
    dq = 0.0;
    for (int d = k; d >= 0; --d) {
      dq = dq * t + q;
      q = q * t + c[static_cast<std::size_t>(d)];
    }
    return q;
  };
  // Newton from above the Cauchy bound decreases monotonically onto the
  // largest root of a real-rooted polynomial.
  double t = 1.0 + bound;
  for (int it = 0; it < 2000; ++it) {
    double dq = 0.0;
    const double q = eval(t, dq);
    if (q <= 0.0 || dq <= 0.0) break;
    const double step = q / dq;
    const double next = t - step;
    if (!(next < t)) break;
    t = next;
    if (step <= 1e-16 * std::max(1.0, std::abs(t))) break;
  }
  return t;
}

void pack(const HermitianMatrix& a, double* out) noexcept {
  const int n = a.dim();
  for (int j = 0; j < n; ++j) out[j] = a(j, j).real();
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const int o = off_diagonal_offset(n, j, l);
      out[o] = a(j, l).real();
      out[o + 1] = a(j, l).imag();
    }
  }
}

HermitianMatrix unpack(const double* packed, int n) {
  ComplexMatrix m(n, n);
  for (int j = 0; j < n; ++j) m(j, j) = packed[j];
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const int o = off_diagonal_offset(n, j, l);
      m(j, l) = Complex(packed[o], packed[o + 1]);
      m(l, j) = Complex(packed[o], -packed[o + 1]);
    }
  }
  return HermitianMatrix(m);
}

}  // namespace khess::kernel
