#include "khess/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "khess/error.hpp"

namespace khess {

namespace {

constexpr double kE = 2.718281828459045;
constexpr double kInfLog = std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) noexcept {
  if (a == -kInfLog) return b;
  if (b == -kInfLog) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// log(e + e^L), exact for huge L
double ell(double L) noexcept { return L > 1.0 ? L + std::log1p(std::exp(1.0 - L)) : std::log(kE + std::exp(L)); }

constexpr int kGaussPoints = 15;
using Gauss = boost::math::quadrature::gauss<double, kGaussPoints>;

/// Gauss nodes and weights on [-1, 1].
const std::array<std::pair<double, double>, kGaussPoints>& gauss_rule() {
  static const auto rule = [] {
    std::array<std::pair<double, double>, kGaussPoints> r{};
    const auto& x = Gauss::abscissa();
    const auto& w = Gauss::weights();
    std::size_t q = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r[q++] = {x[i], w[i]};
      if (x[i] != 0.0) r[q++] = {-x[i], w[i]};
    }
    return r;
  }();
  return rule;
}

using LogIntegrand = std::function<double(double)>;

/// log of the integral of exp(li(L)) over [lo, hi] by one Gauss panel.
double log_panel(const LogIntegrand& li, double lo, double hi) {
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double acc = -kInfLog;
  for (const auto& [x, w] : gauss_rule()) acc = log_add_exp(acc, std::log(w * half) + li(mid + half * x));
  return acc;
}

/// Same in w = log L on [wlo, whi], dL = L dw.
double log_panel_w(const LogIntegrand& li, double wlo, double whi) {
  return log_panel([&](double w) { return li(std::exp(w)) + w; }, wlo, whi);
}

/// log of int_0^{L_end} exp(li); calls checkpoint(L, log partial) at every
/// panel end beyond L = 1.
double log_integral(const LogIntegrand& li, double L_end,
                    const std::function<void(double, double)>& checkpoint = {}) {
  double acc = -kInfLog;
  const double first = std::min(L_end, 1.0);
  const int head = 8;
  for (int i = 0; i < head; ++i) {
    acc = log_add_exp(acc, log_panel(li, first * i / head, first * (i + 1) / head));
  }
  if (L_end <= 1.0) return acc;
  const double w_end = std::log(L_end);
  const int panels = std::max(1, static_cast<int>(std::ceil(w_end / 0.5)));
  for (int i = 0; i < panels; ++i) {
    const double wlo = w_end * i / panels;
    const double whi = w_end * (i + 1) / panels;
    acc = log_add_exp(acc, log_panel_w(li, wlo, whi));
    if (checkpoint) checkpoint(std::exp(whi), acc);
  }
  return acc;
}

Finiteness decide(const LogIntegrand& li) {
  constexpr double L_far = 1e300;
  constexpr double L_near = 1e250;
  double prev_L = 0.0;
  double prev_log = -kInfLog;
  double last_L = 0.0;
  double last_log = -kInfLog;
  const double total = log_integral(li, L_far, [&](double L, double lg) {
    prev_L = last_L;
    prev_log = last_log;
    last_L = L;
    last_log = lg;
  });
  Finiteness out;
  out.tail_exponent = (li(L_far) - li(L_near)) / (std::log(L_far) - std::log(L_near));
  out.growth = (prev_L > 0.0 && std::isfinite(prev_log)) ? (last_log - prev_log) / (std::log(last_L) - std::log(prev_L))
                                                         : 0.0;
  out.value = std::exp(total);
  const bool heavy_tail = !(out.tail_exponent < -1.0 - 1e-4);
  const bool runaway = total > std::log(1e6) && out.growth > 1e-6;
  out.finite = !heavy_tail && !runaway;
  return out;
}

void check_family(const RadialDensityFamily& f, int n, int k) {
  if (n < 1 || k < 1 || k > n) throw Error(Errc::DimensionMismatch, "need 1 <= k <= n");
  if (f.a < 0.0) throw Error(Errc::InvalidArgument, "power a must be >= 0");
  if (f.a > n || (f.a == n && f.b <= 1.0)) {
    throw Error(Errc::NonIntegrableSource, "s^{n-1} f(s) is not integrable at 0");
  }
}

/// log of int_L^inf e^{-(n-a) L'} ell(L')^{-b} dL' = int_0^rho s^{n-1} f ds,
/// minus the linear part -(n-a) L, which callers fold into their own slope.
class FirstIntegral {
 public:
  FirstIntegral(const RadialDensityFamily& f, int n) : f_(f), lambda_(n - f.a) {}

  double log_at(double L) const {
    const double base = ell(L);
    auto body = [&](double x) {
      return std::exp(-lambda_ * x) * std::pow(ell(L + x) / base, -f_.b);
    };
    const double k = integrator_.integrate(body, 1e-13, nullptr, nullptr, nullptr);
    return -f_.b * std::log(base) + std::log(k);
  }

 private:
  const RadialDensityFamily& f_;
  double lambda_;
  mutable boost::math::quadrature::exp_sinh<double> integrator_;
};

/// Finite-difference weights for derivatives 0..2 at z (Fornberg).
void fornberg(double z, const double* x, int np, std::array<std::array<double, 3>, 5>& c) {
  for (auto& row : c) row.fill(0.0);
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < np; ++i) {
    const int mn = std::min(i, 2);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int q = mn; q >= 1; --q) c[i][q] = c1 * (q * c[i - 1][q - 1] - c5 * c[i - 1][q]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int q = mn; q >= 1; --q) c[j][q] = (c4 * c[j][q] - q * c[j][q - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
}

}  // namespace

double RadialDensityFamily::value(double rho) const {
  return std::pow(rho, -a) * std::pow(std::log(kE + 1.0 / rho), -b);
}

double RadialDensityFamily::log_value_at(double L) const { return a * L - b * std::log(ell(L)); }

std::vector<double> radial_hessian_density(const RadialProfile& profile, int k) {
  const auto& rho = profile.rho;
  const std::size_t m = rho.size();
  if (profile.chi.size() != m) throw Error(Errc::DimensionMismatch, "profile rho and chi differ in length");
  if (m < 5) throw Error(Errc::NonMonotoneGrid, "profile needs at least 5 points");
  if (k < 1 || k > profile.n) throw Error(Errc::DimensionMismatch, "degree k outside [1, n]");
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(rho[i] > 0.0) || (i > 0 && !(rho[i] > rho[i - 1]))) {
      throw Error(Errc::NonMonotoneGrid, "rho grid must be positive and strictly increasing");
    }
    t[i] = std::log(rho[i]);
  }
  const double n = profile.n;
  std::vector<double> out(m);
  std::array<std::array<double, 3>, 5> c{};
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t start = std::min(i >= 2 ? i - 2 : 0, m - 5);
    fornberg(t[i], t.data() + start, 5, c);
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t q = 0; q < 5; ++q) {
      d1 += c[q][1] * profile.chi[start + q];
      d2 += c[q][2] * profile.chi[start + q];
    }
    // chi' = chi_t / rho, rho chi'' = (chi_tt - chi_t) / rho
    const double kn = k / n;
    out[i] = std::pow(2.0, k) * std::pow(d1, k - 1) * std::pow(rho[i], -k) * ((1.0 - kn) * d1 + kn * d2);
  }
  return out;
}

RadialSolution radial_solve(const RadialDensityFamily& f, int n, int k, const RadialSolveOptions& options) {
  check_family(f, n, k);
  if (options.points < 5) throw Error(Errc::InvalidArgument, "need at least 5 profile points");
  if (!(options.rho_min > 0.0 && options.rho_min < 1.0)) {
    throw Error(Errc::InvalidArgument, "rho_min must lie in (0, 1)");
  }
  const FirstIntegral first(f, n);
  const double log_scale = std::log(n) - k * std::log(2.0);
  // (n - k) L from rho^{k-n} and -(n - a) L from the first integral
  const double slope = f.a - k;
  // log(chi'(rho) rho) at rho = e^{-L}
  const LogIntegrand g = [&](double L) { return (log_scale + slope * L + first.log_at(L)) / k; };

  RadialSolution sol;
  sol.profile.n = n;
  sol.profile.k = k;
  const int m = options.points;
  const double L_max = -std::log(options.rho_min);
  std::vector<double> Ls(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) Ls[static_cast<std::size_t>(i)] = L_max * (1.0 - static_cast<double>(i) / (m - 1));
  sol.profile.rho.resize(Ls.size());
  sol.profile.chi.resize(Ls.size());
  // chi(rho_i) = -int_0^{L_i} g, accumulated from rho = 1 inwards
  double acc = 0.0;
  sol.profile.rho.back() = 1.0;
  sol.profile.chi.back() = 0.0;
  for (int i = m - 2; i >= 0; --i) {
    const auto iu = static_cast<std::size_t>(i);
    acc += std::exp(log_panel(g, Ls[iu + 1], Ls[iu]));
    sol.profile.rho[iu] = std::exp(-Ls[iu]);
    sol.profile.chi[iu] = -acc;
  }
  sol.profile.rho.front() = options.rho_min;
  for (double r : options.rho_min_scan) {
    sol.osc_trace.emplace_back(r, std::exp(log_integral(g, -std::log(r))));
  }
  sol.osc_limit = decide(g);
  return sol;
}

IntegrabilityReport integrability_weight(const RadialDensityFamily& f, int n, int k,
                                         const std::vector<double>& exponents) {
  if (n < 1 || k < 1 || k > n) throw Error(Errc::DimensionMismatch, "need 1 <= k <= n");
  if (!(f.delta > 0.0)) throw Error(Errc::InvalidArgument, "delta must be > 0");
  IntegrabilityReport rep;
  const double log_n = std::log(n);
  // measure n s^{n-1} ds = n e^{-n L} dL
  for (double p : exponents) {
    if (!(p >= 1.0)) throw Error(Errc::InvalidExponent, "exponent p must be >= 1");
    const double lin = p * f.a - n;
    const LogIntegrand li = [&](double L) { return lin * L - p * f.b * std::log(ell(L)) + log_n; };
    auto d = decide(li);
    if (d.finite) d.value = std::pow(d.value, 1.0 / p);
    rep.lp.emplace_back(p, d);
  }
  const double nk = static_cast<double>(n) / k;
  const double lin = n * (f.a / k - 1.0);
  const LogIntegrand weighted = [&](double L) {
    const double log_f = f.log_value_at(L);
    const double lg1 = log_add_exp(1.0, log_f);  // log(e + f)
    const double lg2 = std::log(kE + lg1);
    return lin * L - nk * f.b * std::log(ell(L)) + n * std::log(lg1) + (n + f.delta) * std::log(lg2) + log_n;
  };
  rep.weighted = decide(weighted);
  return rep;
}

}  // namespace khess
