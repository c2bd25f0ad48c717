#include <doctest.h>

#include <cmath>

#include "khess/error.hpp"
#include "khess/hermitian.hpp"
#include "khess/radial.hpp"

using namespace khess;

namespace {

RadialProfile profile(int n, double lo, double hi, int m, double (*chi)(double)) {
  RadialProfile p;
  p.n = n;
  for (int i = 0; i < m; ++i) {
    const double t = std::log(lo) + (std::log(hi) - std::log(lo)) * i / (m - 1);
    p.rho.push_back(std::exp(t));
    p.chi.push_back(chi(std::exp(t)));
  }
  return p;
}

}  // namespace

TEST_CASE("radial density closed forms") {
  // fourth-order stencils in log rho, h = 8.6e-3; one-sided at the ends
  auto p = profile(3, 1e-3, 1.0, 801, [](double r) { return r / 2; });
  for (int k = 1; k <= 3; ++k) {
    const auto d = radial_hessian_density(p, k);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const bool end = i < 2 || i + 2 >= d.size();
      CHECK(d[i] == doctest::Approx(1.0).epsilon(end ? 1e-6 : 1e-9));
    }
  }
  p = profile(3, 1e-3, 1.0, 801, [](double r) { return 0.5 * std::log(r); });
  // relative to lambda_1^3 = rho^-3
  const auto dl = radial_hessian_density(p, 3);
  for (std::size_t i = 0; i < dl.size(); ++i) CHECK(std::abs(dl[i]) * std::pow(p.rho[i], 3) <= 1e-9);

  p = profile(3, 0.1, 1.0, 801, [](double r) { return r * r; });
  const auto d = radial_hessian_density(p, 2);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d[i] == doctest::Approx(80.0 * p.rho[i] * p.rho[i] / 3.0).epsilon(1e-6));
  }
}

TEST_CASE("radial density agrees with the pointwise algebra") {
  // eigenvalues of dd^c chi(|z|^2): 2 chi' (n - 1 times) and 2 (chi' + rho chi'').
  // chi is quadratic in t = log rho, where the five-point stencil is exact.
  RadialProfile p;
  p.n = 3;
  // coarse on purpose: second-derivative weights scale like 1/h^2
  for (int i = 0; i < 41; ++i) {
    const double t = std::log(0.25) * (1.0 - i / 40.0);
    p.rho.push_back(std::exp(t));
    p.chi.push_back(0.3 * t + 0.05 * t * t);
  }
  for (int k = 1; k <= 3; ++k) {
    const auto d = radial_hessian_density(p, k);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double r = p.rho[i];
      const double t = std::log(r);
      const double c1 = (0.3 + 0.1 * t) / r;  // chi'
      const double c2 = 0.1 / r;              // chi' + rho chi''
      const auto a = HermitianMatrix::diagonal({2 * c1, 2 * c1, 2 * c2});
      const double ref = hessian_density(a, HermitianMatrix::identity(3), k);
      CHECK(d[i] == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("radial solve of the constant density") {
  const RadialDensityFamily f{0.0, 0.0, 0.1};
  const auto sol = radial_solve(f, 3, 2);
  const auto& pr = sol.profile;
  for (std::size_t i = 0; i < pr.rho.size(); ++i) CHECK(pr.chi[i] == doctest::Approx((pr.rho[i] - 1) / 2).epsilon(1e-8).scale(1.0));
  CHECK(sol.osc_limit.finite);
  CHECK(sol.osc_limit.value == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("radial first integral reproduces the density") {
  for (double b : {0.5, 2.0, 3.0, 4.0}) {
    const RadialDensityFamily f{2.0, b, 0.1};
    const auto sol = radial_solve(f, 3, 2);
    const auto d = radial_hessian_density(sol.profile, 2);
    for (std::size_t i = 2; i + 2 < d.size(); ++i) {
      const double fv = f.value(sol.profile.rho[i]);
      CHECK(std::abs(d[i] - fv) / fv <= 1e-6);
    }
  }
}

TEST_CASE("oscillation thresholds") {
  const int n = 3, k = 2;
  // b = 2k: chi' ~ rho^-1 (log 1/rho)^-2, integrable
  auto sol = radial_solve(RadialDensityFamily{double(k), 2.0 * k, 0.1}, n, k);
  CHECK(sol.osc_limit.finite);
  for (std::size_t i = 1; i < sol.osc_trace.size(); ++i) CHECK(sol.osc_trace[i].second >= sol.osc_trace[i - 1].second);
  // b = k/2: osc grows like (log 1/rho_min)^{1 - b/k}
  sol = radial_solve(RadialDensityFamily{double(k), k / 2.0, 0.1}, n, k);
  CHECK_FALSE(sol.osc_limit.finite);
  CHECK(sol.osc_limit.growth == doctest::Approx(0.5).epsilon(0.02));
  for (double b : {1.5, 1.9, 2.1, 2.5}) {
    CHECK(radial_solve(RadialDensityFamily{double(k), b, 0.1}, n, k).osc_limit.finite == (b > k));
  }
}

TEST_CASE("integrability thresholds") {
  const int n = 3, k = 2;
  auto rep = integrability_weight(RadialDensityFamily{0.0, 0.0, 0.1}, n, k, {1.0, 2.0, 8.0});
  for (const auto& [p, fin] : rep.lp) CHECK(fin.finite);
  CHECK(rep.weighted.finite);

  for (double a : {0.5, 1.0, 1.4, 1.6, 2.5}) {
    rep = integrability_weight(RadialDensityFamily{a, 0.0, 0.1}, n, k, {1.0, 2.0});
    for (const auto& [p, fin] : rep.lp) CHECK(fin.finite == (a * p < n));
  }
  const double threshold = k + double(k) / n;
  for (double b : {2.0, 2.5, 2.6, 2.75, 3.0, 4.0}) {
    for (double delta : {0.1, 0.01}) {
      rep = integrability_weight(RadialDensityFamily{double(k), b, delta}, n, k, {1.0});
      CHECK(rep.weighted.finite == (b > threshold));
    }
  }
}

TEST_CASE("radial input errors") {
  CHECK_THROWS_AS(radial_solve(RadialDensityFamily{-1.0, 0.0, 0.1}, 3, 2), Error);
  CHECK_THROWS_AS(radial_solve(RadialDensityFamily{0.0, 0.0, 0.1}, 3, 4), Error);
  // s^{n-1} f(s) not integrable for a > n
  CHECK_THROWS_AS(radial_solve(RadialDensityFamily{3.5, 0.0, 0.1}, 3, 2), Error);
  CHECK_THROWS_AS(integrability_weight(RadialDensityFamily{1.0, 0.0, 0.0}, 3, 2, {1.0}), Error);
  CHECK_THROWS_AS(integrability_weight(RadialDensityFamily{1.0, 0.0, 0.1}, 3, 2, {0.5}), Error);
  RadialProfile p;
  p.n = 3;
  p.rho = {0.1, 0.2, 0.2, 0.4, 0.5};
  p.chi = {0, 0, 0, 0, 0};
  CHECK_THROWS_AS(radial_hessian_density(p, 2), Error);
}
