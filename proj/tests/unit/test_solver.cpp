#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "khess/error.hpp"
#include "khess/newton.hpp"
#include "khess/solver.hpp"

using namespace khess;

namespace {

constexpr double kPi = std::numbers::pi;

double sup_diff(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

HessianProblem problem(const TorusGrid& g, int k, DensityField f, SolveMode mode, double s = 1.0) {
  HessianProblem p{FormField::identity(g), k, std::move(f), mode};
  p.s = s;
  return p;
}

}  // namespace

TEST_CASE("exponential mode: trivial solutions") {
  const TorusGrid g(3, 8, {0, 1});
  SolveOptions o;
  for (double s : {0.5, 1.0, 3.0}) {
    auto rep = solve_exponential(problem(g, 2, DensityField(g, 1.0), SolveMode::Exponential, s), o);
    CHECK(sup_diff(rep.phi, GridFunction(g)) <= 1e-12);

    const double c0 = 0.3;
    rep = solve_exponential(problem(g, 2, DensityField(g, std::exp(-s * c0)), SolveMode::Exponential, s), o);
    CHECK(sup_diff(rep.phi, GridFunction(g, c0)) <= 10 * o.tol);
    CHECK(rep.residual_sup <= o.tol);
  }
}

TEST_CASE("exponential mode: manufactured solution") {
  for (int k = 1; k <= 3; ++k) {
    const TorusGrid g(3, 8, {0, 1, 2});
    const auto star = GridFunction::sample(g, [](std::span<const double> x) {
      return 0.01 * std::sin(2 * kPi * x[0]) + 0.004 * std::cos(2 * kPi * (x[1] - x[2]));
    });
    const auto id = FormField::identity(g);
    auto gd = hessian_measure(id, star, k).density;
    for (std::size_t i = 0; i < gd.size(); ++i) gd[i] *= std::exp(-star[i]);
    SolveOptions o;
    const auto rep = solve_exponential(problem(g, k, gd, SolveMode::Exponential), o);
    CHECK(sup_diff(rep.phi, star) <= 10 * o.tol);
    CHECK(rep.cone_margin_min > 0.0);
    CHECK(residual(id, rep.phi, k, [&] {
            auto t = gd;
            for (std::size_t i = 0; i < t.size(); ++i) t[i] *= std::exp(rep.phi[i]);
            return t;
          }()).sup <= o.tol);
  }
}

TEST_CASE("laplace case is linear") {
  // k = 1: one Newton step up to the Krylov tolerance
  const TorusGrid g(3, 8, {0, 2});
  const auto star = GridFunction::sample(g, [](std::span<const double> x) { return 0.05 * std::cos(2 * kPi * (x[0] + x[2])); });
  const auto id = FormField::identity(g);
  auto gd = hessian_measure(id, star, 1).density;
  for (std::size_t i = 0; i < gd.size(); ++i) gd[i] *= std::exp(-star[i]);
  SolveOptions o;
  o.tol = 1e-12;
  const auto rep = solve_exponential(problem(g, 1, gd, SolveMode::Exponential), o);
  CHECK(sup_diff(rep.phi, star) <= 1e-11);
}

TEST_CASE("constant mode examples") {
  const TorusGrid g(3, 8, {0, 1});
  auto rep = solve_with_constant(problem(g, 2, DensityField(g, 1.0), SolveMode::Constant));
  CHECK(rep.c == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sup_diff(rep.phi, GridFunction(g)) <= 1e-12);

  rep = solve_with_constant(problem(g, 2, DensityField(g, 2.0), SolveMode::Constant));
  CHECK(rep.c == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sup_diff(rep.phi, GridFunction(g)) <= 1e-12);
}

TEST_CASE("constant mode: sine density") {
  // on a grid with only x1 active, H_2 = 1 + (2/3) A_11 is affine in phi, so
  // averaging H_2 = c f gives c = 1 / mean(f) = 1
  const TorusGrid g(3, 8, {0});
  const auto f = DensityField::sample(g, [](std::span<const double> x) { return 1.0 + 0.5 * std::sin(2 * kPi * x[0]); });
  SolveOptions o;
  o.tol = 1e-10;
  const auto rep = solve_with_constant(problem(g, 2, f, SolveMode::Constant), o);
  CHECK(rep.c == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.residual_sup <= o.tol);
  CHECK(field_norms(rep.phi, 1.0).max == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));

  // in general c lies between the extreme density ratios
  const TorusGrid g2(3, 8, {0, 1, 2});
  const auto f2 = DensityField::sample(g2, [](std::span<const double> x) {
    return 1.0 + 0.5 * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[2]);
  });
  const auto rep2 = solve_with_constant(problem(g2, 2, f2, SolveMode::Constant), o);
  const auto fn = field_norms(f2, 1.0);
  CHECK(rep2.c >= 1.0 / fn.max);
  CHECK(rep2.c <= 1.0 / fn.min);
  CHECK(rep2.residual_sup <= o.tol);
}

TEST_CASE("constant mode solution is unique up to the normalization") {
  const TorusGrid g(2, 8, {0, 1});
  const auto f = DensityField::sample(g, [](std::span<const double> x) {
    return 1.0 + 0.3 * std::cos(2 * kPi * x[0]) + 0.2 * std::sin(2 * kPi * x[1]);
  });
  SolveOptions o;
  o.tol = 1e-11;
  const auto prob = problem(g, 2, f, SolveMode::Constant);
  const auto a = solve_with_constant(prob, o);
  const auto guess = GridFunction::sample(g, [](std::span<const double> x) { return 0.003 * std::sin(2 * kPi * x[1]); });
  const auto b = solve_with_constant(prob, o, guess);
  CHECK(a.c == doctest::Approx(b.c).epsilon(1e-9));
  CHECK(sup_diff(a.phi, b.phi) <= 1e-8);
}

TEST_CASE("comparison principle for exponential solves") {
  const TorusGrid g(3, 8, {0, 1, 3});
  const auto g1 = DensityField::sample(g, [](std::span<const double> x) { return 1.0 + 0.2 * std::sin(2 * kPi * x[0]); });
  auto g2 = g1;
  std::vector<double> pos(6);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.position(i, pos);
    g2[i] *= 1.0 + 0.3 * std::pow(std::cos(2 * kPi * pos[3]), 2);
  }
  SolveOptions o;
  const auto p1 = solve_exponential(problem(g, 2, g1, SolveMode::Exponential), o);
  const auto p2 = solve_exponential(problem(g, 2, g2, SolveMode::Exponential), o);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(p1.phi[i] >= p2.phi[i] - 10 * o.tol);
}

TEST_CASE("continuation stages") {
  const TorusGrid g(3, 8, {0, 1});
  SolveOptions o;
  auto prob = problem(g, 2, DensityField(g, 1.0), SolveMode::Constant);

  auto res = continuation_degenerate(FormField::identity(g), prob, 4, o);
  REQUIRE(res.schedule.size() == 5);
  for (const auto& st : res.schedule) {
    CHECK(st.osc <= 10 * o.tol);
    CHECK(st.c == doctest::Approx(std::pow(1.0 + std::ldexp(1.0, -st.j), 2)).epsilon(1e-10));
  }

  res = continuation_degenerate(FormField::identity(g).scaled(0.5), prob, 6, o);
  for (std::size_t j = 1; j < res.schedule.size(); ++j) CHECK(res.schedule[j].c < res.schedule[j - 1].c);
  CHECK(res.schedule.back().c == doctest::Approx(std::pow(0.5 + 1.0 / 64, 2)).epsilon(1e-10));

  // omega_0 = diag(s, 1, 1) with s = sin^2(2 pi x1) + sin^2(2 pi y1) (mean 1):
  // dd^c phi = diag(1 - s, 0, 0) solves every stage, c_j = (1 + 2^-j)^2
  const auto omega0 = FormField::sample(g, [](std::span<const double> x) {
    const double s = std::pow(std::sin(2 * kPi * x[0]), 2) + std::pow(std::sin(2 * kPi * x[1]), 2);
    return HermitianMatrix::diagonal({s, 1.0, 1.0});
  });
  prob.p = INFINITY;
  res = continuation_degenerate(omega0, prob, 10, o);
  REQUIRE(res.schedule.size() == 11);
  for (const auto& st : res.schedule) {
    CHECK(st.c == doctest::Approx(std::pow(1.0 + std::ldexp(1.0, -st.j), 2)).epsilon(1e-10));
    CHECK(st.osc == doctest::Approx(res.schedule.front().osc).epsilon(1e-8));
    CHECK(st.residual <= o.tol);
  }
  CHECK_FALSE(res.exponent_warning);
}

TEST_CASE("solver input errors") {
  const TorusGrid g(2, 6, {0});
  CHECK_THROWS_AS(solve_with_constant(problem(g, 3, DensityField(g, 1.0), SolveMode::Constant)), Error);
  auto neg = DensityField(g, 1.0);
  neg[2] = -1.0;
  try {
    solve_with_constant(problem(g, 2, neg, SolveMode::Constant));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonPositiveDensity);
  }
  try {
    solve_with_constant(problem(g, 2, DensityField(g, 0.0), SolveMode::Constant));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroMass);
  }
  CHECK_THROWS_AS(solve_exponential(problem(g, 2, DensityField(g, 1.0), SolveMode::Exponential, 0.0)), Error);
  CHECK_THROWS_AS(continuation_degenerate(FormField::identity(g).scaled(-1.0),
                                          problem(g, 2, DensityField(g, 1.0), SolveMode::Constant), 3),
                  Error);
}

TEST_CASE("density floor is reported") {
  const TorusGrid g(2, 8, {0});
  auto f = DensityField::sample(g, [](std::span<const double> x) { return std::pow(std::sin(2 * kPi * x[0]), 2); });
  const auto rep = solve_with_constant(problem(g, 1, f, SolveMode::Constant));
  CHECK(rep.floored_points == 2);
}

TEST_CASE("residual of exact solutions") {
  const TorusGrid g(3, 6, {0, 3});
  const auto id = FormField::identity(g);
  CHECK(residual(id, GridFunction(g), 2, DensityField(g, 1.0)).sup == 0.0);
  const auto star = GridFunction::sample(g, [](std::span<const double> x) { return 0.02 * std::cos(2 * kPi * x[3]); });
  const auto r = residual(id, star, 3, hessian_measure(id, star, 3).density);
  CHECK(r.sup == 0.0);
  CHECK(r.l1 == 0.0);
}

TEST_CASE("newton linearization matches finite differences") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 1; k <= 3; ++k) {
    const TorusGrid g(3, 6, {0, 1, 2, 5});
    const auto id = FormField::identity(g);
    const auto phi = GridFunction::sample(g, [](std::span<const double> x) {
      return 0.01 * std::sin(2 * kPi * (x[0] - x[5])) + 0.008 * std::cos(2 * kPi * (x[1] + x[2]));
    });
    REQUIRE(is_k_subharmonic(id, phi, k).member);
    GridFunction dir(g);
    for (auto& v : dir.values()) v = 1e-3 * u(rng);
    const auto d = density_derivative(id, phi, k, dir);
    const double eps = 1e-5;
    GridFunction moved(phi);
    for (std::size_t i = 0; i < g.size(); ++i) moved[i] += eps * dir[i];
    const auto h0 = hessian_measure(id, phi, k).density;
    const auto h1 = hessian_measure(id, moved, k).density;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      num = std::max(num, std::abs((h1[i] - h0[i]) / eps - d[i]));
      den = std::max(den, std::abs(d[i]));
    }
    CHECK(num / den <= 1e-4);
  }
}
