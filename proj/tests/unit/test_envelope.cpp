#include <doctest.h>

#include <cmath>
#include <numbers>

#include "khess/envelope.hpp"
#include "khess/error.hpp"
#include "khess/solver.hpp"

using namespace khess;

namespace {

constexpr double kPi = std::numbers::pi;

GridFunction cos_obstacle(const TorusGrid& g, double amp) {
  return GridFunction::sample(g, [amp](std::span<const double> x) { return -amp * std::cos(2 * kPi * x[0]); });
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("constant obstacle") {
  const TorusGrid g(3, 8, {0});
  const auto prob = make_obstacle_problem(FormField::identity(g), 3, GridFunction(g, 5.0));
  EnvelopeOptions o;
  o.schedule = {2, 4, 8, 16};
  const auto res = envelope_penalized(prob, o);
  REQUIRE(res.stages.size() == 4);
  // majorant max(H(u), 0) + 1 = 2, so stage j solves 1 = 2 exp(j (phi - 5))
  for (std::size_t s = 0; s < res.stages.size(); ++s) {
    const double j = o.schedule[s];
    for (double v : res.stages[s].values()) CHECK(v == doctest::Approx(5.0 - std::log(2.0) / j).epsilon(1e-12));
  }
  const auto sweep = envelope_sweep_oracle(prob);
  for (double v : sweep.values()) CHECK(v == 5.0);
  const auto cs = contact_set(sweep, prob);
  CHECK(cs.contact_points == g.size());
}

TEST_CASE("subharmonic obstacle is its own envelope") {
  const TorusGrid g(3, 8, {0});
  const auto u = GridFunction::sample(g, [](std::span<const double> x) { return -0.02 * std::sin(2 * kPi * x[0]); });
  REQUIRE(is_k_subharmonic(FormField::identity(g), u, 3).member);
  const auto prob = make_obstacle_problem(FormField::identity(g), 3, u);
  EnvelopeOptions o;
  o.schedule = {2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192};
  const auto res = envelope_penalized(prob, o);
  CHECK(sup_diff(res.envelope, u) <= 1e-3);
  const auto sweep = envelope_sweep_oracle(prob);
  CHECK(sup_diff(sweep, u) <= 1e-12);
  const auto cs = contact_set(sweep, prob);
  CHECK(cs.contact_points == g.size());
  CHECK(cs.off_contact_mass == 0.0);
}

TEST_CASE("cosine obstacle against the sweep oracle") {
  const TorusGrid g(3, 8, {0});
  const auto u = cos_obstacle(g, 0.1);
  const auto prob = make_obstacle_problem(FormField::identity(g), 3, u);
  EnvelopeOptions o;
  o.schedule = {2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192};
  const auto res = envelope_penalized(prob, o);
  const auto sweep = envelope_sweep_oracle(prob);
  CHECK(sup_diff(res.envelope, sweep) <= 5e-3 * 0.2);
  CHECK(res.rate_holds);
  double below = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(res.envelope[i] <= u[i] + 1e-9);
    below = std::max(below, u[i] - sweep[i]);
  }
  CHECK(below > 0.01);
  CHECK(is_k_subharmonic(prob.omega, res.envelope, 3).worst_margin >= -1e-7);
  // stage errors are measured against the reference stage
  for (const auto& st : res.trace) {
    if (st.j <= 512) CHECK(st.sup_error <= res.rate_fit * std::log(st.j) / st.j * (1 + 1e-12));
  }
}

TEST_CASE("envelope operator properties") {
  const TorusGrid g(3, 16, {0});
  const auto id = FormField::identity(g);
  const auto u = cos_obstacle(g, 0.1);
  const auto p = envelope_sweep_oracle(make_obstacle_problem(id, 3, u));
  // idempotent
  CHECK(sup_diff(envelope_sweep_oracle(make_obstacle_problem(id, 3, p)), p) <= 1e-12);
  // commutes with adding constants
  GridFunction shifted(u);
  for (auto& v : shifted.values()) v += 0.7;
  const auto ps = envelope_sweep_oracle(make_obstacle_problem(id, 3, shifted));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(ps[i] == doctest::Approx(p[i] + 0.7).epsilon(1e-12));
  // monotone in the obstacle
  const auto u2 = GridFunction::sample(g, [](std::span<const double> x) {
    return -0.1 * std::cos(2 * kPi * x[0]) + 0.05 * std::sin(4 * kPi * x[0]) + 0.06;
  });
  const auto p2 = envelope_sweep_oracle(make_obstacle_problem(id, 3, u2));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(p[i] <= p2[i] + 1e-12);
  // larger k gives a smaller cone, hence a smaller envelope
  const auto p1 = envelope_sweep_oracle(make_obstacle_problem(id, 1, u));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(p[i] <= p1[i] + 1e-12);
}

TEST_CASE("contact set of the cosine obstacle") {
  const TorusGrid g(3, 32, {0});
  const auto u = cos_obstacle(g, 0.1);
  const auto prob = make_obstacle_problem(FormField::identity(g), 3, u);
  const auto p = envelope_sweep_oracle(prob);
  const auto cs = contact_set(p, prob);
  CHECK(cs.contact_points > 0);
  CHECK(cs.contact_points < g.size());
  CHECK(cs.off_contact_mass <= 0.01 * cs.total_mass);
}

TEST_CASE("monge-ampere bound on the envelope") {
  const TorusGrid g(3, 8, {0});
  const auto id = FormField::identity(g);
  auto chk = envelope_ma_bound_check(GridFunction(g), DensityField(g, 1.0), id, 2);
  CHECK(chk.c_observed == doctest::Approx(1.0));
  CHECK(chk.pass);

  for (double c : {1.0, 2.0, 0.25}) {
    HessianProblem prob{id, 2, DensityField(g, std::pow(c, 2)), SolveMode::Constant};
    const auto rep = solve_with_constant(prob);
    auto fe = prob.density;
    for (auto& v : fe.values()) v *= rep.c;
    chk = envelope_ma_bound_check(rep.phi, fe, id, 2);
    CHECK(chk.c_observed <= 1.05);
    CHECK(chk.pass);
  }

  const auto f = DensityField::sample(g, [](std::span<const double> x) { return 1.0 + 0.5 * std::sin(2 * kPi * x[0]); });
  HessianProblem prob{id, 2, f, SolveMode::Constant};
  const auto rep = solve_with_constant(prob);
  auto fe = f;
  for (auto& v : fe.values()) v *= rep.c;
  chk = envelope_ma_bound_check(rep.phi, fe, id, 2);
  CHECK(chk.c_observed <= 1.05);
  CHECK(chk.contact_points > 0);
}

TEST_CASE("envelope input errors") {
  const TorusGrid g(3, 8, {0});
  const auto id = FormField::identity(g);
  CHECK_THROWS_AS(make_obstacle_problem(id, 4, GridFunction(g)), Error);
  auto prob = make_obstacle_problem(id, 3, cos_obstacle(g, 0.1));
  for (auto& v : prob.majorant.values()) v = 1e-3;
  try {
    envelope_penalized(prob);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MajorantViolated);
  }
  EnvelopeOptions o;
  o.schedule = {4, 2};
  CHECK_THROWS_AS(envelope_penalized(make_obstacle_problem(id, 3, GridFunction(g)), o), Error);
}
