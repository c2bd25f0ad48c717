#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "khess/harness/config.hpp"
#include "khess/harness/experiments.hpp"
#include "khess/harness/report.hpp"

using namespace khess;
using namespace khess::harness;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("khess_harness_" + name);
  std::filesystem::remove_all(d);
  return d;
}

const Check* find_check(const Report& r, const std::string& id) {
  for (const auto& c : r.checks) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const auto c = parse_config("[experiment]\nkind = solve\n\n[problem]\nn = 3\nk = 2\nN = 8\ndensity = const\n");
  CHECK(c.kind == ExperimentKind::Solve);
  CHECK(c.problem.tol == 1e-8);
  CHECK(c.problem.max_iter == 200);
  CHECK(c.problem.mode == "constant");
  CHECK(c.seed == 1);
  CHECK_FALSE(c.exponent_warning);
}

TEST_CASE("config lists, comments and infinity") {
  const auto c = parse_config(
      "# leading comment\n"
      "[experiment]\n"
      "kind = oscillation ; trailing\n"
      "seed = 42\n"
      "[problem]\n"
      "axes = x1, y1\n"
      "p = inf\n"
      "[oscillation]\n"
      "caps = 10, 1e2, 1000\n");
  CHECK(c.seed == 42);
  CHECK(c.problem.axes == std::vector<std::string>{"x1", "y1"});
  CHECK(std::isinf(c.problem.p));
  CHECK(c.oscillation.caps == std::vector<double>{10, 100, 1000});
}

TEST_CASE("exponent at or below n/k is accepted with a warning") {
  const auto c = parse_config("[experiment]\nkind = solve\n[problem]\nn = 3\nk = 2\np = 1.0\n");
  CHECK(c.exponent_warning);
  CHECK_FALSE(c.warnings.empty());
  auto cfg = c;
  cfg.kind = ExperimentKind::Solve;
  cfg.problem.axes = {"x1"};
  const auto r = run_experiment(cfg);
  CHECK(r.metrics["exponent_warning"] == true);
}

TEST_CASE("config validation errors") {
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = solve\n[problem]\nn = 3\nk = 5\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = solve\n[problem]\nN = 7\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = bake\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[problem]\nn = 3\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = solve\n[problem]\naxes = x1, z9\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = solve\n[verify]\ncriteria = AC11\n"), ValidationError);
  try {
    parse_config("[experiment]\nkind = solve\n[problem]\nkk = 2\n");
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(e.key() == "problem.kk");
  }
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = solve\n[nonsense]\nx = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = solve\n[problem]\nn = three\n"), ValidationError);
}

TEST_CASE("config syntax errors carry positions") {
  try {
    parse_config("[experiment]\nkind = solve\n[problem\n");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_config("[experiment]\nkind = solve\n  n 3\n");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 1);
  }
  CHECK_THROWS_AS(parse_config("n = 3\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = solve\nkind = verify\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = solve\n[experiment]\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[experiment]\nkind =\n"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/khess.ini"), Error);
}

TEST_CASE("report writing") {
  Report empty;
  empty.experiment = "solve";
  auto dir = fresh_dir("empty");
  auto files = write_report(empty, dir);
  REQUIRE(files.size() == 1);
  CHECK(files[0].filename() == "summary.json");
  const auto js = Json::parse(slurp(files[0]));
  CHECK(js["pass"] == true);

  CHECK(fmt(0.1) == "0.10000000000000001");
  CHECK(fmt(-INFINITY) == "-inf");
  Check c{"AC5", "stability exponent", "", true, Json::object(), "ok"};
  CHECK(summary_line(c) == "AC5 PASS stability exponent: ok");
  c.pass = false;
  c.id.clear();
  CHECK(summary_line(c).rfind("-- FAIL", 0) == 0);
}

TEST_CASE("stability experiment and byte-identical reruns") {
  auto cfg = parse_config("[experiment]\nkind = stability\nseed = 3\n[problem]\naxes = x1\n");
  const auto r1 = run_experiment(cfg);
  const auto* chk = find_check(r1, "AC5");
  REQUIRE(chk != nullptr);
  CHECK(chk->pass);
  const auto d1 = fresh_dir("stab1");
  const auto d2 = fresh_dir("stab2");
  const auto f1 = write_report(r1, d1);
  write_report(run_experiment(cfg), d2);
  CHECK(std::filesystem::exists(d1 / "stability.csv"));
  CHECK(std::filesystem::exists(d1 / "summary.json"));
  for (const auto& p : f1) CHECK(slurp(p) == slurp(d2 / p.filename()));

  // a zero perturbation reproduces the base solution
  cfg.stability.amplitudes = {0.0};
  const auto r0 = run_experiment(cfg);
  CHECK(r0.tables.front().rows.front()[2] == "0");
}

TEST_CASE("verify property suite at edge degrees") {
  for (auto [n, k] : std::vector<std::pair<int, int>>{{2, 2}, {3, 1}, {3, 2}}) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Verify;
    cfg.problem.n = n;
    cfg.problem.k = k;
    cfg.verify.samples = 300;
    cfg.verify.pairs = 2;
    validate(cfg);
    Report r;
    run_properties(cfg, r);
    CHECK(r.checks.size() == 7);
    for (const auto& c : r.checks) {
      INFO(summary_line(c));
      CHECK(c.pass);
    }
  }
}

TEST_CASE("random cone members") {
  Rng rng(9);
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i < 50; ++i) {
      const auto a = random_cone_member(rng, 3, k);
      CHECK(in_gamma_k(a, HermitianMatrix::identity(3), k).member);
      CHECK_FALSE(in_gamma_k(a - HermitianMatrix::identity(3).scaled(0.11), HermitianMatrix::identity(3), k).member);
    }
  }
}

TEST_CASE("radial experiment writes the scan table") {
  auto cfg = parse_config("[experiment]\nkind = radial\n[radial]\nb_values = 1, 3\n");
  const auto r = run_experiment(cfg);
  const auto* chk = find_check(r, "AC9");
  REQUIRE(chk != nullptr);
  CHECK(chk->pass);
  const auto& t = r.tables.front();
  CHECK(t.name == "radial_scan");
  CHECK(t.columns == std::vector<std::string>{"a", "b", "delta", "p", "lp_finite", "weighted_finite", "osc_limit_or_rate"});
  CHECK(t.rows.size() == 8);
}
