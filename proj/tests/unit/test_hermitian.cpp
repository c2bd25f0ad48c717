#include <doctest.h>

#include <cmath>
#include <random>

#include "khess/error.hpp"
#include "khess/hermitian.hpp"
#include "khess/point_kernel.hpp"

using namespace khess;

namespace {

// elementary symmetric polynomials by explicit subset sums
double subset_sigma(const std::vector<double>& l, int j) {
  const int n = static_cast<int>(l.size());
  double s = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != j) continue;
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) p *= l[static_cast<std::size_t>(i)];
    }
    s += p;
  }
  return s;
}

HermitianMatrix random_hermitian(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ComplexMatrix m(n, n);
  for (int j = 0; j < n; ++j) {
    m(j, j) = u(rng);
    for (int l = j + 1; l < n; ++l) {
      m(j, l) = Complex(u(rng), u(rng));
      m(l, j) = std::conj(m(j, l));
    }
  }
  return HermitianMatrix(m);
}

HermitianMatrix random_metric(std::mt19937_64& rng, int n) {
  auto b = random_hermitian(rng, n, 0.3);
  return b + HermitianMatrix::identity(n).scaled(2.0);
}

}  // namespace

TEST_CASE("relative eigenvalues") {
  auto l = relative_eigenvalues(HermitianMatrix::identity(3), HermitianMatrix::identity(3));
  for (double v : l) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  l = relative_eigenvalues(HermitianMatrix::diagonal({2.0, 4.0}), HermitianMatrix::diagonal({1.0, 2.0}));
  CHECK(l[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(l[1] == doctest::Approx(2.0).epsilon(1e-14));

  std::mt19937_64 rng(3);
  const auto g = random_metric(rng, 3);
  for (double v : relative_eigenvalues(g, g)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("relative eigenvalues reject bad input") {
  ComplexMatrix m(2, 2);
  m << 1.0, Complex(0.0, 1.0), Complex(0.0, 1.0), 1.0;
  CHECK_THROWS_AS(HermitianMatrix{m}, Error);
  CHECK_THROWS_AS(relative_eigenvalues(HermitianMatrix::identity(2), HermitianMatrix::diagonal({1.0, -1.0})), Error);
  CHECK_THROWS_AS(relative_eigenvalues(HermitianMatrix::identity(2), HermitianMatrix::identity(3)), Error);
}

TEST_CASE("sigma values") {
  const std::vector<double> ones{1, 1, 1};
  auto s = sigma(ones);
  CHECK(s.values() == std::vector<double>{1, 3, 3, 1});

  const std::vector<double> l{3, 1, -0.5};
  s = sigma(l);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == doctest::Approx(3.5));
  CHECK(s[2] == doctest::Approx(1.0));
  CHECK(s[3] == doctest::Approx(-1.5));

  const std::vector<double> twos{2, 2, 2};
  CHECK(sigma(twos)[2] == doctest::Approx(12.0));
}

TEST_CASE("sigma matches subset sums on random spectra") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n = 1; n <= 4; ++n) {
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> l(static_cast<std::size_t>(n));
      for (auto& v : l) v = u(rng);
      const auto s = sigma(l);
      for (int j = 0; j <= n; ++j) CHECK(s[j] == doctest::Approx(subset_sigma(l, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("hessian density examples") {
  std::mt19937_64 rng(5);
  const auto g = random_metric(rng, 3);
  for (int k = 1; k <= 3; ++k) CHECK(hessian_density(g, g, k) == doctest::Approx(1.0).epsilon(1e-12));
  const auto id = HermitianMatrix::identity(3);
  CHECK(hessian_density(HermitianMatrix::diagonal({2, 2, 2}), id, 2) == doctest::Approx(4.0));
  CHECK(hessian_density(HermitianMatrix::diagonal({3, 1, -0.5}), id, 2) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("hessian density is congruence invariant and homogeneous") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_hermitian(rng, 3);
    const auto g = random_metric(rng, 3);
    ComplexMatrix p = random_hermitian(rng, 3).entries();
    p += ComplexMatrix::Identity(3, 3) * 3.0;
    p(0, 1) += Complex(0.0, 0.4);
    for (int k = 1; k <= 3; ++k) {
      const double base = hessian_density(a, g, k);
      CHECK(hessian_density(a.congruence(p), g.congruence(p), k) == doctest::Approx(base).epsilon(1e-9));
      CHECK(hessian_density(a.scaled(1.7), g, k) == doctest::Approx(std::pow(1.7, k) * base).epsilon(1e-10));
    }
  }
}

TEST_CASE("mixed hessian density") {
  const auto id = HermitianMatrix::identity(3);
  std::mt19937_64 rng(2);
  const auto a = random_hermitian(rng, 3);
  std::vector<HermitianMatrix> same{a, a};
  CHECK(mixed_hessian_density(same, id) == doctest::Approx(hessian_density(a, id, 2)).epsilon(1e-12));

  std::vector<HermitianMatrix> f{id, HermitianMatrix::diagonal({4, 1, 1})};
  CHECK(mixed_hessian_density(f, id) == doctest::Approx(2.0));

  // multilinear in each slot, so a zero slot gives zero
  std::vector<HermitianMatrix> z{id, HermitianMatrix::zero(3)};
  CHECK(mixed_hessian_density(z, id) == doctest::Approx(0.0));
}

TEST_CASE("cone membership") {
  const auto id = HermitianMatrix::identity(3);
  for (int k = 1; k <= 3; ++k) {
    const auto c = in_gamma_k(id, id, k);
    CHECK(c.member);
    for (double m : c.margins) CHECK(m == doctest::Approx(1.0));
  }
  const auto a = HermitianMatrix::diagonal({3, 1, -0.5});
  auto c = in_gamma_k(a, id, 2);
  CHECK(c.member);
  CHECK(c.margins[0] == doctest::Approx(7.0 / 6.0));
  CHECK(c.margins[1] == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(in_gamma_k(a, id, 3).member);

  const auto b = HermitianMatrix::diagonal({-1, 5, 5});
  c = in_gamma_k(b, id, 2);
  CHECK(c.member);
  CHECK(c.margins[0] * 3 == doctest::Approx(9.0));
  CHECK(c.margins[1] * 3 == doctest::Approx(15.0));
  CHECK_FALSE(in_gamma_k(b, id, 3).member);
}

TEST_CASE("garding gap") {
  const auto id = HermitianMatrix::identity(3);
  std::mt19937_64 rng(4);
  const auto a = random_hermitian(rng, 3, 0.2) + id;
  std::vector<HermitianMatrix> same{a, a};
  CHECK(garding_gap(same, id) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  std::vector<HermitianMatrix> f{id, HermitianMatrix::diagonal({4, 1, 1})};
  CHECK(garding_gap(f, id) == doctest::Approx(2.0 - std::sqrt(3.0)));

  std::vector<HermitianMatrix> bad{id, HermitianMatrix::diagonal({-3, -3, 1})};
  CHECK_THROWS_AS(garding_gap(bad, id), Error);
}

TEST_CASE("garding gap is nonnegative on random cone tuples") {
  std::mt19937_64 rng(21);
  for (auto [n, k] : std::vector<std::pair<int, int>>{{3, 2}, {3, 3}, {2, 2}, {4, 2}}) {
    const auto g = HermitianMatrix::identity(n);
    int tested = 0;
    double worst = INFINITY;
    for (int rep = 0; rep < 20000 && tested < 1000; ++rep) {
      std::vector<HermitianMatrix> forms;
      for (int i = 0; i < k; ++i) forms.push_back(random_hermitian(rng, n) + g.scaled(1.2));
      bool all = true;
      for (const auto& f : forms) all = all && in_gamma_k(f, g, k).member;
      if (!all) continue;
      ++tested;
      worst = std::min(worst, garding_gap(forms, g));
    }
    CHECK(tested > 100);
    CHECK(worst >= -1e-10);
  }
}

TEST_CASE("maclaurin chain") {
  std::mt19937_64 rng(17);
  const auto g = HermitianMatrix::identity(4);
  for (int rep = 0; rep < 500; ++rep) {
    const auto a = random_hermitian(rng, 4) + g.scaled(2.5);
    const auto c = in_gamma_k(a, g, 4);
    if (!c.member) continue;
    for (int j = 1; j < 4; ++j) {
      CHECK(std::pow(c.margins[static_cast<std::size_t>(j)], 1.0 / (j + 1)) <=
            std::pow(c.margins[static_cast<std::size_t>(j - 1)], 1.0 / j) + 1e-12);
    }
  }
}

TEST_CASE("packed kernel agrees with eigenvalue path") {
  std::mt19937_64 rng(9);
  for (int n = 2; n <= 4; ++n) {
    const auto g = HermitianMatrix::identity(n);
    for (int rep = 0; rep < 30; ++rep) {
      const auto a = random_hermitian(rng, n);
      double p[16];
      kernel::pack(a, p);
      const auto back = kernel::unpack(p, n);
      CHECK((back.entries() - a.entries()).norm() == 0.0);
      const auto sig = sigma(relative_eigenvalues(a, g));
      const auto sp = kernel::sigma_packed(p, n, n);
      for (int j = 0; j <= n; ++j) CHECK(sp[static_cast<std::size_t>(j)] == doctest::Approx(sig[j]).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("sigma gradient matches finite differences") {
  std::mt19937_64 rng(12);
  for (int n = 2; n <= 4; ++n) {
    for (int k = 1; k <= n; ++k) {
      const auto a = random_hermitian(rng, n);
      const auto b = random_hermitian(rng, n);
      double pa[16], pb[16], w[16], pt[16], pm[16];
      kernel::pack(a, pa);
      kernel::pack(b, pb);
      const auto s = kernel::sigma_packed(pa, n, k);
      kernel::sigma_gradient_packed(pa, n, k, s, w);
      const double eps = 1e-6;
      for (int i = 0; i < n * n; ++i) {
        pt[i] = pa[i] + eps * pb[i];
        pm[i] = pa[i] - eps * pb[i];
      }
      const double fd = (kernel::sigma_packed(pt, n, k)[static_cast<std::size_t>(k)] -
                         kernel::sigma_packed(pm, n, k)[static_cast<std::size_t>(k)]) / (2 * eps);
      CHECK(kernel::trace_product_packed(w, pb, n) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
    }
  }
}

TEST_CASE("cone entry shift lands on the cone boundary") {
  std::mt19937_64 rng(13);
  for (int n = 2; n <= 4; ++n) {
    for (int k = 1; k <= n; ++k) {
      const auto g = HermitianMatrix::identity(n);
      const auto a = random_hermitian(rng, n);
      const auto sig = sigma(relative_eigenvalues(a, g));
      kernel::SigmaArray s{};
      for (int j = 0; j <= n; ++j) s[static_cast<std::size_t>(j)] = sig[j];
      const double t = kernel::cone_entry_shift(s, n, k);
      CHECK(in_gamma_k(a + g.scaled(t + 1e-7), g, k).member);
      CHECK_FALSE(in_gamma_k(a + g.scaled(t - 1e-7), g, k).member);
    }
  }
}
