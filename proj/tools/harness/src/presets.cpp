#include "khess/harness/presets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace khess::harness {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sin2(double t) {
  const double s = std::sin(kTwoPi * t);
  return s * s;
}

}  // namespace

int axis_index(const std::string& name) {
  if (name.size() != 2 || (name[0] != 'x' && name[0] != 'y') || name[1] < '1' || name[1] > '4') {
    throw ValidationError("problem.axes", "unknown axis '" + name + "'");
  }
  return 2 * (name[1] - '1') + (name[0] == 'y' ? 1 : 0);
}

TorusGrid make_grid(const ProblemConfig& p) {
  if (p.axes.empty()) return TorusGrid(p.n, p.N);
  std::vector<int> active;
  for (const auto& a : p.axes) active.push_back(axis_index(a));
  std::sort(active.begin(), active.end());
  return TorusGrid(p.n, p.N, std::move(active));
}

FormField make_omega(const TorusGrid& grid, const ProblemConfig& p) {
  const int n = grid.n();
  if (p.omega == "const") return FormField(grid, HermitianMatrix::identity(n).scaled(p.omega_scale));
  if (p.omega == "sine") {
    return FormField::sample(grid, [&](std::span<const double> x) {
      return HermitianMatrix::identity(n).scaled(p.omega_scale * (1.0 + p.omega_amplitude * std::sin(kTwoPi * x[0])));
    });
  }
  if (p.omega == "slice-degenerate") {
    return FormField::sample(grid, [&](std::span<const double> x) {
      std::vector<double> d(static_cast<std::size_t>(n), p.omega_scale);
      d[0] = p.omega_scale * (sin2(x[0]) + sin2(x[1]));
      return HermitianMatrix::diagonal(d);
    });
  }
  throw ValidationError("problem.omega", "unknown preset '" + p.omega + "'");
}

double torus_distance_to_origin(std::span<const double> x) {
  double r2 = 0.0;
  for (double v : x) {
    const double d = std::min(v, 1.0 - v);
    r2 += d * d;
  }
  return std::sqrt(r2);
}

DensityField make_density(const TorusGrid& grid, const ProblemConfig& p) {
  if (p.density == "const") return DensityField(grid, p.density_value);
  if (p.density == "sine") {
    return DensityField::sample(grid, [&](std::span<const double> x) {
      return 1.0 + p.density_amplitude * std::sin(kTwoPi * x[0]);
    });
  }
  if (p.density == "slice-degenerate") {
    return DensityField::sample(grid, [](std::span<const double> x) { return sin2(x[0]) + sin2(x[1]); });
  }
  if (p.density == "truncated-singularity") {
    return DensityField::sample(grid, [&](std::span<const double> x) {
      const double r = torus_distance_to_origin(x);
      return r == 0.0 ? p.singularity_cap : std::min(std::pow(r, -p.singularity_power), p.singularity_cap);
    });
  }
  throw ValidationError("problem.density", "unknown preset '" + p.density + "'");
}

WaveSum::WaveSum(int n, std::vector<PlaneWave> waves) : n_(n), waves_(std::move(waves)) {
  for (auto& w : waves_) {
    if (static_cast<int>(w.kappa.size()) > 2 * n) throw Error(Errc::DimensionMismatch, "wave vector too long");
    w.kappa.resize(static_cast<std::size_t>(2 * n), 0);
  }
}

double WaveSum::value(std::span<const double> x) const {
  double v = 0.0;
  for (const auto& w : waves_) {
    double phase = w.shift;
    for (int a = 0; a < 2 * n_; ++a) phase += kTwoPi * w.kappa[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    v += w.amplitude * std::cos(phase);
  }
  return v;
}

HermitianMatrix WaveSum::ddc(std::span<const double> x) const {
  // D_ab u = -(2 pi)^2 sum c kappa_a kappa_b cos(phase)
  const int m = 2 * n_;
  std::vector<double> d(static_cast<std::size_t>(m * m), 0.0);
  for (const auto& w : waves_) {
    double phase = w.shift;
    for (int a = 0; a < m; ++a) phase += kTwoPi * w.kappa[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    const double c = -kTwoPi * kTwoPi * w.amplitude * std::cos(phase);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        d[static_cast<std::size_t>(a * m + b)] += c * w.kappa[static_cast<std::size_t>(a)] * w.kappa[static_cast<std::size_t>(b)];
      }
    }
  }
  auto D = [&](int a, int b) { return d[static_cast<std::size_t>(a * m + b)]; };
  ComplexMatrix A(n_, n_);
  for (int j = 0; j < n_; ++j) {
    for (int l = 0; l < n_; ++l) {
      const int xj = 2 * j, yj = 2 * j + 1, xl = 2 * l, yl = 2 * l + 1;
      A(j, l) = Complex(0.5 * (D(xj, xl) + D(yj, yl)), 0.5 * (D(xj, yl) - D(yj, xl)));
    }
  }
  return HermitianMatrix(A);
}

GridFunction WaveSum::sample(const TorusGrid& grid) const {
  return GridFunction::sample(grid, [&](std::span<const double> x) { return value(x); });
}

DensityField WaveSum::density(const FormField& omega, int k) const {
  const auto& grid = omega.grid();
  const auto g = HermitianMatrix::identity(grid.n());
  std::vector<double> out(grid.size());
  std::vector<double> pos(static_cast<std::size_t>(grid.axis_count()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.position(i, pos);
    out[i] = hessian_density(omega.at(i) + ddc(pos), g, k);
  }
  return DensityField(grid, std::move(out));
}

}  // namespace khess::harness
