#pragma once

// Named fields used by configs and by the acceptance runs.

#include <string>
#include <vector>

#include "khess/harness/config.hpp"
#include "khess/torus.hpp"

namespace khess::harness {

/// Grid of a problem block; axis names are mapped to indices (x1 -> 0, y1 -> 1, ...).
TorusGrid make_grid(const ProblemConfig& p);
int axis_index(const std::string& name);

/// const: scale * Id; sine: scale (1 + amplitude sin 2 pi x1) Id;
/// slice-degenerate: scale diag(sin^2 2 pi x1 + sin^2 2 pi y1, 1, ..., 1).
FormField make_omega(const TorusGrid& grid, const ProblemConfig& p);

/// const: value; sine: 1 + amplitude sin 2 pi x1; slice-degenerate:
/// sin^2 2 pi x1 + sin^2 2 pi y1; truncated-singularity: min(r^-power, cap)
/// with r the periodic distance to the grid point at the origin.
DensityField make_density(const TorusGrid& grid, const ProblemConfig& p);

/// Periodic distance from a point of the unit torus to the origin.
double torus_distance_to_origin(std::span<const double> x);

/// Sum of waves c cos(2 pi kappa . x + shift) with integer wave vectors over
/// the 2n real axes; analytic derivatives for manufactured solutions.
struct PlaneWave {
  double amplitude = 0.0;
  std::vector<int> kappa;
  double shift = 0.0;
};

class WaveSum {
 public:
  WaveSum(int n, std::vector<PlaneWave> waves);

  double value(std::span<const double> x) const;
  /// Exact dd^c at x as a Hermitian matrix.
  HermitianMatrix ddc(std::span<const double> x) const;

  GridFunction sample(const TorusGrid& grid) const;
  /// Pointwise sigma_k(omega + dd^c u) / C(n, k) with the exact dd^c.
  DensityField density(const FormField& omega, int k) const;

 private:
  int n_;
  std::vector<PlaneWave> waves_;
};

}  // namespace khess::harness
