#pragma once

// Periodic-grid calculus on the flat torus (R/Z)^{2n} with complex
// coordinates z_j = x_j + i y_j and reference form omega_X = identity.
//
// Axis order is fixed as (x_1, y_1, ..., x_n, y_n); values are stored
// row-major, the last axis varying fastest. An axis may be frozen: it then
// carries a single sample and every difference along it vanishes, which is
// exactly the discrete calculus of a field that is constant in that
// direction on the full N-point axis.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "khess/hermitian.hpp"

namespace khess {

inline constexpr int kMaxAxes = 2 * kMaxDim;

class TorusGrid {
 public:
  /// Full grid: every axis carries N points. N >= 4 and even, 2 <= n <= 4.
  TorusGrid(int n, int points_per_axis);
  /// Axes not listed in active_axes are frozen.
  TorusGrid(int n, int points_per_axis, std::vector<int> active_axes);

  int n() const noexcept { return n_; }
  int axis_count() const noexcept { return 2 * n_; }
  int points_per_axis() const noexcept { return points_; }
  double spacing() const noexcept { return 1.0 / points_; }
  std::size_t size() const noexcept { return size_; }

  bool is_active(int axis) const noexcept { return (frozen_mask_ & (1u << axis)) == 0; }
  const std::vector<int>& active_axes() const noexcept { return active_; }
  std::uint32_t frozen_mask() const noexcept { return frozen_mask_; }
  bool is_full() const noexcept { return frozen_mask_ == 0; }

  int extent(int axis) const noexcept { return extent_[static_cast<std::size_t>(axis)]; }
  std::size_t stride(int axis) const noexcept { return stride_[static_cast<std::size_t>(axis)]; }

  /// Integer coordinates of a linear index (frozen axes report 0).
  void coords(std::size_t index, std::span<int> out) const;
  /// Real coordinates in [0, 1) of a linear index.
  void position(std::size_t index, std::span<double> out) const;

  /// Volume fraction carried by one stored sample (1 / size()).
  double cell_weight() const noexcept { return 1.0 / static_cast<double>(size_); }

  static std::string axis_name(int axis);

  bool operator==(const TorusGrid& other) const noexcept {
    return n_ == other.n_ && points_ == other.points_ && frozen_mask_ == other.frozen_mask_;
  }

 private:
  void init();

  int n_;
  int points_;
  std::uint32_t frozen_mask_ = 0;
  std::vector<int> active_;
  std::vector<int> extent_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

struct PotentialTag {};
struct DensityTag {};

/// Real scalar field on a torus grid.
template <class Tag>
class ScalarField {
 public:
  explicit ScalarField(TorusGrid grid, double value = 0.0);
  /// Throws DimensionMismatch on size mismatch, InvalidArgument on NaN/Inf.
  ScalarField(TorusGrid grid, std::vector<double> values);

  /// f receives the real coordinates of every stored sample.
  static ScalarField sample(const TorusGrid& grid,
                            const std::function<double(std::span<const double>)>& f);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  template <class Other>
  ScalarField<Other> retag() const {
    return ScalarField<Other>(grid_, values_);
  }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

using GridFunction = ScalarField<PotentialTag>;
using DensityField = ScalarField<DensityTag>;

extern template class ScalarField<PotentialTag>;
extern template class ScalarField<DensityTag>;

/// Field of Hermitian n x n matrices (a real (1,1)-form), packed per point
/// in the layout of khess/point_kernel.hpp.
class FormField {
 public:
  FormField(TorusGrid grid, const HermitianMatrix& constant);
  static FormField identity(const TorusGrid& grid);
  static FormField sample(const TorusGrid& grid,
                          const std::function<HermitianMatrix(std::span<const double>)>& f);

  const TorusGrid& grid() const noexcept { return grid_; }
  int n() const noexcept { return grid_.n(); }
  std::size_t size() const noexcept { return grid_.size(); }

  HermitianMatrix at(std::size_t i) const;
  const double* packed(std::size_t i) const noexcept { return data_.data() + i * stride(); }
  double* packed(std::size_t i) noexcept { return data_.data() + i * stride(); }
  std::span<const double> data() const noexcept { return data_; }

  FormField operator+(const FormField& other) const;
  FormField scaled(double t) const;
  /// omega + t * omega_X
  FormField plus_identity(double t) const;

 private:
  std::size_t stride() const noexcept { return static_cast<std::size_t>(n() * n()); }
  explicit FormField(TorusGrid grid);

  TorusGrid grid_;
  std::vector<double> data_;
};

/// dd^c phi = 2i d dbar phi with second-order central differences.
FormField ddc(const GridFunction& phi);

struct HessianMeasure {
  DensityField density;
  /// grid average of the density, i.e. its integral against omega_X^n
  double total_mass = 0.0;
};

/// Pointwise sigma_k(omega + dd^c phi) / C(n, k).
HessianMeasure hessian_measure(const FormField& omega, const GridFunction& phi, int k);

struct SubharmonicCertificate {
  bool member = false;
  double worst_margin = 0.0;
  std::size_t worst_index = 0;
  std::size_t violations = 0;
  /// per-point worst margin min_j sigma_j / C(n, j)
  std::vector<double> margins;
};

SubharmonicCertificate is_k_subharmonic(const FormField& omega, const GridFunction& phi, int k);

struct FieldNorms {
  double lp = 0.0;
  /// max |f|
  double sup = 0.0;
  double osc = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
};

/// p in [1, inf]; InvalidExponent otherwise.
FieldNorms field_norms(std::span<const double> values, double p);

template <class Tag>
FieldNorms field_norms(const ScalarField<Tag>& f, double p) {
  return field_norms(f.values(), p);
}

GridFunction pointwise_max(const GridFunction& phi, const GridFunction& psi);

/// Points whose whole dd^c stencil lies in {phi > psi}.
std::vector<bool> stencil_interior(const GridFunction& phi, const GridFunction& psi);

/// Grid average with compensated summation.
double grid_mean(std::span<const double> values);

void check_same_grid(const TorusGrid& a, const TorusGrid& b);

}  // namespace khess
