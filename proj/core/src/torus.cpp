#include "khess/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "khess/detail/stencil.hpp"
#include "khess/error.hpp"
#include "khess/parallel.hpp"
#include "khess/point_kernel.hpp"

namespace khess {

// ---------------------------------------------------------------- TorusGrid

TorusGrid::TorusGrid(int n, int points_per_axis) : n_(n), points_(points_per_axis) {
  for (int a = 0; a < 2 * n; ++a) active_.push_back(a);
  init();
}

TorusGrid::TorusGrid(int n, int points_per_axis, std::vector<int> active_axes)
    : n_(n), points_(points_per_axis), active_(std::move(active_axes)) {
  std::sort(active_.begin(), active_.end());
  if (std::adjacent_find(active_.begin(), active_.end()) != active_.end()) {
    throw Error(Errc::InvalidArgument, "duplicate active axis");
  }
  init();
}

void TorusGrid::init() {
  if (n_ < 2 || n_ > kMaxDim) {
    throw Error(Errc::DimensionMismatch, "complex dimension must be in [2, 4]");
  }
  if (points_ < 4 || points_ % 2 != 0) {
    throw Error(Errc::InvalidArgument, "points per axis must be even and >= 4");
  }
  const int axes = 2 * n_;
  frozen_mask_ = (axes >= 32) ? ~0u : ((1u << axes) - 1u);
  for (int a : active_) {
    if (a < 0 || a >= axes) throw Error(Errc::InvalidArgument, "active axis out of range");
    frozen_mask_ &= ~(1u << a);
  }
  extent_.assign(static_cast<std::size_t>(axes), 1);
  stride_.assign(static_cast<std::size_t>(axes), 1);
  for (int a : active_) extent_[static_cast<std::size_t>(a)] = points_;
  std::size_t s = 1;
  for (int a = axes - 1; a >= 0; --a) {
    stride_[static_cast<std::size_t>(a)] = s;
    s *= static_cast<std::size_t>(extent_[static_cast<std::size_t>(a)]);
  }
  size_ = s;
}

void TorusGrid::coords(std::size_t index, std::span<int> out) const {
  for (int a = 0; a < axis_count(); ++a) {
    const auto ia = static_cast<std::size_t>(a);
    out[ia] = static_cast<int>((index / stride_[ia]) % static_cast<std::size_t>(extent_[ia]));
  }
}

void TorusGrid::position(std::size_t index, std::span<double> out) const {
  const double h = spacing();
  for (int a = 0; a < axis_count(); ++a) {
    const auto ia = static_cast<std::size_t>(a);
    out[ia] = h * static_cast<double>((index / stride_[ia]) % static_cast<std::size_t>(extent_[ia]));
  }
}

std::string TorusGrid::axis_name(int axis) {
  return std::string(axis % 2 == 0 ? "x" : "y") + std::to_string(axis / 2 + 1);
}

void check_same_grid(const TorusGrid& a, const TorusGrid& b) {
  if (!(a == b)) throw Error(Errc::DimensionMismatch, "fields live on different grids");
}

// -------------------------------------------------------------- ScalarField

template <class Tag>
ScalarField<Tag>::ScalarField(TorusGrid grid, double value)
    : grid_(std::move(grid)), values_(grid_.size(), value) {
  if (!std::isfinite(value)) throw Error(Errc::InvalidArgument, "non-finite field value");
}

template <class Tag>
ScalarField<Tag>::ScalarField(TorusGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(Errc::DimensionMismatch, "field has " + std::to_string(values_.size()) +
                                             " values for a grid of " + std::to_string(grid_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite field value");
  }
}

template <class Tag>
ScalarField<Tag> ScalarField<Tag>::sample(const TorusGrid& grid,
                                          const std::function<double(std::span<const double>)>& f) {
  std::vector<double> v(grid.size());
  std::array<double, kMaxAxes> x{};
  const std::span<double> xs(x.data(), static_cast<std::size_t>(grid.axis_count()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.position(i, xs);
    v[i] = f(xs);
  }
  return ScalarField(grid, std::move(v));
}

template class ScalarField<PotentialTag>;
template class ScalarField<DensityTag>;

// ---------------------------------------------------------------- FormField

FormField::FormField(TorusGrid grid) : grid_(std::move(grid)) {
  data_.assign(grid_.size() * stride(), 0.0);
}

FormField::FormField(TorusGrid grid, const HermitianMatrix& constant) : FormField(std::move(grid)) {
  if (constant.dim() != n()) throw Error(Errc::DimensionMismatch, "form dimension differs from grid");
  std::vector<double> p(stride());
  kernel::pack(constant, p.data());
  for (std::size_t i = 0; i < size(); ++i) std::copy(p.begin(), p.end(), packed(i));
}

FormField FormField::identity(const TorusGrid& grid) {
  return FormField(grid, HermitianMatrix::identity(grid.n()));
}

FormField FormField::sample(const TorusGrid& grid,
                            const std::function<HermitianMatrix(std::span<const double>)>& f) {
  FormField out(grid);
  std::array<double, kMaxAxes> x{};
  const std::span<double> xs(x.data(), static_cast<std::size_t>(grid.axis_count()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.position(i, xs);
    const auto m = f(xs);
    if (m.dim() != grid.n()) throw Error(Errc::DimensionMismatch, "sampled form has wrong dimension");
    kernel::pack(m, out.packed(i));
  }
  return out;
}

HermitianMatrix FormField::at(std::size_t i) const { return kernel::unpack(packed(i), n()); }

FormField FormField::operator+(const FormField& other) const {
  check_same_grid(grid_, other.grid_);
  FormField out(*this);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += other.data_[i];
  return out;
}

FormField FormField::scaled(double t) const {
  FormField out(*this);
  for (double& v : out.data_) v *= t;
  return out;
}

FormField FormField::plus_identity(double t) const {
  FormField out(*this);
  const auto s = stride();
  for (std::size_t i = 0; i < size(); ++i) {
    for (int j = 0; j < n(); ++j) out.data_[i * s + static_cast<std::size_t>(j)] += t;
  }
  return out;
}

// ---------------------------------------------------------------- operators

namespace detail {

std::vector<StencilTerm> ddc_terms(const TorusGrid& grid) {
  const int n = grid.n();
  std::vector<StencilTerm> terms;
  for (int j = 0; j < n; ++j) {
    for (int a : {2 * j, 2 * j + 1}) {
      if (grid.is_active(a)) terms.push_back({a, a, j, 0.5});
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int l = j + 1; l < n; ++l) {
      const int re = kernel::off_diagonal_offset(n, j, l);
      const int im = re + 1;
      auto add = [&](int a, int b, int slot, double w) {
        if (grid.is_active(a) && grid.is_active(b)) terms.push_back({a, b, slot, w});
      };
      add(2 * j, 2 * l, re, 0.5);
      add(2 * j + 1, 2 * l + 1, re, 0.5);
      add(2 * j, 2 * l + 1, im, 0.5);
      add(2 * j + 1, 2 * l, im, -0.5);
    }
  }
  return terms;
}

}  // namespace detail

FormField ddc(const GridFunction& phi) {
  const auto& grid = phi.grid();
  FormField out = FormField::identity(grid).scaled(0.0);
  const auto terms = detail::ddc_terms(grid);
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const double* v = phi.values().data();
  parallel_blocks(grid.size(), [&](std::size_t begin, std::size_t end) {
    detail::walk(grid, begin, end, [&](std::size_t i, const detail::Neighbors& nb) {
      double* p = out.packed(i);
      for (const auto& t : terms) {
        p[t.slot] += t.weight * detail::second_difference(v, i, nb, t.a, t.b, inv_h2);
      }
    });
  });
  return out;
}

HessianMeasure hessian_measure(const FormField& omega, const GridFunction& phi, int k) {
  check_same_grid(omega.grid(), phi.grid());
  const int n = omega.n();
  if (k < 1 || k > n) throw Error(Errc::DimensionMismatch, "degree k outside [1, n]");
  const FormField form = omega + ddc(phi);
  const double norm = binomial(n, k);
  std::vector<double> density(form.size());
  parallel_blocks(form.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      density[i] = kernel::sigma_packed(form.packed(i), n, k)[static_cast<std::size_t>(k)] / norm;
    }
  });
  HessianMeasure out{DensityField(phi.grid(), std::move(density)), 0.0};
  out.total_mass = grid_mean(out.density.values());
  return out;
}

SubharmonicCertificate is_k_subharmonic(const FormField& omega, const GridFunction& phi, int k) {
  check_same_grid(omega.grid(), phi.grid());
  const int n = omega.n();
  if (k < 1 || k > n) throw Error(Errc::DimensionMismatch, "degree k outside [1, n]");
  const FormField form = omega + ddc(phi);
  SubharmonicCertificate cert;
  cert.margins.resize(form.size());
  parallel_blocks(form.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      cert.margins[i] = kernel::worst_margin(kernel::sigma_packed(form.packed(i), n, k), n, k);
    }
  });
  cert.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cert.margins.size(); ++i) {
    if (cert.margins[i] < cert.worst_margin) {
      cert.worst_margin = cert.margins[i];
      cert.worst_index = i;
    }
    if (!(cert.margins[i] > 0.0)) ++cert.violations;
  }
  cert.member = cert.violations == 0;
  return cert;
}

double grid_mean(std::span<const double> values) {
  // Neumaier summation
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    comp += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return values.empty() ? 0.0 : (sum + comp) / static_cast<double>(values.size());
}

FieldNorms field_norms(std::span<const double> values, double p) {
  if (!(p >= 1.0)) throw Error(Errc::InvalidExponent, "exponent p must be >= 1");
  FieldNorms out;
  if (values.empty()) return out;
  out.max = *std::max_element(values.begin(), values.end());
  out.min = *std::min_element(values.begin(), values.end());
  out.osc = out.max - out.min;
  out.sup = std::max(std::abs(out.max), std::abs(out.min));
  out.mean = grid_mean(values);
  if (std::isinf(p)) {
    out.lp = out.sup;
  } else {
    std::vector<double> powered(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) powered[i] = std::pow(std::abs(values[i]), p);
    out.lp = std::pow(grid_mean(powered), 1.0 / p);
  }
  return out;
}

GridFunction pointwise_max(const GridFunction& phi, const GridFunction& psi) {
  check_same_grid(phi.grid(), psi.grid());
  GridFunction out(phi);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(phi[i], psi[i]);
  return out;
}

std::vector<bool> stencil_interior(const GridFunction& phi, const GridFunction& psi) {
  check_same_grid(phi.grid(), psi.grid());
  const auto& grid = phi.grid();
  const auto terms = detail::ddc_terms(grid);
  std::vector<bool> mask(grid.size(), false);
  auto above = [&](std::ptrdiff_t j) {
    const auto u = static_cast<std::size_t>(j);
    return phi[u] > psi[u];
  };
  detail::walk(grid, 0, grid.size(), [&](std::size_t i, const detail::Neighbors& nb) {
    const auto p = static_cast<std::ptrdiff_t>(i);
    bool inside = above(p);
    for (const auto& t : terms) {
      if (!inside) break;
      const auto a = static_cast<std::size_t>(t.a);
      const auto b = static_cast<std::size_t>(t.b);
      if (t.a == t.b) {
        inside = above(p + nb.plus[a]) && above(p + nb.minus[a]);
      } else {
        inside = above(p + nb.plus[a] + nb.plus[b]) && above(p + nb.plus[a] + nb.minus[b]) &&
                 above(p + nb.minus[a] + nb.plus[b]) && above(p + nb.minus[a] + nb.minus[b]);
      }
    }
    mask[i] = inside;
  });
  return mask;
}

}  // namespace khess
