#pragma once

// Central-difference stencils of dd^c on a torus grid. Internal.

#include <array>
#include <cstddef>
#include <vector>

#include "khess/torus.hpp"

namespace khess::detail {

/// One second difference D_ab feeding packed Hermitian slot `slot` with
/// weight `weight`. a == b for pure differences.
struct StencilTerm {
  int a;
  int b;
  int slot;
  double weight;
};

/// Terms of dd^c restricted to the active axes. Pairs (x_j, y_j) never
/// appear: their contributions cancel in the imaginary diagonal part.
std::vector<StencilTerm> ddc_terms(const TorusGrid& grid);

struct Neighbors {
  std::array<std::ptrdiff_t, kMaxAxes> plus{};
  std::array<std::ptrdiff_t, kMaxAxes> minus{};
};

inline void set_axis(const TorusGrid& g, int axis, int c, Neighbors& nb) noexcept {
  const auto ext = g.extent(axis);
  const auto s = static_cast<std::ptrdiff_t>(g.stride(axis));
  nb.plus[static_cast<std::size_t>(axis)] = (c == ext - 1) ? -(ext - 1) * s : s;
  nb.minus[static_cast<std::size_t>(axis)] = (c == 0) ? (ext - 1) * s : -s;
}

/// Calls f(index, neighbors) for index in [begin, end) in storage order.
template <class F>
void walk(const TorusGrid& g, std::size_t begin, std::size_t end, F&& f) {
  if (begin >= end) return;
  const int axes = g.axis_count();
  std::array<int, kMaxAxes> c{};
  g.coords(begin, std::span<int>(c.data(), static_cast<std::size_t>(axes)));
  Neighbors nb;
  for (int a = 0; a < axes; ++a) set_axis(g, a, c[static_cast<std::size_t>(a)], nb);
  for (std::size_t i = begin; i < end; ++i) {
    f(i, static_cast<const Neighbors&>(nb));
    for (int a = axes - 1; a >= 0; --a) {
      auto& ca = c[static_cast<std::size_t>(a)];
      if (g.extent(a) == 1) continue;
      if (++ca < g.extent(a)) {
        set_axis(g, a, ca, nb);
        break;
      }
      ca = 0;
      set_axis(g, a, ca, nb);
    }
  }
}

inline double second_difference(const double* v, std::size_t i, const Neighbors& nb, int a, int b,
                                 double inv_h2) noexcept {
  const auto ia = static_cast<std::size_t>(a);
  const auto ib = static_cast<std::size_t>(b);
  const auto p = static_cast<std::ptrdiff_t>(i);
  if (a == b) {
    return (v[p + nb.plus[ia]] - 2.0 * v[p] + v[p + nb.minus[ia]]) * inv_h2;
  }
  return (v[p + nb.plus[ia] + nb.plus[ib]] - v[p + nb.plus[ia] + nb.minus[ib]] -
          v[p + nb.minus[ia] + nb.plus[ib]] + v[p + nb.minus[ia] + nb.minus[ib]]) *
         (0.25 * inv_h2);
}

}  // namespace khess::detail
