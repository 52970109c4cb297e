#pragma once

// Tensor-product evaluation of the forward-difference interpolant A f and
// its partial derivatives, plus the finite-difference operators it is
// bounded by.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "jsqstein/lattice/grid_function.hpp"
#include "jsqstein/lattice/weights.hpp"

namespace jsqstein::lattice {

namespace detail {

inline std::int64_t binomial_i64(unsigned n, unsigned k) {
  std::int64_t r = 1;
  for (unsigned j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

// Calls fn(offset) for every offset with 0 <= offset_j <= extent_j.
template <std::size_t D, class Fn>
void for_each_offset(const std::array<unsigned, D>& extent, Fn&& fn) {
  Index<D> m{};
  while (true) {
    fn(static_cast<const Index<D>&>(m));
    std::size_t j = 0;
    for (; j < D; ++j) {
      if (m[j] < static_cast<std::int64_t>(extent[j])) {
        ++m[j];
        break;
      }
      m[j] = 0;
    }
    if (j == D) return;
  }
}

template <std::size_t D>
Index<D> add(const Index<D>& a, const Index<D>& b) {
  Index<D> r{};
  for (std::size_t j = 0; j < D; ++j) r[j] = a[j] + b[j];
  return r;
}

}  // namespace detail

/// Cell containing x: anchor k(x) = floor(x / delta) and local coordinates t in [0,1).
///
/// Coordinates within 1e-12 (relative) of a knot snap onto it, so lattice
/// points always land at t = 0 in the right-hand cell.
template <std::size_t D>
struct Cell {
  Index<D> anchor{};
  Point<D> t{};
  std::array<bool, D> on_knot{};

  bool on_lattice() const {
    for (bool b : on_knot)
      if (!b) return false;
    return true;
  }
};

template <std::size_t D>
Cell<D> locate(const Point<D>& x, double delta) {
  Cell<D> c;
  for (std::size_t j = 0; j < D; ++j) {
    if (!std::isfinite(x[j])) throw std::invalid_argument("non-finite evaluation point");
    const double r = x[j] / delta;
    const double nearest = std::round(r);
    if (std::abs(r - nearest) <= 1e-12 * std::max(1.0, std::abs(r))) {
      c.anchor[j] = static_cast<std::int64_t>(nearest);
      c.t[j] = 0.0;
      c.on_knot[j] = true;
    } else {
      const double fl = std::floor(r);
      c.anchor[j] = static_cast<std::int64_t>(fl);
      c.t[j] = r - fl;
      c.on_knot[j] = false;
    }
  }
  return c;
}

/// Iterated forward difference D_1^{a_1} ... D_d^{a_d} f(delta k).
template <std::size_t D, LatticeFunction<D> F>
double finite_diff(const F& f, const MultiIndex<D>& a, const Index<D>& k) {
  double sum = 0.0;
  bool inside = true;
  detail::for_each_offset<D>(a, [&](const Index<D>& m) {
    if (!f.contains(detail::add<D>(k, m))) inside = false;
  });
  if (!inside) {
    throw StencilError("difference stencil at " + format_index<D>(k) + " leaves the domain");
  }
  detail::for_each_offset<D>(a, [&](const Index<D>& m) {
    double coeff = 1.0;
    for (std::size_t j = 0; j < D; ++j) {
      const unsigned mj = static_cast<unsigned>(m[j]);
      const double sign = ((a[j] - mj) % 2 == 0) ? 1.0 : -1.0;
      coeff *= sign * static_cast<double>(detail::binomial_i64(a[j], mj));
    }
    sum += coeff * f(detail::add<D>(k, m));
  });
  return sum;
}

/// True when every point of the 5^D stencil anchored at k lies in the domain of f.
template <std::size_t D, LatticeFunction<D> F>
bool stencil_inside(const F& f, const Index<D>& anchor) {
  std::array<unsigned, D> four{};
  four.fill(4);
  bool inside = true;
  detail::for_each_offset<D>(four, [&](const Index<D>& i) {
    if (inside && !f.contains(detail::add<D>(anchor, i))) inside = false;
  });
  return inside;
}

/// sum_i prod_j w_j[i_j] f(anchor + i) over the 5^D stencil.
template <std::size_t D, LatticeFunction<D> F>
double tensor_sum(const F& f, const Index<D>& anchor,
                  const std::array<std::array<double, kWeightCount>, D>& w) {
  std::array<unsigned, D> four{};
  four.fill(4);
  double sum = 0.0;
  detail::for_each_offset<D>(four, [&](const Index<D>& i) {
    double coeff = 1.0;
    for (std::size_t j = 0; j < D && coeff != 0.0; ++j) coeff *= w[j][static_cast<std::size_t>(i[j])];
    if (coeff != 0.0) sum += coeff * f(detail::add<D>(anchor, i));
  });
  return sum;
}

/// Cell polynomial anchored at `anchor`, differentiated a_j times along each
/// axis, evaluated at local coordinates t (not restricted to [0,1)).
template <std::size_t D, LatticeFunction<D> F>
double cell_polynomial(const F& f, const Index<D>& anchor, const Point<D>& t,
                       const MultiIndex<D>& a) {
  if (!stencil_inside<D>(f, anchor)) {
    throw StencilError("interpolation stencil at " + format_index<D>(anchor) +
                       " leaves the domain");
  }
  std::array<std::array<double, kWeightCount>, D> w{};
  const double inv = 1.0 / f.spacing();
  for (std::size_t j = 0; j < D; ++j) {
    w[j] = weights_at(t[j], a[j]);
    const double scale = std::pow(inv, static_cast<int>(a[j]));
    for (double& v : w[j]) v *= scale;
  }
  return tensor_sum<D>(f, anchor, w);
}

/// A f(x). Throws StencilError if x is outside Conv(K_4) of the domain.
template <std::size_t D, LatticeFunction<D> F>
double interp_eval(const F& f, const Point<D>& x) {
  const Cell<D> c = locate<D>(x, f.spacing());
  return cell_polynomial<D>(f, c.anchor, c.t, MultiIndex<D>{});
}

/// Partial derivative d^a A f(x) of total order at most 4.
///
/// On knot hyperplanes the right-hand (forward) cell is used; orders up to 3
/// agree from both sides there. Order 4 at a lattice point is rejected.
template <std::size_t D, LatticeFunction<D> F>
double interp_derivative(const F& f, const Point<D>& x, const MultiIndex<D>& a) {
  const unsigned total = order<D>(a);
  if (total > 4) throw std::invalid_argument("derivative order above 4 is not supported");
  const Cell<D> c = locate<D>(x, f.spacing());
  if (total == 4 && c.on_lattice()) {
    throw std::domain_error("fourth-order derivative is undefined at lattice points");
  }
  return cell_polynomial<D>(f, c.anchor, c.t, a);
}

/// Jump of the order-v derivative along axis j across the knot hyperplane
/// through x (x_j must be a knot). Left cell evaluated at t_j = 1, right cell at t_j = 0.
template <std::size_t D, LatticeFunction<D> F>
double smoothness_gap(const F& f, const Point<D>& x, std::size_t direction, unsigned v) {
  if (direction >= D) throw std::invalid_argument("direction out of range");
  const Cell<D> c = locate<D>(x, f.spacing());
  if (!c.on_knot[direction]) throw std::invalid_argument("point is not on a knot in this direction");
  Index<D> left = c.anchor;
  left[direction] -= 1;
  Point<D> t_left = c.t;
  t_left[direction] = 1.0;
  if (!stencil_inside<D>(f, left) || !stencil_inside<D>(f, c.anchor)) {
    throw StencilError("knot " + format_index<D>(c.anchor) + " is on the domain boundary");
  }
  MultiIndex<D> a{};
  a[direction] = v;
  return cell_polynomial<D>(f, c.anchor, c.t, a) - cell_polynomial<D>(f, left, t_left, a);
}

/// Derivative of A f at a lattice point along axis j from differences alone:
/// delta^{-1} (D_j - D_j^2 / 2 + D_j^3 / 3) f(delta k).
template <std::size_t D, LatticeFunction<D> F>
double knot_derivative(const F& f, const Index<D>& k, std::size_t direction) {
  MultiIndex<D> a{};
  a[direction] = 1;
  const double d1 = finite_diff<D>(f, a, k);
  a[direction] = 2;
  const double d2 = finite_diff<D>(f, a, k);
  a[direction] = 3;
  const double d3 = finite_diff<D>(f, a, k);
  return (d1 - 0.5 * d2 + d3 / 3.0) / f.spacing();
}

/// sup over 0 <= i_j <= 4 - a_j of |D^a f(delta (k + i))|: the right-hand side
/// of the derivative-difference bound, without the constant.
template <std::size_t D, LatticeFunction<D> F>
double stencil_difference_sup(const F& f, const Index<D>& anchor, const MultiIndex<D>& a) {
  std::array<unsigned, D> extent{};
  for (std::size_t j = 0; j < D; ++j) extent[j] = 4 - a[j];
  double sup = 0.0;
  detail::for_each_offset<D>(extent, [&](const Index<D>& i) {
    sup = std::max(sup, std::abs(finite_diff<D>(f, a, detail::add<D>(anchor, i))));
  });
  return sup;
}

}  // namespace jsqstein::lattice
