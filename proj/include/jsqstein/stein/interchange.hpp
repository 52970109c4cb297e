#pragma once

// Interpolated Poisson equation on the slice {x_3 = ... = 0} and the
// comparison of A G_X f_h with the generator acting on the interpolant.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsqstein/chain/analysis.hpp"
#include "jsqstein/diffusion/engine.hpp"
#include "jsqstein/lattice/clipped_extension.hpp"
#include "jsqstein/lattice/interpolate.hpp"
#include "jsqstein/stein/instance.hpp"

namespace jsqstein::stein {

using lattice::GridFunction;
using lattice::Index;

/// Grids derived from one Instance. Slice index (k1, k2) <-> q = (n - k1, k2, 0, ...).
class SliceContext {
 public:
  static constexpr std::int64_t kPad = 12;

  explicit SliceContext(const Instance& inst)
      : inst_(&inst),
        gx_(make_gx(inst)),
        fbar_(chain::slice_grid(*inst.space, inst.sol.f, kPad)),
        fhat_(lattice::clipped_extension(fbar_, 1)),
        hext_(make_h(inst)) {
    if (inst.space->levels() < 2) throw std::invalid_argument("slice computations need b >= 1");
  }

  const Instance& instance() const { return *inst_; }
  const ModelParams& params() const { return inst_->params; }
  double delta() const { return inst_->params.delta(); }
  const GridFunction<2>& gx() const { return gx_; }
  const GridFunction<2>& fbar() const { return fbar_; }
  const GridFunction<2>& fhat() const { return fhat_; }
  const GridFunction<2>& h_extended() const { return hext_; }

  /// Throws unless x lies in R^2_+ with x1 + x2 <= delta (n - 8).
  void check_wedge(double x1, double x2) const {
    const double lim = delta() * (params().n - 8);
    if (!(x1 >= 0.0) || !(x2 >= 0.0) || x1 + x2 > lim * (1 + 1e-12)) {
      throw std::domain_error("point (" + std::to_string(x1) + ", " + std::to_string(x2) +
                              ") outside the admissible wedge x1 + x2 <= " + std::to_string(lim));
    }
  }

 private:
  static GridFunction<2> make_gx(const Instance& inst) {
    const std::int64_t n = inst.params.n;
    GridFunction<2> g(inst.params.delta(), {0, 0}, {n, n},
                      [n](const Index<2>& k) { return k[0] + k[1] <= n; });
    g.for_each_index([&](const Index<2>& k) {
      g.set(k, inst.G->apply(inst.sol.f, inst.space->index(chain::slice_state(*inst.space, k[0], k[1]))));
    });
    return g;
  }

  static GridFunction<2> make_h(const Instance& inst) {
    const double d = inst.params.delta();
    const std::int64_t top = inst.params.n + kPad;
    std::vector<double> x(inst.space->levels(), 0.0);
    return GridFunction<2>::tabulate(d, {0, 0}, {top, top}, [&](const Index<2>& k) {
      x[0] = d * static_cast<double>(k[0]);
      x[1] = d * static_cast<double>(k[1]);
      return chain::evaluate_test_function(inst.h, x, inst.params.beta);
    });
  }

  const Instance* inst_;
  GridFunction<2> gx_;
  GridFunction<2> fbar_;
  GridFunction<2> fhat_;
  GridFunction<2> hext_;
};

/// A G_X f_h(x1, x2, 0, ...).
inline double interp_poisson_lhs(const SliceContext& c, double x1, double x2) {
  c.check_wedge(x1, x2);
  return lattice::interp_eval<2>(c.gx(), {x1, x2});
}

namespace detail {

// A f_hat at x shifted by whole lattice steps.
inline double shifted(const SliceContext& c, const lattice::Cell<2>& cell, std::int64_t s1, std::int64_t s2) {
  return lattice::cell_polynomial<2>(c.fhat(), {cell.anchor[0] + s1, cell.anchor[1] + s2}, cell.t, {0, 0});
}

}  // namespace detail

/// n lambda (A f(x - d e1) - A f(x)) + (d n - x1 - x2)/d (A f(x + d e1) - A f(x))
///   + x2/d (A f(x - d e2) - A f(x)),  with f the clipped extension of f_h.
inline double interchange_rhs(const SliceContext& c, double x1, double x2) {
  c.check_wedge(x1, x2);
  const double d = c.delta();
  const auto cell = lattice::locate<2>({x1, x2}, d);
  const double f0 = detail::shifted(c, cell, 0, 0);
  const double n = c.params().n;
  return c.params().arrival_rate() * (detail::shifted(c, cell, -1, 0) - f0) +
         (d * n - x1 - x2) / d * (detail::shifted(c, cell, 1, 0) - f0) +
         x2 / d * (detail::shifted(c, cell, 0, -1) - f0);
}

/// E(x) = lhs - rhs.
inline double interchange_error(const SliceContext& c, double x1, double x2) {
  return interp_poisson_lhs(c, x1, x2) - interchange_rhs(c, x1, x2);
}

struct SliceRate {
  std::int64_t l1 = 0;
  std::int64_t l2 = 0;
  double rate = 0.0;
};

/// Jumps of the slice chain from an interior slice point (k1 >= 1): one
/// arrival lowering k1, departures raising k1 and lowering k2.
inline std::array<SliceRate, 3> interior_slice_rates(const ModelParams& p, std::int64_t k1, std::int64_t k2) {
  if (k1 < 1) throw std::domain_error("interior slice rates need k1 >= 1");
  return {SliceRate{-1, 0, p.arrival_rate()}, SliceRate{1, 0, static_cast<double>(p.n - k1 - k2)},
          SliceRate{0, -1, static_cast<double>(k2)}};
}

/// Recentered interchange residual at a point whose cell anchor has k1, k2 >= 1:
/// sum over jumps l and stencil i of alpha_i(x) (beta_l(k+i) - A beta_l(x))
///   (f(k+i+l) - f(k+i) - (f(k+l) - f(k))).
inline double interchange_epsilon(const SliceContext& c, double x1, double x2) {
  c.check_wedge(x1, x2);
  const auto cell = lattice::locate<2>({x1, x2}, c.delta());
  const auto k = cell.anchor;
  if (k[0] < 1 || k[1] < 1) throw std::domain_error("epsilon form needs an interior cell (k1, k2 >= 1)");
  const auto w1 = lattice::weights_at(cell.t[0]);
  const auto w2 = lattice::weights_at(cell.t[1]);
  const auto& f = c.fhat();
  double eps = 0.0;
  for (std::size_t l = 0; l < 3; ++l) {
    double abeta = 0.0;
    for (std::int64_t i1 = 0; i1 < 5; ++i1)
      for (std::int64_t i2 = 0; i2 < 5; ++i2)
        abeta += w1[i1] * w2[i2] * interior_slice_rates(c.params(), k[0] + i1, k[1] + i2)[l].rate;
    const auto jump = interior_slice_rates(c.params(), k[0], k[1])[l];
    const double base = f({k[0] + jump.l1, k[1] + jump.l2}) - f(k);
    for (std::int64_t i1 = 0; i1 < 5; ++i1)
      for (std::int64_t i2 = 0; i2 < 5; ++i2) {
        const Index<2> ki{k[0] + i1, k[1] + i2};
        const double r = interior_slice_rates(c.params(), ki[0], ki[1])[l].rate;
        eps += w1[i1] * w2[i2] * (r - abeta) * (f({ki[0] + jump.l1, ki[1] + jump.l2}) - f(ki) - base);
      }
  }
  return eps;
}

struct ErrorTemplate {
  double second = 0.0;        // sup |D^a f_hat|, |a| = 2, near k v 1
  double fourth_h = 0.0;      // sup |D_j^4 h| near k
  double fourth_f = 0.0;      // sup |D_j^4 f_hat| near k
  double boundary = 0.0;      // 1(x1 in [0,d]) + 1(x2 in [0,d])
  double value = 0.0;         // second + boundary (fourth_h + n fourth_f)
};

/// The three supremum terms bounding |E(x)| (up to a universal constant).
inline ErrorTemplate error_template(const SliceContext& c, double x1, double x2) {
  c.check_wedge(x1, x2);
  const double d = c.delta();
  const auto k = lattice::locate<2>({x1, x2}, d).anchor;
  ErrorTemplate t;
  const Index<2> k1v{std::max<std::int64_t>(k[0], 1), std::max<std::int64_t>(k[1], 1)};
  for (std::int64_t i1 = 0; i1 <= 4; ++i1)
    for (std::int64_t i2 = -1; i2 <= 4; ++i2)
      for (const lattice::MultiIndex<2>& a : {lattice::MultiIndex<2>{2, 0}, {1, 1}, {0, 2}})
        t.second = std::max(t.second, std::abs(lattice::finite_diff<2>(c.fhat(), a, {k1v[0] + i1, k1v[1] + i2})));
  t.boundary = (x1 <= d ? 1.0 : 0.0) + (x2 <= d ? 1.0 : 0.0);
  if (t.boundary > 0) {
    for (std::int64_t i1 = 0; i1 <= 5; ++i1)
      for (std::int64_t i2 = 0; i2 <= 5; ++i2)
        for (const lattice::MultiIndex<2>& a : {lattice::MultiIndex<2>{4, 0}, {0, 4}})
          t.fourth_h = std::max(t.fourth_h, std::abs(lattice::finite_diff<2>(c.h_extended(), a, {k[0] + i1, k[1] + i2})));
    for (std::int64_t i1 = -1; i1 <= 6; ++i1)
      for (std::int64_t i2 = -1; i2 <= 6; ++i2)
        for (const lattice::MultiIndex<2>& a : {lattice::MultiIndex<2>{4, 0}, {0, 4}})
          t.fourth_f = std::max(t.fourth_f, std::abs(lattice::finite_diff<2>(c.fhat(), a, {k[0] + i1, k[1] + i2})));
  }
  t.value = t.second + t.boundary * (t.fourth_h + c.params().n * t.fourth_f);
  return t;
}

/// A G_X f_h(x) - G_Y A f_h(x) on B = {x1 + x2 <= d n / 2}.
inline double gy_gap(const SliceContext& c, double x1, double x2) {
  const double d = c.delta();
  const double n = c.params().n;
  if (!(x1 >= 0.0) || !(x2 >= 0.0) || x1 + x2 > d * n / 2 * (1 + 1e-12)) {
    throw std::domain_error("gy_gap: point outside B = {x1 + x2 <= delta n / 2}");
  }
  if (n / 2 > n - 8) throw std::domain_error("gy_gap needs n >= 16 so that B lies in the wedge");
  return interp_poisson_lhs(c, x1, x2) - diffusion::apply_gy_interp(c.fbar(), c.params().beta, x1, x2);
}

/// delta (1 + x2)^3 + delta x1 (1 + x2)^2.
inline double gy_gap_template(double delta, double x1, double x2) {
  return delta * std::pow(1 + x2, 3) + delta * x1 * (1 + x2) * (1 + x2);
}

struct GridPoint {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// m x m points spanning [0, top]^2, endpoints included.
inline std::vector<GridPoint> square_grid(double top, std::size_t m) {
  std::vector<GridPoint> g;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double s = m > 1 ? top / static_cast<double>(m - 1) : 0.0;
      g.push_back({s * static_cast<double>(i), s * static_cast<double>(j)});
    }
  return g;
}

/// Smallest C with |value| <= C template, or +inf if the template vanishes where the value does not.
struct ConstantFit {
  double constant = 0.0;
  double worst_x1 = 0.0;
  double worst_x2 = 0.0;
  std::size_t points = 0;

  void add(double value, double tmpl, double x1, double x2, double tol = 1e-12) {
    ++points;
    const double v = std::abs(value);
    double r = 0.0;
    if (tmpl > 0.0) {
      r = v / tmpl;
    } else if (v > tol) {
      r = std::numeric_limits<double>::infinity();
    }
    if (r > constant) {
      constant = r;
      worst_x1 = x1;
      worst_x2 = x2;
    }
  }
};

}  // namespace jsqstein::stein
