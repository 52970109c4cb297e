#pragma once

// Randomized property checks of the interpolant: lattice exactness, cubic
// reproduction, C^3 smoothness across knots (with an order-4 negative control)
// and the weight identities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "jsqstein/lattice/grid_function.hpp"
#include "jsqstein/lattice/interpolate.hpp"
#include "jsqstein/lattice/weights.hpp"
#include "jsqstein/util/csv.hpp"
#include "jsqstein/util/rng.hpp"

namespace jsqstein::lattice {

struct CheckResult {
  std::string check;
  int d = 0;
  double delta = 0.0;
  std::size_t trials = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace suite {

template <std::size_t D>
GridFunction<D> random_grid(util::Stream& rng, double delta, std::int64_t extent) {
  Index<D> hi{};
  hi.fill(extent);
  return GridFunction<D>::tabulate(delta, Index<D>{}, hi, [&](const Index<D>&) { return 2 * rng.uniform() - 1; });
}

struct Cubic {
  // sum over monomials x1^p x2^q with p + q <= 3 (2-d) or x^p (1-d)
  std::vector<double> c;

  template <std::size_t D>
  double operator()(const Point<D>& x) const {
    double s = 0.0;
    std::size_t m = 0;
    for (int p = 0; p <= 3; ++p)
      for (int q = 0; q + p <= 3; ++q) {
        if (D == 1 && q > 0) continue;
        const double x2 = D > 1 ? x[D - 1] : 1.0;
        s += c[m++] * std::pow(x[0], p) * (q ? std::pow(x2, q) : 1.0);
      }
    return s;
  }
};

inline Cubic random_cubic(util::Stream& rng) {
  Cubic p;
  for (int i = 0; i < 10; ++i) p.c.push_back(2 * rng.uniform() - 1);
  return p;
}

template <std::size_t D>
double scale_of(const GridFunction<D>& f) {
  double m = 0.0;
  f.for_each_index([&](const Index<D>& k) { m = std::max(m, std::abs(f(k))); });
  return std::max(m, 1.0);
}

template <std::size_t D>
CheckResult exactness(util::Stream& rng, double delta, std::size_t functions) {
  CheckResult r{"lattice_exactness", static_cast<int>(D), delta, functions, 0.0, 1e-12, false};
  const std::int64_t extent = D == 1 ? 16 : 9;
  for (std::size_t t = 0; t < functions; ++t) {
    const auto f = random_grid<D>(rng, delta, extent);
    const double s = scale_of(f);
    f.for_each_index([&](const Index<D>& k) {
      if (!stencil_inside<D>(f, k)) return;
      r.max_error = std::max(r.max_error, std::abs(interp_eval<D>(f, f.point(k)) - f(k)) / s);
    });
  }
  r.pass = r.max_error <= r.tolerance;
  return r;
}

template <std::size_t D>
CheckResult cubic_reproduction(util::Stream& rng, double delta, std::size_t points) {
  CheckResult r{"cubic_reproduction", static_cast<int>(D), delta, points, 0.0, 1e-10, false};
  const std::int64_t extent = 10;
  for (std::size_t t = 0; t < points; ++t) {
    const Cubic p = random_cubic(rng);
    Index<D> hi{};
    hi.fill(extent);
    const auto f = GridFunction<D>::tabulate(delta, Index<D>{}, hi, [&](const Index<D>& k) {
      Point<D> x{};
      for (std::size_t j = 0; j < D; ++j) x[j] = delta * static_cast<double>(k[j]);
      return p(x);
    });
    Point<D> x{};
    for (std::size_t j = 0; j < D; ++j) x[j] = delta * (extent - 4) * rng.uniform();
    const double truth = p(x);
    r.max_error = std::max(r.max_error, std::abs(interp_eval<D>(f, x) - truth) / std::max(1.0, std::abs(truth)));
  }
  r.pass = r.max_error <= r.tolerance;
  return r;
}

/// Relative gaps |left - right| / max(1, |left|, |right|) of order-v derivatives
/// at every interior knot along every axis.
template <std::size_t D>
std::vector<double> knot_gaps(const GridFunction<D>& f, unsigned v) {
  std::vector<double> out;
  f.for_each_index([&](const Index<D>& k) {
    for (std::size_t j = 0; j < D; ++j) {
      Index<D> left = k;
      left[j] -= 1;
      if (!f.contains(left) || !stencil_inside<D>(f, left) || !stencil_inside<D>(f, k)) continue;
      const Point<D> x = f.point(k);
      MultiIndex<D> a{};
      a[j] = v;
      Point<D> t_left{};
      t_left[j] = 1.0;
      const double right = cell_polynomial<D>(f, k, Point<D>{}, a);
      const double lft = cell_polynomial<D>(f, left, t_left, a);
      out.push_back(std::abs(smoothness_gap<D>(f, x, j, v)) / std::max({1.0, std::abs(right), std::abs(lft)}));
    }
  });
  return out;
}

template <std::size_t D>
std::vector<CheckResult> smoothness(util::Stream& rng, double delta, std::size_t functions) {
  std::vector<CheckResult> rs;
  std::vector<GridFunction<D>> fs;
  for (std::size_t t = 0; t < functions; ++t) fs.push_back(random_grid<D>(rng, delta, D == 1 ? 16 : 10));
  for (unsigned v = 0; v <= 3; ++v) {
    CheckResult r{"c3_order_" + std::to_string(v), static_cast<int>(D), delta, functions, 0.0, 1e-8, false};
    for (const auto& f : fs)
      for (double g : knot_gaps<D>(f, v)) r.max_error = std::max(r.max_error, g);
    r.pass = r.max_error <= r.tolerance;
    rs.push_back(r);
  }
  // Negative control: order-4 jumps are generically nonzero. max_error holds
  // the fraction of knots whose jump stays below 1e-6 (relative).
  CheckResult neg{"order4_jump_present", static_cast<int>(D), delta, functions, 0.0, 0.05, false};
  std::size_t total = 0, flat = 0;
  for (const auto& f : fs)
    for (double g : knot_gaps<D>(f, 4)) {
      ++total;
      if (g < 1e-6) ++flat;
    }
  neg.max_error = total ? static_cast<double>(flat) / static_cast<double>(total) : 1.0;
  neg.pass = total > 0 && neg.max_error <= neg.tolerance;
  rs.push_back(neg);
  return rs;
}

}  // namespace suite

/// Weight identities: |sum_i J_i(t) - 1| at `points` random t in [0,1), and J_i(0) = 1(i = 0) exactly.
inline std::vector<CheckResult> weight_checks(util::Stream& rng, std::size_t points) {
  CheckResult sum{"weights_sum_to_one", 1, 1.0, points, 0.0, 1e-12, false};
  for (std::size_t k = 0; k < points; ++k) {
    const auto w = weights_at(rng.uniform());
    double s = 0.0;
    for (double v : w) s += v;
    sum.max_error = std::max(sum.max_error, std::abs(s - 1.0));
  }
  sum.pass = sum.max_error <= sum.tolerance;
  CheckResult zero{"weights_interpolate_at_zero", 1, 1.0, kWeightCount, 0.0, 0.0, false};
  for (std::size_t i = 0; i < kWeightCount; ++i)
    zero.max_error = std::max(zero.max_error, std::abs(weight_eval(i, 0.0) - (i == 0 ? 1.0 : 0.0)));
  zero.pass = zero.max_error == 0.0;
  return {sum, zero};
}

/// The full suite over d in {1, 2} and delta in {1, 0.1}. `functions` random
/// grid functions per (d, delta) for exactness, `points` random cubics per
/// (d, delta), `smooth_functions` per (d, delta) for the knot checks.
inline std::vector<CheckResult> interpolation_property_suite(std::uint64_t seed, std::size_t functions = 250,
                                                             std::size_t points = 100,
                                                             std::size_t smooth_functions = 20,
                                                             std::size_t weight_points = 1000) {
  std::vector<CheckResult> out;
  std::uint64_t stream = 0;
  for (double delta : {1.0, 0.1}) {
    util::Stream r1(seed, stream++), r2(seed, stream++), r3(seed, stream++), r4(seed, stream++);
    out.push_back(suite::exactness<1>(r1, delta, functions));
    out.push_back(suite::exactness<2>(r2, delta, functions));
    out.push_back(suite::cubic_reproduction<1>(r3, delta, points));
    out.push_back(suite::cubic_reproduction<2>(r4, delta, points));
    util::Stream r5(seed, stream++), r6(seed, stream++);
    for (auto& r : suite::smoothness<1>(r5, delta, smooth_functions)) out.push_back(r);
    for (auto& r : suite::smoothness<2>(r6, delta, smooth_functions)) out.push_back(r);
  }
  util::Stream rw(seed, stream++);
  for (auto& r : weight_checks(rw, weight_points)) out.push_back(r);
  return out;
}

inline std::vector<std::string> check_header() {
  return {"check", "d", "delta", "trials", "max_error", "tolerance", "pass"};
}

inline void append_check_rows(util::CsvWriter& w, const std::vector<CheckResult>& rows) {
  for (const auto& r : rows) {
    w << r.check << r.d << r.delta << static_cast<unsigned long long>(r.trials) << r.max_error << r.tolerance
      << (r.pass ? 1 : 0);
    w.end_row();
  }
}

}  // namespace jsqstein::lattice
