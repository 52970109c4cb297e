#pragma once

// Test functions, moments, two-dimensional slices and difference tables of
// tables defined on the JSQ state space.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsqstein/chain/generator.hpp"
#include "jsqstein/chain/solvers.hpp"
#include "jsqstein/chain/state_space.hpp"
#include "jsqstein/lattice/grid_function.hpp"
#include "jsqstein/lattice/interpolate.hpp"
#include "jsqstein/util/csv.hpp"
#include "jsqstein/util/stats.hpp"

namespace jsqstein::chain {

enum class TestFunction { Sum, X1, X2, DistToFluid, Constant };

inline TestFunction parse_test_function(const std::string& name) {
  if (name == "sum") return TestFunction::Sum;
  if (name == "x1") return TestFunction::X1;
  if (name == "x2") return TestFunction::X2;
  if (name == "dist_to_fluid") return TestFunction::DistToFluid;
  if (name == "constant") return TestFunction::Constant;
  throw std::invalid_argument("unknown test function '" + name +
                              "' (expected one of sum, x1, x2, dist_to_fluid, constant)");
}

inline std::string to_string(TestFunction h) {
  switch (h) {
    case TestFunction::Sum: return "sum";
    case TestFunction::X1: return "x1";
    case TestFunction::X2: return "x2";
    case TestFunction::DistToFluid: return "dist_to_fluid";
    case TestFunction::Constant: return "constant";
  }
  return "?";
}

/// h at a scaled point. dist_to_fluid is the l1 distance to (beta, 0, ..., 0).
inline double evaluate_test_function(TestFunction h, std::span<const double> x, double beta) {
  switch (h) {
    case TestFunction::Sum: {
      double s = 0.0;
      for (double v : x) s += v;
      return s;
    }
    case TestFunction::X1: return x[0];
    case TestFunction::X2: return x.size() > 1 ? x[1] : 0.0;
    case TestFunction::DistToFluid: {
      double s = std::abs(x[0] - beta);
      for (std::size_t j = 1; j < x.size(); ++j) s += std::abs(x[j]);
      return s;
    }
    case TestFunction::Constant: return 1.0;
  }
  return 0.0;
}

inline std::vector<double> tabulate_test_function(const StateSpace& space, TestFunction h) {
  std::vector<double> out(space.size());
  for (std::size_t id = 0; id < space.size(); ++id)
    out[id] = evaluate_test_function(h, space.scaled(space.state(id)), space.params().beta);
  return out;
}

/// E X_i for every scaled coordinate.
inline std::vector<double> scaled_moments(const StateSpace& space, std::span<const double> pi) {
  std::vector<util::CompensatedSum> acc(space.levels());
  for (std::size_t id = 0; id < space.size(); ++id) {
    const auto x = space.scaled(space.state(id));
    for (std::size_t j = 0; j < x.size(); ++j) acc[j].add(pi[id] * x[j]);
  }
  std::vector<double> m;
  for (auto& a : acc) m.push_back(a.value());
  return m;
}

/// State with the given 2-d scaled lattice index (k1, k2) = (n - q_1, q_2) and q_3 = ... = 0.
inline Occupancy slice_state(const StateSpace& space, std::int64_t k1, std::int64_t k2) {
  Occupancy q(space.levels(), 0);
  q[0] = space.params().n - static_cast<int>(k1);
  q[1] = static_cast<int>(k2);
  return q;
}

inline bool slice_contains(const StateSpace& space, std::int64_t k1, std::int64_t k2) {
  const int n = space.params().n;
  return k1 >= 0 && k2 >= 0 && k1 <= n && k2 <= n - k1;
}

/// Restriction of a state table to {x_3 = ... = 0} as a 2-d grid function on
/// the triangle k1 + k2 <= n. With `pad` > 0 the box grows by pad in each
/// direction beyond n and the table is extended by zero off the state space.
inline lattice::GridFunction<2> slice_grid(const StateSpace& space, std::span<const double> table,
                                           std::int64_t pad = 0) {
  const std::int64_t n = space.params().n;
  lattice::GridFunction<2>::Predicate member;
  if (pad == 0) {
    member = [n](const lattice::Index<2>& k) { return k[0] + k[1] <= n; };
  }
  lattice::GridFunction<2> g(space.params().delta(), {0, 0}, {n + pad, n + pad}, member);
  g.for_each_index([&](const lattice::Index<2>& k) {
    if (slice_contains(space, k[0], k[1])) g.set(k, table[space.index(slice_state(space, k[0], k[1]))]);
  });
  return g;
}

struct DiffEntry {
  std::int64_t k1 = 0;
  std::int64_t k2 = 0;
  double value = 0.0;
};

/// D_1^{a1} D_2^{a2} of a slice table at every slice point whose stencil stays in the state space.
inline std::vector<DiffEntry> diff_table(const StateSpace& space, std::span<const double> table,
                                         unsigned a1, unsigned a2) {
  if (space.levels() < 2) throw std::invalid_argument("difference tables need b >= 1");
  const auto g = slice_grid(space, table);
  std::vector<DiffEntry> out;
  g.for_each_index([&](const lattice::Index<2>& k) {
    if (!slice_contains(space, k[0] + a1, k[1] + a2)) return;
    bool inside = true;
    for (unsigned i = 0; i <= a1; ++i)
      for (unsigned j = 0; j <= a2; ++j) inside = inside && slice_contains(space, k[0] + i, k[1] + j);
    if (!inside) return;
    out.push_back({k[0], k[1], lattice::finite_diff<2>(g, {a1, a2}, k)});
  });
  return out;
}

struct MomentIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  double mean_sum = 0.0;
};

/// Moment identity for h = sum of scaled coordinates, evaluated at the state
/// x_inf <-> q = (floor(n lambda), 0, ...): with frac = n lambda - floor(n lambda),
/// sum_i E X_i = n lambda D_1^2 f(x_inf - d e1) - frac D_1 f(x_inf) + beta + d frac.
inline MomentIdentity moment_identity(const StateSpace& space, std::span<const double> pi,
                                      const PoissonSolution& sol) {
  const ModelParams& p = space.params();
  const double nl = p.arrival_rate();
  const int m = static_cast<int>(std::floor(nl));
  const double frac = nl - m;
  if (m < 1 || m + 1 > p.n) throw std::domain_error("moment identity stencil leaves the state space");
  auto f_at = [&](int q1) {
    Occupancy q(space.levels(), 0);
    q[0] = q1;
    return sol.f[space.index(q)];
  };
  const double d1 = f_at(m - 1) - f_at(m);
  const double d2 = f_at(m - 1) - 2.0 * f_at(m) + f_at(m + 1);
  MomentIdentity r;
  const auto mom = scaled_moments(space, pi);
  r.lhs = util::compensated_sum(mom);
  r.mean_sum = r.lhs;
  r.rhs = nl * d2 - frac * d1 + p.beta + p.delta() * frac;
  return r;
}

/// CSV `state_id,q_1,...,q_{b+1},value`.
inline void write_state_table(std::ostream& os, const StateSpace& space, std::span<const double> values) {
  std::vector<std::string> header{"state_id"};
  for (std::size_t j = 1; j <= space.levels(); ++j) header.push_back("q_" + std::to_string(j));
  header.push_back("value");
  util::CsvWriter w(os, header);
  for (std::size_t id = 0; id < space.size(); ++id) {
    w << static_cast<unsigned long long>(id);
    for (int v : space.state(id)) w << v;
    w << values[id];
    w.end_row();
  }
}

}  // namespace jsqstein::chain

namespace jsqstein::chain {

/// Generator regrouped on the two-level slice {x_3 = ... = 0}:
///   1(q1<n) n lambda D_1^2 f(x - d e1) + 1(q1=n, q2<n) n lambda (D_2 + D_1) f(x)
///   + (beta - x1 - x2)/d D_1 f(x) - x2/d D_2 f(x - d e2),
/// for f a lattice function in (k1, k2). Valid on slice states that are not
/// blocked (q1 = q2 = n); f may take any finite value off the state space.
template <lattice::LatticeFunction<2> F>
double apply_generator_regrouped(const ModelParams& p, const F& f, std::int64_t k1, std::int64_t k2) {
  using lattice::Index;
  const int q1 = p.n - static_cast<int>(k1);
  const int q2 = static_cast<int>(k2);
  if (q1 == p.n && q2 == p.n) throw std::domain_error("regrouped generator does not cover the blocked state");
  const double d = p.delta();
  const double x1 = d * static_cast<double>(k1), x2 = d * static_cast<double>(k2);
  const double nl = p.arrival_rate();
  auto v = [&](std::int64_t a, std::int64_t b) { return f(Index<2>{a, b}); };
  const double fx = v(k1, k2);
  const double d1 = v(k1 + 1, k2) - fx;
  double g = (p.beta - x1 - x2) / d * d1;
  if (k2 > 0) g -= x2 / d * (fx - v(k1, k2 - 1));
  if (q1 < p.n) {
    g += nl * (v(k1 + 1, k2) - 2.0 * fx + v(k1 - 1, k2));
  } else {
    g += nl * ((v(k1, k2 + 1) - fx) + d1);
  }
  return g;
}

}  // namespace jsqstein::chain
