#pragma once

// Normalized sups of finite differences of f_h on the slice {x_3 = ... = 0}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "jsqstein/chain/analysis.hpp"
#include "jsqstein/lattice/interpolate.hpp"
#include "jsqstein/stein/instance.hpp"
#include "jsqstein/util/csv.hpp"

namespace jsqstein::stein {

struct BoundRow {
  int n = 0;
  std::string order;  // "1", "2", "3", "boundary", "diagonal", "reflection"
  std::string h;
  double normalized_sup = 0.0;
  std::string region;
  std::int64_t argmax_k1 = 0;
  std::int64_t argmax_k2 = 0;
};

namespace detail {

inline void keep_max(BoundRow& row, double v, std::int64_t k1, std::int64_t k2) {
  if (v > row.normalized_sup) {
    row.normalized_sup = v;
    row.argmax_k1 = k1;
    row.argmax_k2 = k2;
  }
}

}  // namespace detail

/// Certificates for one solved instance.
///
///  order r:     sup |D_1^a1 D_2^a2 f| / (d^r (1 + x2)^r) over a1 + a2 = r and slice
///               points whose difference stencil stays in S
///  boundary:    sup |(D_1 + D_2) f(0, x2)| / (d^2 (1 + x2)^2)
///  diagonal:    sup |f(0, x2) - f(d, x2 + d)| / (d^2 (1 + x2)), 0 <= x2 < d n
///  reflection:  sup |d1 A f + d2 A f|(0, x2) / (d (1 + x2)^2) at knots
inline std::vector<BoundRow> certify_bounds(const Instance& inst) {
  const auto& space = *inst.space;
  const ModelParams& p = inst.params;
  const double d = p.delta();
  const std::string hname = chain::to_string(inst.h);
  const std::span<const double> f(inst.sol.f);
  std::vector<BoundRow> rows;
  for (unsigned r = 1; r <= 3; ++r) {
    BoundRow row{p.n, std::to_string(r), hname, 0.0, "slice stencil inside S"};
    for (unsigned a1 = 0; a1 <= r; ++a1)
      for (const auto& e : chain::diff_table(space, f, a1, r - a1)) {
        const double x2 = d * static_cast<double>(e.k2);
        detail::keep_max(row, std::abs(e.value) / std::pow(d * (1 + x2), r), e.k1, e.k2);
      }
    rows.push_back(row);
  }
  auto at = [&](std::int64_t k1, std::int64_t k2) { return f[space.index(chain::slice_state(space, k1, k2))]; };
  BoundRow bnd{p.n, "boundary", hname, 0.0, "x1=0;x2<=delta(n-1)"};
  BoundRow diag{p.n, "diagonal", hname, 0.0, "x1=0;x2<=delta(n-2)"};
  for (std::int64_t k2 = 0; k2 + 1 <= p.n; ++k2) {
    const double x2 = d * static_cast<double>(k2);
    const double comb = at(1, k2) + at(0, k2 + 1) - 2 * at(0, k2);
    detail::keep_max(bnd, std::abs(comb) / (d * d * (1 + x2) * (1 + x2)), 0, k2);
    if (k2 + 2 <= p.n) detail::keep_max(diag, std::abs(at(0, k2) - at(1, k2 + 1)) / (d * d * (1 + x2)), 0, k2);
  }
  rows.push_back(bnd);
  rows.push_back(diag);
  const auto g = chain::slice_grid(space, f);
  BoundRow refl{p.n, "reflection", hname, 0.0, "x1=0;knots;stencil inside S"};
  for (std::int64_t k2 = 0; k2 + 4 <= p.n; ++k2) {
    const double x2 = d * static_cast<double>(k2);
    const double v = lattice::knot_derivative<2>(g, {0, k2}, 0) + lattice::knot_derivative<2>(g, {0, k2}, 1);
    detail::keep_max(refl, std::abs(v) / (d * (1 + x2) * (1 + x2)), 0, k2);
  }
  rows.push_back(refl);
  return rows;
}

inline std::vector<std::string> certificate_header() { return {"n", "order", "h", "normalized_sup", "region"}; }

inline void append_certificate_rows(util::CsvWriter& w, const std::vector<BoundRow>& rows) {
  for (const auto& r : rows) {
    w << r.n << r.order << r.h << r.normalized_sup << r.region;
    w.end_row();
  }
}

}  // namespace jsqstein::stein
