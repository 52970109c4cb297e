#pragma once

// Columnar text form of a grid function: a header line "d delta", then one
// row "k_1 ... k_d value" per domain point.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsqstein/lattice/grid_function.hpp"

namespace jsqstein::lattice {

template <std::size_t D>
void write_grid(std::ostream& os, const GridFunction<D>& f) {
  const auto old_prec = os.precision(17);
  os << D << ' ' << f.spacing() << '\n';
  f.for_each_index([&](const Index<D>& k) {
    for (std::size_t j = 0; j < D; ++j) os << k[j] << ' ';
    os << f(k) << '\n';
  });
  os.precision(old_prec);
}

/// Reads a grid written by write_grid. The domain becomes the bounding box of
/// the rows restricted to the listed indices.
template <std::size_t D>
GridFunction<D> read_grid(std::istream& is) {
  std::size_t d = 0;
  double delta = 0.0;
  if (!(is >> d >> delta)) throw std::runtime_error("grid file: missing 'd delta' header");
  if (d != D) {
    throw std::runtime_error("grid file: dimension " + std::to_string(d) + " where " +
                             std::to_string(D) + " was expected");
  }
  std::vector<Index<D>> keys;
  std::vector<double> vals;
  Index<D> k{};
  double v = 0.0;
  while (true) {
    std::size_t j = 0;
    for (; j < D; ++j)
      if (!(is >> k[j])) break;
    if (j == 0 && is.eof()) break;
    if (j < D || !(is >> v)) throw std::runtime_error("grid file: truncated row");
    keys.push_back(k);
    vals.push_back(v);
  }
  if (keys.empty()) throw std::runtime_error("grid file: no rows");
  Index<D> lo = keys.front(), hi = keys.front();
  for (const auto& key : keys)
    for (std::size_t j = 0; j < D; ++j) {
      lo[j] = std::min(lo[j], key[j]);
      hi[j] = std::max(hi[j], key[j]);
    }
  // Membership is tracked with a dense mask over the box.
  GridFunction<D> mask(delta, lo, hi);
  for (const auto& key : keys) mask.set(key, 1.0);
  auto shared = std::make_shared<GridFunction<D>>(std::move(mask));
  GridFunction<D> out(delta, lo, hi,
                      [shared](const Index<D>& q) { return (*shared)(q) != 0.0; });
  for (std::size_t r = 0; r < keys.size(); ++r) out.set(keys[r], vals[r]);
  return out;
}

}  // namespace jsqstein::lattice
