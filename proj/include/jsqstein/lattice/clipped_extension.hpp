#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>

#include "jsqstein/lattice/grid_function.hpp"
#include "jsqstein/lattice/interpolate.hpp"
#include "jsqstein/lattice/weights.hpp"

namespace jsqstein::lattice {

/// Extension of an orthant lattice function f to all of delta Z^D.
///
/// f_hat(delta k) = sum_i prod_j J_{i_j}(k_j - (k_j v 0)) f(delta (k v 0 + i)).
/// Axes with k_j >= 0 collapse to the single term i_j = 0, so f_hat = f on the orthant.
template <std::size_t D, LatticeFunction<D> F>
class ClippedExtension {
 public:
  explicit ClippedExtension(const F& base) : base_(&base) {}

  double spacing() const { return base_->spacing(); }

  bool contains(const Index<D>& k) const {
    bool inside = true;
    visit(k, [&](const Index<D>& p, double) {
      if (inside && !base_->contains(p)) inside = false;
    });
    return inside;
  }

  double operator()(const Index<D>& k) const {
    double sum = 0.0;
    visit(k, [&](const Index<D>& p, double w) { sum += w * (*base_)(p); });
    return sum;
  }

 private:
  template <class Fn>
  void visit(const Index<D>& k, Fn&& fn) const {
    Index<D> anchor{};
    std::array<unsigned, D> extent{};
    std::array<std::array<double, kWeightCount>, D> w{};
    for (std::size_t j = 0; j < D; ++j) {
      anchor[j] = k[j] < 0 ? 0 : k[j];
      if (k[j] < 0) {
        extent[j] = 4;
        w[j] = weights_at(static_cast<double>(k[j]));
      } else {
        extent[j] = 0;
        w[j] = {1.0, 0.0, 0.0, 0.0, 0.0};
      }
    }
    detail::for_each_offset<D>(extent, [&](const Index<D>& i) {
      double coeff = 1.0;
      for (std::size_t j = 0; j < D; ++j) coeff *= w[j][static_cast<std::size_t>(i[j])];
      fn(detail::add<D>(anchor, i), coeff);
    });
  }

  const F* base_;
};

/// Materialized clipped extension of an orthant grid function onto the box
/// [-depth, upper]. f must start at the origin with at least five points per axis.
template <std::size_t D>
GridFunction<D> clipped_extension(const GridFunction<D>& f, std::int64_t depth) {
  if (depth < 0) throw std::invalid_argument("extension depth must be nonnegative");
  for (std::size_t j = 0; j < D; ++j) {
    if (f.lower()[j] != 0) {
      throw std::invalid_argument("clipped extension needs a grid function anchored at the origin");
    }
    if (f.upper()[j] < 4) {
      throw std::invalid_argument("clipped extension needs at least 5 lattice points per axis");
    }
  }
  Index<D> lo{};
  lo.fill(-depth);
  // The returned grid keeps its own copy of the base for the membership test.
  auto base = std::make_shared<GridFunction<D>>(f);
  auto ext = std::make_shared<ClippedExtension<D, GridFunction<D>>>(*base);
  GridFunction<D> out(f.spacing(), lo, f.upper(),
                      [base, ext](const Index<D>& k) { return ext->contains(k); });
  out.for_each_index([&](const Index<D>& k) { out.set(k, (*ext)(k)); });
  return out;
}

}  // namespace jsqstein::lattice
