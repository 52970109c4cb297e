#pragma once

#include <algorithm>
#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jsqstein::lattice {

template <std::size_t D>
using Index = std::array<std::int64_t, D>;

template <std::size_t D>
using Point = std::array<double, D>;

/// Derivative / difference orders per axis.
template <std::size_t D>
using MultiIndex = std::array<unsigned, D>;

template <std::size_t D>
constexpr unsigned order(const MultiIndex<D>& a) {
  unsigned s = 0;
  for (unsigned v : a) s += v;
  return s;
}

/// Thrown when a stencil or evaluation point leaves the domain of a lattice function.
class StencilError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

template <std::size_t D>
std::string format_index(const Index<D>& k) {
  std::string s = "(";
  for (std::size_t j = 0; j < D; ++j) {
    if (j) s += ",";
    s += std::to_string(k[j]);
  }
  return s + ")";
}

/// Anything that can be sampled on delta Z^D: a spacing, a membership test and values.
template <class F, std::size_t D>
concept LatticeFunction = requires(const F& f, const Index<D>& k) {
  { f.spacing() } -> std::convertible_to<double>;
  { f.contains(k) } -> std::convertible_to<bool>;
  { f(k) } -> std::convertible_to<double>;
};

/// Real values on a delta-spaced lattice over a convex index set.
///
/// The domain is the intersection of an inclusive bounding box with an
/// optional membership predicate; values are stored densely over the box.
template <std::size_t D>
class GridFunction {
 public:
  using IndexType = Index<D>;
  using Predicate = std::function<bool(const IndexType&)>;

  GridFunction(double spacing, IndexType lo, IndexType hi, Predicate member = {})
      : spacing_(spacing), lo_(lo), hi_(hi), member_(std::move(member)) {
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    std::size_t total = 1;
    for (std::size_t j = 0; j < D; ++j) {
      if (hi_[j] < lo_[j]) throw std::invalid_argument("empty bounding box");
      extent_[j] = static_cast<std::size_t>(hi_[j] - lo_[j] + 1);
      total *= extent_[j];
    }
    values_.assign(total, 0.0);
  }

  /// Fill every domain point with fn(k).
  template <class Fn>
    requires std::invocable<Fn, const IndexType&>
  static GridFunction tabulate(double spacing, IndexType lo, IndexType hi, Fn&& fn,
                               Predicate member = {}) {
    GridFunction g(spacing, lo, hi, std::move(member));
    g.for_each_index([&](const IndexType& k) { g.set(k, fn(k)); });
    return g;
  }

  double spacing() const { return spacing_; }
  const IndexType& lower() const { return lo_; }
  const IndexType& upper() const { return hi_; }

  bool in_box(const IndexType& k) const {
    for (std::size_t j = 0; j < D; ++j)
      if (k[j] < lo_[j] || k[j] > hi_[j]) return false;
    return true;
  }

  bool contains(const IndexType& k) const {
    return in_box(k) && (!member_ || member_(k));
  }

  double operator()(const IndexType& k) const {
    if (!contains(k)) throw StencilError("lattice index " + format_index<D>(k) + " outside domain");
    return values_[offset(k)];
  }

  void set(const IndexType& k, double v) {
    if (!contains(k)) throw StencilError("lattice index " + format_index<D>(k) + " outside domain");
    values_[offset(k)] = v;
  }

  Point<D> point(const IndexType& k) const {
    Point<D> x{};
    for (std::size_t j = 0; j < D; ++j) x[j] = spacing_ * static_cast<double>(k[j]);
    return x;
  }

  /// Visit every domain index in row-major order (last axis fastest).
  template <class Fn>
  void for_each_index(Fn&& fn) const {
    IndexType k = lo_;
    while (true) {
      if (!member_ || member_(k)) fn(static_cast<const IndexType&>(k));
      std::size_t j = D;
      while (j-- > 0) {
        if (k[j] < hi_[j]) {
          ++k[j];
          break;
        }
        k[j] = lo_[j];
        if (j == 0) return;
      }
    }
  }

  std::size_t size() const {
    std::size_t count = 0;
    for_each_index([&](const IndexType&) { ++count; });
    return count;
  }

 private:
  std::size_t offset(const IndexType& k) const {
    std::size_t off = 0;
    for (std::size_t j = 0; j < D; ++j)
      off = off * extent_[j] + static_cast<std::size_t>(k[j] - lo_[j]);
    return off;
  }

  double spacing_;
  IndexType lo_;
  IndexType hi_;
  std::array<std::size_t, D> extent_{};
  Predicate member_;
  std::vector<double> values_;
};

/// Lattice function backed by a callable; the domain is a predicate (default: all of Z^D).
template <std::size_t D, class Fn>
class LatticeView {
 public:
  LatticeView(double spacing, Fn fn, std::function<bool(const Index<D>&)> member = {})
      : spacing_(spacing), fn_(std::move(fn)), member_(std::move(member)) {
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  }
  double spacing() const { return spacing_; }
  bool contains(const Index<D>& k) const { return !member_ || member_(k); }
  double operator()(const Index<D>& k) const {
    if (!contains(k)) throw StencilError("lattice index " + format_index<D>(k) + " outside domain");
    return fn_(k);
  }

 private:
  double spacing_;
  Fn fn_;
  std::function<bool(const Index<D>&)> member_;
};

template <std::size_t D, class Fn>
LatticeView<D, Fn> make_lattice_view(double spacing, Fn fn,
                                     std::function<bool(const Index<D>&)> member = {}) {
  return LatticeView<D, Fn>(spacing, std::move(fn), std::move(member));
}

static_assert(LatticeFunction<GridFunction<2>, 2>);

}  // namespace jsqstein::lattice
