#pragma once

// Weight polynomials of the forward-difference C^3 interpolator.
//
// On a cell anchored at lattice index k the interpolant is
//
//   P_k(t) = f + t (D - D^2/2 + D^3/3) f + t^2/2 (D^2 - D^3) f + t^3/6 D^3 f
//            + (-23/3 t^4 + 41/2 t^5 - 55/3 t^6 + 11/2 t^7) D^4 f,
//
// with t = (x - delta k) / delta and D the forward difference at k. Expanding
// each D^m f(k) = sum_i (-1)^(m-i) C(m,i) f(k+i) and collecting by f(k+i)
// gives five degree-7 polynomials J_0..J_4 in t. They are computed here in
// exact rational arithmetic at compile time and converted to double once.

#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace jsqstein::lattice {

/// Exact rational with int64 numerator/denominator, always normalized.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  constexpr Rational operator+(const Rational& o) const {
    return {num * o.den + o.num * den, den * o.den};
  }
  constexpr Rational operator-(const Rational& o) const {
    return {num * o.den - o.num * den, den * o.den};
  }
  constexpr Rational operator*(const Rational& o) const {
    return {num * o.num, den * o.den};
  }
  constexpr Rational operator-() const { return {-num, den}; }
  constexpr bool operator==(const Rational&) const = default;

  constexpr double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

inline constexpr std::size_t kWeightCount = 5;
inline constexpr std::size_t kWeightDegree = 7;

/// coefficients[i][p] is the coefficient of t^p in J_i(t).
using WeightTable = std::array<std::array<Rational, kWeightDegree + 1>, kWeightCount>;

namespace detail {

constexpr std::int64_t binomial(std::int64_t n, std::int64_t k) {
  std::int64_t r = 1;
  for (std::int64_t j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

// Polynomial multiplying D^m f(delta k) in P_k, coefficient of t^p.
constexpr std::array<std::array<Rational, kWeightDegree + 1>, kWeightCount>
difference_coefficients() {
  std::array<std::array<Rational, kWeightDegree + 1>, kWeightCount> c{};
  c[0][0] = Rational(1);
  c[1][1] = Rational(1);
  c[2][1] = Rational(-1, 2);
  c[2][2] = Rational(1, 2);
  c[3][1] = Rational(1, 3);
  c[3][2] = Rational(-1, 2);
  c[3][3] = Rational(1, 6);
  c[4][4] = Rational(-23, 3);
  c[4][5] = Rational(41, 2);
  c[4][6] = Rational(-55, 3);
  c[4][7] = Rational(11, 2);
  return c;
}

}  // namespace detail

/// Exact weight coefficients J_i(t), i = 0..4.
constexpr WeightTable exact_weight_table() {
  const auto diff = detail::difference_coefficients();
  WeightTable table{};
  for (std::size_t m = 0; m < kWeightCount; ++m) {
    for (std::size_t i = 0; i <= m; ++i) {
      const std::int64_t sign = ((m - i) % 2 == 0) ? 1 : -1;
      const Rational scale(sign * detail::binomial(static_cast<std::int64_t>(m),
                                                   static_cast<std::int64_t>(i)));
      for (std::size_t p = 0; p <= kWeightDegree; ++p) {
        table[i][p] = table[i][p] + scale * diff[m][p];
      }
    }
  }
  return table;
}

inline constexpr WeightTable kExactWeights = exact_weight_table();

static_assert(kExactWeights[0][1] == Rational(-11, 6));
static_assert(kExactWeights[0][4] == Rational(-23, 3));

using DoubleWeightTable =
    std::array<std::array<double, kWeightDegree + 1>, kWeightCount>;

inline constexpr DoubleWeightTable to_double_table(const WeightTable& exact) {
  DoubleWeightTable out{};
  for (std::size_t i = 0; i < kWeightCount; ++i)
    for (std::size_t p = 0; p <= kWeightDegree; ++p) out[i][p] = exact[i][p].to_double();
  return out;
}

inline constexpr DoubleWeightTable kWeights = to_double_table(kExactWeights);

/// v-th derivative (in t) of J_i evaluated at t. Horner on the differentiated
/// coefficients; v > 7 yields 0.
inline double weight_derivative(std::size_t i, unsigned v, double t) {
  if (i >= kWeightCount) {
    throw std::out_of_range("weight index " + std::to_string(i) + " outside 0..4");
  }
  if (v > kWeightDegree) return 0.0;
  double acc = 0.0;
  for (std::size_t p = kWeightDegree + 1; p-- > v;) {
    double falling = 1.0;
    for (unsigned r = 0; r < v; ++r) falling *= static_cast<double>(p - r);
    acc = acc * t + falling * kWeights[i][p];
  }
  return acc;
}

/// J_i(t): the weight alpha^k_{k+i}(x) at t = (x - delta k) / delta.
inline double weight_eval(std::size_t i, double t) { return weight_derivative(i, 0, t); }

/// All five weights (or their v-th t-derivatives) at once.
inline std::array<double, kWeightCount> weights_at(double t, unsigned v = 0) {
  std::array<double, kWeightCount> w{};
  for (std::size_t i = 0; i < kWeightCount; ++i) w[i] = weight_derivative(i, v, t);
  return w;
}

}  // namespace jsqstein::lattice
