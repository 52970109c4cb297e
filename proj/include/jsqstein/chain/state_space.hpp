#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsqstein/chain/model.hpp"

namespace jsqstein::chain {

/// Level counts q_1 >= ... >= q_{b+1}; q_j is the number of servers with at least j customers.
using Occupancy = std::vector<int>;

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultStateBudget = 5'000'000;

namespace detail {

inline double binomial_real(double n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace detail

/// All monotone (b+1)-tuples over {0..n}, in lexicographic order, with a
/// closed-form rank so that lookups need no hash table.
class StateSpace {
 public:
  explicit StateSpace(const ModelParams& p, std::size_t budget = kDefaultStateBudget)
      : params_(p), m_(static_cast<std::size_t>(p.levels())) {
    p.validate();
    const double count = detail::binomial_real(p.n + p.b + 1, p.b + 1);
    if (count > static_cast<double>(budget)) {
      throw BudgetError("state space of " + std::to_string(static_cast<long long>(count)) +
                        " states exceeds the budget of " + std::to_string(budget));
    }
    binom_.assign((static_cast<std::size_t>(p.n) + m_ + 2) * (m_ + 2), 0);
    for (std::size_t a = 0; a < static_cast<std::size_t>(p.n) + m_ + 2; ++a) {
      for (std::size_t c = 0; c <= std::min(a, m_ + 1); ++c) {
        binom_[a * (m_ + 2) + c] = (c == 0 || c == a) ? 1 : choose(a - 1, c - 1) + choose(a - 1, c);
      }
    }
    size_ = static_cast<std::size_t>(count + 0.5);
    data_.reserve(size_ * m_);
    Occupancy q(m_, 0);
    enumerate(q, 0, p.n);
    if (data_.size() != size_ * m_) throw std::logic_error("state enumeration count mismatch");
  }

  const ModelParams& params() const { return params_; }
  std::size_t size() const { return size_; }
  std::size_t levels() const { return m_; }

  std::span<const int> state(std::size_t id) const {
    return {data_.data() + id * m_, m_};
  }

  Occupancy occupancy(std::size_t id) const {
    auto s = state(id);
    return {s.begin(), s.end()};
  }

  bool valid(std::span<const int> q) const {
    if (q.size() != m_) return false;
    for (std::size_t j = 0; j < m_; ++j) {
      if (q[j] < 0 || q[j] > params_.n) return false;
      if (j > 0 && q[j] > q[j - 1]) return false;
    }
    return true;
  }

  /// Lexicographic rank: sum_j C(q_j + L_j, L_j + 1) with L_j = m - 1 - j (0-based j).
  std::size_t index(std::span<const int> q) const {
    if (!valid(q)) throw std::out_of_range("not a JSQ state");
    std::size_t r = 0;
    for (std::size_t j = 0; j < m_; ++j) {
      const std::size_t L = m_ - 1 - j;
      r += choose(static_cast<std::size_t>(q[j]) + L, L + 1);
    }
    return r;
  }

  /// Scaled coordinates x_1 = delta (n - q_1), x_i = delta q_i.
  std::vector<double> scaled(std::span<const int> q) const { return scaled_state(q, params_); }

  static std::vector<double> scaled_state(std::span<const int> q, const ModelParams& p) {
    std::vector<double> x(q.size());
    const double d = p.delta();
    for (std::size_t j = 0; j < q.size(); ++j)
      x[j] = d * static_cast<double>(j == 0 ? p.n - q[0] : q[j]);
    return x;
  }

  static Occupancy unscaled_state(std::span<const double> x, const ModelParams& p) {
    Occupancy q(x.size());
    const double inv = std::sqrt(static_cast<double>(p.n));
    for (std::size_t j = 0; j < x.size(); ++j) {
      const int v = static_cast<int>(std::lround(x[j] * inv));
      q[j] = j == 0 ? p.n - v : v;
    }
    return q;
  }

 private:
  std::size_t choose(std::size_t a, std::size_t c) const {
    if (c > a) return 0;
    return binom_[a * (m_ + 2) + c];
  }

  void enumerate(Occupancy& q, std::size_t level, int cap) {
    if (level == m_) {
      data_.insert(data_.end(), q.begin(), q.end());
      return;
    }
    for (int v = 0; v <= cap; ++v) {
      q[level] = v;
      enumerate(q, level + 1, v);
    }
  }

  ModelParams params_;
  std::size_t m_;
  std::size_t size_ = 0;
  std::vector<std::size_t> binom_;
  std::vector<int> data_;
};

}  // namespace jsqstein::chain
