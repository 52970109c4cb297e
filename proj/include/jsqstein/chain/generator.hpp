#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>

#include "jsqstein/chain/model.hpp"
#include "jsqstein/chain/state_space.hpp"

namespace jsqstein::chain {

/// One outgoing move of the level-count chain: q_level += step at `rate`.
struct Transition {
  int level = 0;  // 0-based
  int step = 0;   // +1 arrival, -1 departure
  double rate = 0.0;
};

/// Outgoing transitions of state q. Arrivals join the first level that is not
/// full and are blocked when every level is full; departures at level j occur
/// at rate q_j - q_{j+1} (q_{b+2} = 0).
template <class Fn>
void for_each_transition(const ModelParams& p, std::span<const int> q, Fn&& fn) {
  const int m = static_cast<int>(q.size());
  for (int j = 0; j < m; ++j) {
    if (q[j] < p.n) {
      fn(Transition{j, +1, p.arrival_rate()});
      break;
    }
  }
  for (int j = 0; j < m; ++j) {
    const int next = j + 1 < m ? q[j + 1] : 0;
    const int r = q[j] - next;
    if (r > 0) fn(Transition{j, -1, static_cast<double>(r)});
  }
}

inline double total_rate(const ModelParams& p, std::span<const int> q) {
  double s = 0.0;
  for_each_transition(p, q, [&](const Transition& t) { s += t.rate; });
  return s;
}

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Generator matrix: off-diagonal rates plus diagonal = -row sum.
class RateMatrix {
 public:
  RateMatrix(const ModelParams& p, const StateSpace& space) : params_(p), n_(space.size()) {
    triplets_.reserve(n_ * (2 + space.levels()));
    Occupancy q(space.levels());
    for (std::size_t id = 0; id < n_; ++id) {
      auto s = space.state(id);
      std::copy(s.begin(), s.end(), q.begin());
      double out = 0.0;
      for_each_transition(p, s, [&](const Transition& t) {
        q[t.level] += t.step;
        triplets_.emplace_back(static_cast<int>(id), static_cast<int>(space.index(q)), t.rate);
        q[t.level] -= t.step;
        out += t.rate;
      });
      triplets_.emplace_back(static_cast<int>(id), static_cast<int>(id), -out);
    }
    matrix_.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    matrix_.setFromTriplets(triplets_.begin(), triplets_.end());
  }

  const ModelParams& params() const { return params_; }
  std::size_t size() const { return n_; }
  const SparseRowMatrix& matrix() const { return matrix_; }
  const std::vector<Triplet>& triplets() const { return triplets_; }

  double rate(std::size_t from, std::size_t to) const {
    return matrix_.coeff(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }

  /// sum_{k'} q_{k,k'} (f(k') - f(k)).
  double apply(std::span<const double> f, std::size_t id) const {
    if (f.size() != n_) throw std::invalid_argument("function table has the wrong length");
    double s = 0.0;
    const double fk = f[id];
    for (SparseRowMatrix::InnerIterator it(matrix_, static_cast<Eigen::Index>(id)); it; ++it) {
      if (static_cast<std::size_t>(it.col()) != id) s += it.value() * (f[static_cast<std::size_t>(it.col())] - fk);
    }
    return s;
  }

  std::vector<double> apply_all(std::span<const double> f) const {
    std::vector<double> out(n_);
    for (std::size_t id = 0; id < n_; ++id) out[id] = apply(f, id);
    return out;
  }

 private:
  ModelParams params_;
  std::size_t n_;
  std::vector<Triplet> triplets_;
  SparseRowMatrix matrix_;
};

/// Generator in difference form on scaled coordinates, term by term:
/// arrivals -1(q_1<n) n lambda D_1 f(x - d e1) + n lambda sum_j 1(q_1..q_j = n, q_{j+1} < n) D_{j+1} f(x),
/// departures (q_1 - q_2) D_1 f(x) - sum_{j>=2} (q_j - q_{j+1}) D_j f(x - d e_j).
/// Moving x_1 up by one lattice step lowers q_1, every other axis raises q_j.
inline double apply_generator_differences(const StateSpace& space, std::span<const double> f,
                                          std::size_t id) {
  const ModelParams& p = space.params();
  auto s = space.state(id);
  Occupancy q(s.begin(), s.end());
  const int m = static_cast<int>(q.size());
  auto at = [&](int axis, int step) {
    Occupancy r = q;
    r[axis] += axis == 0 ? -step : step;
    return f[space.index(r)];
  };
  const double fx = f[id];
  const double nl = p.arrival_rate();
  double g = 0.0;
  if (q[0] < p.n) {
    g -= nl * (fx - at(0, -1));
  } else {
    for (int j = 1; j < m; ++j) {
      bool full = true;
      for (int i = 0; i < j; ++i) full = full && q[i] == p.n;
      if (full && q[j] < p.n) {
        g += nl * (at(j, +1) - fx);
        break;
      }
    }
  }
  const int q2 = m > 1 ? q[1] : 0;
  if (q[0] - q2 > 0) g += (q[0] - q2) * (at(0, +1) - fx);
  for (int j = 1; j < m; ++j) {
    const int next = j + 1 < m ? q[j + 1] : 0;
    if (q[j] - next > 0) g -= (q[j] - next) * (fx - at(j, -1));
  }
  return g;
}

}  // namespace jsqstein::chain
