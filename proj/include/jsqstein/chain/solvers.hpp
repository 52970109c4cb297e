#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "jsqstein/chain/generator.hpp"
#include "jsqstein/chain/state_space.hpp"
#include "jsqstein/util/stats.hpp"

namespace jsqstein::chain {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  std::size_t dense_limit = 2000;
  std::size_t direct_limit = 500'000;
  double iterative_tolerance = 1e-13;
  int refinement_steps = 3;
};

namespace detail {

using SparseColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

inline double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Solves A x = rhs, refining against the residual while it keeps shrinking.
inline Eigen::VectorXd solve_square(const SparseColMatrix& A, const Eigen::VectorXd& rhs,
                                    const SolverOptions& opt) {
  const auto n = static_cast<std::size_t>(A.rows());
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> solve;
  Eigen::PartialPivLU<Eigen::MatrixXd> dense;
  Eigen::SparseLU<SparseColMatrix, Eigen::COLAMDOrdering<int>> sparse;
  Eigen::BiCGSTAB<SparseColMatrix, Eigen::IncompleteLUT<double>> iterative;
  if (n <= opt.dense_limit) {
    dense.compute(Eigen::MatrixXd(A));
    solve = [&](const Eigen::VectorXd& b) { return Eigen::VectorXd(dense.solve(b)); };
  } else if (n <= opt.direct_limit) {
    sparse.analyzePattern(A);
    sparse.factorize(A);
    if (sparse.info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + sparse.lastErrorMessage());
    solve = [&](const Eigen::VectorXd& b) { return Eigen::VectorXd(sparse.solve(b)); };
  } else {
    iterative.setTolerance(opt.iterative_tolerance);
    iterative.setMaxIterations(20000);
    iterative.compute(A);
    if (iterative.info() != Eigen::Success) throw SolverError("ILUT preconditioner failed");
    solve = [&](const Eigen::VectorXd& b) {
      Eigen::VectorXd x = iterative.solve(b);
      if (iterative.info() != Eigen::Success) throw SolverError("BiCGSTAB did not converge");
      return x;
    };
  }
  Eigen::VectorXd x = solve(rhs);
  double res = inf_norm(rhs - A * x);
  for (int it = 0; it < opt.refinement_steps; ++it) {
    const Eigen::VectorXd r = rhs - A * x;
    const Eigen::VectorXd cand = x + solve(r);
    const double res_new = inf_norm(rhs - A * cand);
    if (!(res_new < res)) break;
    x = cand;
    res = res_new;
  }
  if (!x.allFinite()) throw SolverError("linear solve produced non-finite values");
  return x;
}

}  // namespace detail

/// Stationary distribution: solves G^T pi = 0 with one equation replaced by sum(pi) = 1.
inline std::vector<double> stationary(const RateMatrix& G, const SolverOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(G.size());
  std::vector<Triplet> t;
  t.reserve(G.triplets().size() + G.size());
  const int replaced = 0;
  for (const auto& e : G.triplets())
    if (e.col() != replaced) t.emplace_back(e.col(), e.row(), e.value());
  for (Eigen::Index j = 0; j < n; ++j) t.emplace_back(replaced, static_cast<int>(j), 1.0);
  detail::SparseColMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[replaced] = 1.0;
  Eigen::VectorXd x = detail::solve_square(A, rhs, opt);
  std::vector<double> pi(x.data(), x.data() + n);
  for (double& v : pi) {
    if (v <= 0.0) {
      if (v < -1e-12) throw SolverError("stationary solve returned a negative mass; chain may be reducible");
      v = std::max(v, 0.0);
    }
  }
  const double total = util::compensated_sum(pi);
  for (double& v : pi) v /= total;
  return pi;
}

/// max_j |(pi G)_j|.
inline double stationary_residual(const RateMatrix& G, std::span<const double> pi) {
  Eigen::Map<const Eigen::VectorXd> p(pi.data(), static_cast<Eigen::Index>(pi.size()));
  Eigen::VectorXd r = G.matrix().transpose() * p;
  return detail::inf_norm(r);
}

/// E h(X) with compensated summation.
inline double expectation(std::span<const double> pi, std::span<const double> h) {
  if (pi.size() != h.size()) throw std::invalid_argument("expectation: length mismatch");
  util::CompensatedSum s;
  for (std::size_t i = 0; i < pi.size(); ++i) s.add(pi[i] * h[i]);
  return s.value();
}

struct PoissonSolution {
  std::vector<double> f;
  std::vector<double> h;
  double mean_h = 0.0;
  std::size_t anchor = 0;
  double residual = 0.0;
};

/// Which state carries the normalization f_h = 0.
enum class PoissonAnchor { ScaledOrigin, EmptySystem };

inline std::size_t anchor_state(const StateSpace& space, PoissonAnchor a) {
  Occupancy q(space.levels(), 0);
  if (a == PoissonAnchor::ScaledOrigin) q[0] = space.params().n;
  return space.index(q);
}

/// max_k |G f(k) + h(k) - E h|.
inline double poisson_residual(const RateMatrix& G, std::span<const double> f,
                               std::span<const double> h, double mean_h) {
  double r = 0.0;
  for (std::size_t k = 0; k < G.size(); ++k) r = std::max(r, std::abs(G.apply(f, k) + h[k] - mean_h));
  return r;
}

/// Solves G f = E h(X) - h with f(anchor) = 0.
inline PoissonSolution solve_poisson(const RateMatrix& G, std::span<const double> h,
                                     std::span<const double> pi, std::size_t anchor,
                                     const SolverOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(G.size());
  if (h.size() != G.size() || pi.size() != G.size()) throw std::invalid_argument("solve_poisson: length mismatch");
  for (double v : h)
    if (!std::isfinite(v)) throw std::invalid_argument("test function has non-finite values");
  PoissonSolution sol;
  sol.h.assign(h.begin(), h.end());
  sol.mean_h = expectation(pi, h);
  sol.anchor = anchor;
  std::vector<Triplet> t;
  t.reserve(G.triplets().size());
  for (const auto& e : G.triplets())
    if (static_cast<std::size_t>(e.row()) != anchor) t.push_back(e);
  t.emplace_back(static_cast<int>(anchor), static_cast<int>(anchor), 1.0);
  detail::SparseColMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd rhs(n);
  for (Eigen::Index k = 0; k < n; ++k) rhs[k] = sol.mean_h - h[static_cast<std::size_t>(k)];
  rhs[static_cast<Eigen::Index>(anchor)] = 0.0;
  Eigen::VectorXd x = detail::solve_square(A, rhs, opt);
  sol.f.assign(x.data(), x.data() + n);
  sol.residual = poisson_residual(G, sol.f, sol.h, sol.mean_h);
  return sol;
}

}  // namespace jsqstein::chain
