#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "jsqstein/chain/analysis.hpp"
#include "jsqstein/chain/generator.hpp"
#include "jsqstein/chain/simulate.hpp"
#include "jsqstein/chain/solvers.hpp"
#include "jsqstein/chain/state_space.hpp"
#include "jsqstein/util/rng.hpp"

using namespace jsqstein::chain;
using jsqstein::util::Stream;

namespace {

double binomial(int n, int k) {
  double r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

// Fundamental-matrix solution by uniformization: f = (1/L) sum_k P^k (h - E h),
// P = I + G / L, computed densely. Returned shifted so that f(anchor) = 0.
std::vector<double> uniformized_poisson(const RateMatrix& G, const std::vector<double>& h,
                                        const std::vector<double>& pi, std::size_t anchor) {
  const auto n = static_cast<Eigen::Index>(G.size());
  Eigen::MatrixXd Gd = Eigen::MatrixXd(G.matrix());
  double L = 0;
  for (Eigen::Index i = 0; i < n; ++i) L = std::max(L, -Gd(i, i));
  L *= 1.05;
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) + Gd / L;
  double mean = 0;
  for (Eigen::Index i = 0; i < n; ++i) mean += pi[i] * h[i];
  Eigen::VectorXd v(n), acc = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = h[i] - mean;
  for (int k = 0; k < 2000000; ++k) {
    acc += v;
    v = P * v;
    if (v.cwiseAbs().maxCoeff() < 1e-15) break;
  }
  acc /= L;
  std::vector<double> f(n);
  for (Eigen::Index i = 0; i < n; ++i) f[i] = acc[i] - acc[static_cast<Eigen::Index>(anchor)];
  return f;
}

}  // namespace

TEST(StateSpace, SmallEnumerations) {
  StateSpace s11({1, 1, 0.5});
  ASSERT_EQ(s11.size(), 3u);
  EXPECT_EQ(s11.occupancy(0), (Occupancy{0, 0}));
  EXPECT_EQ(s11.occupancy(1), (Occupancy{1, 0}));
  EXPECT_EQ(s11.occupancy(2), (Occupancy{1, 1}));
  EXPECT_EQ(StateSpace({2, 1, 0.5}).size(), 6u);
}

TEST(StateSpace, CountAndRankRoundTrip) {
  for (int b = 1; b <= 3; ++b)
    for (int n = 1; n <= 20; n += 3) {
      StateSpace s({n, b, 0.5});
      EXPECT_EQ(s.size(), static_cast<std::size_t>(binomial(n + b + 1, b + 1) + 0.5));
      for (std::size_t id = 0; id < s.size(); ++id) {
        ASSERT_EQ(s.index(s.state(id)), id);
        if (id > 0) {
          auto prev = s.occupancy(id - 1), cur = s.occupancy(id);
          EXPECT_TRUE(std::lexicographical_compare(prev.begin(), prev.end(), cur.begin(), cur.end()));
        }
      }
    }
}

TEST(StateSpace, BudgetAndValidation) {
  EXPECT_THROW(StateSpace({1000, 3, 1.0}, 1000), BudgetError);
  EXPECT_THROW(StateSpace({4, 1, 2.0}), std::invalid_argument);
  EXPECT_THROW(StateSpace({4, 0, 1.0}), std::invalid_argument);
}

TEST(StateSpace, ScaledCoordinates) {
  ModelParams p{4, 2, 1.0};
  EXPECT_EQ(StateSpace::scaled_state(std::vector<int>{4, 0, 0}, p), (std::vector<double>{0, 0, 0}));
  EXPECT_DOUBLE_EQ(StateSpace::scaled_state(std::vector<int>{3, 0, 0}, p)[0], 0.5);
  Occupancy q{3, 2, 1};
  auto x = StateSpace::scaled_state(q, p);
  EXPECT_EQ(StateSpace::unscaled_state(x, p), q);
}

TEST(Generator, SmallRows) {
  ModelParams p{1, 1, 0.5};
  StateSpace s(p);
  RateMatrix G(p, s);
  EXPECT_DOUBLE_EQ(G.rate(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(G.rate(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(G.rate(2, 1), 1.0);
  EXPECT_DOUBLE_EQ(G.rate(2, 2), -1.0);
  std::vector<double> ind{0, 1, 0};
  EXPECT_DOUBLE_EQ(G.apply(ind, 0), 0.5);
}

TEST(Generator, RowSumsAndOutflow) {
  for (auto p : {ModelParams{10, 1, 1.0}, ModelParams{7, 3, 0.7}}) {
    StateSpace s(p);
    RateMatrix G(p, s);
    std::vector<double> c(s.size(), 3.0);
    for (std::size_t k = 0; k < s.size(); ++k) {
      double row = 0;
      for (SparseRowMatrix::InnerIterator it(G.matrix(), k); it; ++it) {
        row += it.value();
        if (static_cast<std::size_t>(it.col()) != k) EXPECT_GE(it.value(), 0.0);
        else EXPECT_LE(-it.value(), p.arrival_rate() + p.n + 1e-12);
      }
      EXPECT_NEAR(row, 0.0, 1e-12);
      EXPECT_EQ(G.apply(c, k), 0.0);
    }
  }
}

TEST(Generator, DifferenceFormMatchesMatrix) {
  Stream rng(1);
  for (auto p : {ModelParams{6, 1, 1.0}, ModelParams{5, 2, 1.0}, ModelParams{4, 3, 0.5}}) {
    StateSpace s(p);
    RateMatrix G(p, s);
    std::vector<double> f(s.size());
    for (double& v : f) v = rng.normal();
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_NEAR(apply_generator_differences(s, f, k), G.apply(f, k), 1e-11);
  }
}

TEST(Generator, RegroupedFormMatchesOnSlice) {
  Stream rng(2);
  for (auto p : {ModelParams{9, 1, 1.0}, ModelParams{6, 2, 1.0}}) {
    StateSpace s(p);
    RateMatrix G(p, s);
    std::vector<double> f(s.size());
    for (double& v : f) v = rng.normal();
    auto g = slice_grid(s, f, 2);
    for (std::int64_t k1 = 0; k1 <= p.n; ++k1)
      for (std::int64_t k2 = 0; k2 <= p.n - k1; ++k2) {
        if (k1 == 0 && k2 == p.n) continue;
        const auto id = s.index(slice_state(s, k1, k2));
        EXPECT_NEAR(apply_generator_regrouped(p, g, k1, k2), G.apply(f, id), 1e-10) << k1 << "," << k2;
      }
  }
}

TEST(Stationary, BirthDeathOracle) {
  ModelParams p{1, 1, 0.5};
  StateSpace s(p);
  RateMatrix G(p, s);
  auto pi = stationary(G);
  EXPECT_NEAR(pi[0], 4.0 / 7, 1e-14);
  EXPECT_NEAR(pi[1], 2.0 / 7, 1e-14);
  EXPECT_NEAR(pi[2], 1.0 / 7, 1e-14);
  EXPECT_LE(stationary_residual(G, pi), 1e-10);
}

TEST(Stationary, ResidualAndNormalization) {
  for (auto p : {ModelParams{25, 1, 1.0}, ModelParams{10, 2, 1.0}, ModelParams{60, 1, 1.0}}) {
    StateSpace s(p);
    RateMatrix G(p, s);
    auto pi = stationary(G);
    EXPECT_NEAR(jsqstein::util::compensated_sum(pi), 1.0, 1e-14);
    EXPECT_LE(stationary_residual(G, pi), 1e-10);
    for (double v : pi) EXPECT_GE(v, 0.0);
  }
}

TEST(Stationary, MatchesGillespieLongRun) {
  ModelParams p{2, 1, 0.5};
  StateSpace s(p);
  RateMatrix G(p, s);
  auto pi = stationary(G);
  Stream rng(2024);
  Occupancy q{0, 0};
  const int batches = 100;
  std::vector<std::vector<double>> per(s.size());
  for (int b = 0; b < batches; ++b) {
    auto frac = occupancy_fractions(s, q, 100000, rng);
    for (std::size_t k = 0; k < s.size(); ++k) per[k].push_back(frac[k]);
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    auto est = jsqstein::util::mean_stderr(per[k]);
    EXPECT_LE(std::abs(est.mean - pi[k]), 3 * est.se + 1e-12) << "state " << k;
  }
}

TEST(Poisson, HandSolvedThreeStates) {
  ModelParams p{1, 1, 0.5};
  StateSpace s(p);
  RateMatrix G(p, s);
  auto pi = stationary(G);
  std::vector<double> h{0, 1, 2};  // q1 + q2
  auto sol = solve_poisson(G, h, pi, anchor_state(s, PoissonAnchor::ScaledOrigin));
  EXPECT_NEAR(sol.mean_h, 4.0 / 7, 1e-14);
  EXPECT_NEAR(sol.f[0], -8.0 / 7, 1e-12);
  EXPECT_NEAR(sol.f[1], 0.0, 1e-12);
  EXPECT_NEAR(sol.f[2], 10.0 / 7, 1e-12);
}

TEST(Poisson, ConstantHGivesZero) {
  ModelParams p{10, 1, 1.0};
  StateSpace s(p);
  RateMatrix G(p, s);
  auto pi = stationary(G);
  auto sol = solve_poisson(G, tabulate_test_function(s, TestFunction::Constant), pi,
                           anchor_state(s, PoissonAnchor::ScaledOrigin));
  for (double v : sol.f) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Poisson, ResidualsAndUniformizationOracle) {
  for (auto p : {ModelParams{10, 1, 1.0}, ModelParams{5, 2, 1.0}}) {
    StateSpace s(p);
    ASSERT_LE(s.size(), 200u);
    RateMatrix G(p, s);
    auto pi = stationary(G);
    for (auto hn : {TestFunction::Sum, TestFunction::X1, TestFunction::X2}) {
      auto h = tabulate_test_function(s, hn);
      for (auto anchor : {PoissonAnchor::ScaledOrigin, PoissonAnchor::EmptySystem}) {
        auto sol = solve_poisson(G, h, pi, anchor_state(s, anchor));
        EXPECT_LE(sol.residual, 1e-9);
        auto oracle = uniformized_poisson(G, h, pi, sol.anchor);
        for (std::size_t k = 0; k < s.size(); ++k) EXPECT_NEAR(sol.f[k], oracle[k], 1e-6);
      }
    }
  }
}

TEST(Poisson, DifferenceTablesAndMoments) {
  ModelParams p{25, 1, 1.0};
  StateSpace s(p);
  RateMatrix G(p, s);
  auto pi = stationary(G);
  auto sol = solve_poisson(G, tabulate_test_function(s, TestFunction::Sum), pi,
                           anchor_state(s, PoissonAnchor::ScaledOrigin));
  auto t0 = diff_table(s, sol.f, 0, 0);
  EXPECT_EQ(t0.size(), s.size());
  for (const auto& e : t0) EXPECT_EQ(e.value, sol.f[s.index(slice_state(s, e.k1, e.k2))]);
  auto t1 = diff_table(s, sol.f, 1, 0);
  for (const auto& e : t1) {
    const double expect = sol.f[s.index(slice_state(s, e.k1 + 1, e.k2))] - sol.f[s.index(slice_state(s, e.k1, e.k2))];
    EXPECT_DOUBLE_EQ(e.value, expect);
  }
  auto mi = moment_identity(s, pi, sol);
  EXPECT_NEAR(mi.lhs, mi.rhs, 1e-9);
  auto mom = scaled_moments(s, pi);
  EXPECT_NEAR(mom[0] + mom[1], mi.lhs, 1e-14);
}
